"""Drift models: weighted polynomial fits, coasting prediction, and scoring.

A drift model is a low-degree polynomial in elapsed time fitted to the clock
offset over a fit window, optionally weighted by GPS measurement quality
(reciprocal TDOP, or visible count over the scenario maximum). Coasting skill
is the RMSE of the model's extrapolation against withheld truth.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    AlignmentError,
    FitError,
    MetadataError,
    ValidationError,
    ZeroWeightError,
)
from .timeseries import EPOCH_TOL_S, MeasurementSeries

#: Time rescaling applied inside the solver; multi-hour windows expressed in
#: raw seconds make the degree-4 normal equations needlessly ill-conditioned.
_SECONDS_PER_HOUR = 3600.0

#: Canonical scheme ordering used for tie-breaks in model selection.
SCHEME_ORDER = ("uniform", "visnum_ratio", "inverse_tdop")


@dataclass(frozen=True)
class WeightScheme:
    """Per-sample weighting rule for the fit.

    ``visnum_ratio`` weights each sample by n_vis / n_max and therefore needs
    the scenario's maximum satellite count.
    """

    kind: str
    n_max: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in SCHEME_ORDER:
            raise ValidationError(
                f"kind must be one of {SCHEME_ORDER}, got {self.kind!r}"
            )
        if self.kind == "visnum_ratio":
            if self.n_max is None or self.n_max <= 0:
                raise ValidationError("visnum_ratio requires a positive n_max")

    @classmethod
    def uniform(cls) -> "WeightScheme":
        return cls("uniform")

    @classmethod
    def inverse_tdop(cls) -> "WeightScheme":
        return cls("inverse_tdop")

    @classmethod
    def visnum_ratio(cls, n_max: int) -> "WeightScheme":
        return cls("visnum_ratio", n_max=n_max)

    def describe(self) -> str:
        if self.kind == "visnum_ratio":
            return f"visnum_ratio(n_max={self.n_max})"
        return self.kind


@dataclass(frozen=True)
class DriftModel:
    """Fitted polynomial drift model.

    ``coeffs`` are ascending powers of (t_rel - t_ref_s), in ns, ns/s,
    ns/s^2, ... so ``coeffs[0]`` is the modeled offset at the fit-window
    start.
    """

    degree: int
    coeffs: tuple[float, ...]
    scheme: WeightScheme
    t_ref_s: float
    n_fit: int

    def __post_init__(self) -> None:
        if not 1 <= self.degree <= 4:
            raise ValidationError(f"degree must be in [1, 4], got {self.degree}")
        if len(self.coeffs) != self.degree + 1:
            raise ValidationError(
                f"expected {self.degree + 1} coefficients, got {len(self.coeffs)}"
            )
        if not all(np.isfinite(c) for c in self.coeffs):
            raise ValidationError("coefficients must be finite")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def to_json(self) -> str:
        doc = {
            "degree": self.degree,
            "coeffs_ns_per_s_pow": list(self.coeffs),
            "scheme": {"kind": self.scheme.kind, "n_max": self.scheme.n_max},
            "t_ref_s": self.t_ref_s,
            "n_fit": self.n_fit,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DriftModel":
        doc = json.loads(text)
        scheme = WeightScheme(doc["scheme"]["kind"], doc["scheme"].get("n_max"))
        return cls(
            degree=int(doc["degree"]),
            coeffs=tuple(doc["coeffs_ns_per_s_pow"]),
            scheme=scheme,
            t_ref_s=float(doc["t_ref_s"]),
            n_fit=int(doc["n_fit"]),
        )


@dataclass(frozen=True)
class ModelScore:
    """One row of a coasting comparison: a (degree, scheme) candidate."""

    degree: int
    scheme: WeightScheme
    rmse_ns: float | None
    model: DriftModel | None = None
    error: str | None = None


@dataclass(frozen=True)
class CoastReport:
    """Coasting comparison over a model grid, best (lowest RMSE) first."""

    rows: tuple[ModelScore, ...]
    horizon_s: float

    @property
    def rmse_ns(self) -> float:
        """Best achieved coasting RMSE [ns]."""
        scored = [r.rmse_ns for r in self.rows if r.rmse_ns is not None]
        if not scored:
            raise FitError("no candidate model could be fitted")
        return scored[0]

    @property
    def best(self) -> ModelScore:
        for r in self.rows:
            if r.rmse_ns is not None:
                return r
        raise FitError("no candidate model could be fitted")

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("degree,scheme,rmse_ns\n")
        for r in self.rows:
            rmse = "" if r.rmse_ns is None else f"{r.rmse_ns:.6f}"
            out.write(f"{r.degree},{r.scheme.kind},{rmse}\n")
        return out.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "horizon_s": self.horizon_s,
                "rows": [
                    {
                        "degree": r.degree,
                        "scheme": r.scheme.kind,
                        "n_max": r.scheme.n_max,
                        "rmse_ns": r.rmse_ns,
                        "error": r.error,
                    }
                    for r in self.rows
                ],
            },
            indent=2,
        )


def weights_for(series: MeasurementSeries, scheme: WeightScheme) -> np.ndarray:
    """Positive per-sample weights under the given scheme.

    Raises
    ------
    MetadataError
        Under ``inverse_tdop`` when any sample lacks a TDOP value.
    ZeroWeightError
        Under ``visnum_ratio`` when any sample has zero visible satellites.
    ValidationError
        Under ``visnum_ratio`` when n_max is below an observed n_vis.
    """
    n = len(series)
    if scheme.kind == "uniform":
        return np.ones(n)
    if scheme.kind == "inverse_tdop":
        absent = ~series.tdop_present()
        if absent.any():
            k = int(np.argmax(absent))
            raise MetadataError(
                f"inverse_tdop weighting needs tdop at every sample; absent at index {k}"
            )
        return 1.0 / series.tdop
    # visnum_ratio
    observed_max = int(series.n_vis.max())
    if scheme.n_max < observed_max:
        raise ValidationError(
            f"n_max={scheme.n_max} below observed n_vis maximum {observed_max}"
        )
    if np.any(series.n_vis == 0):
        k = int(np.argmax(series.n_vis == 0))
        raise ZeroWeightError(
            f"sample index {k} has n_vis=0 and would receive zero weight"
        )
    return series.n_vis / float(scheme.n_max)


def fit(series: MeasurementSeries, degree: int, scheme: WeightScheme) -> DriftModel:
    """Weighted least-squares polynomial fit of offset vs elapsed time.

    Minimizes ``sum_i w_i (offset_i - p(t_i - t_ref))^2`` with ``t_ref`` the
    window start, via the normal equations on an hour-scaled time axis (one
    same-precision refinement pass tightens the solve). Coefficients are
    reported back in ns/s^k. With exactly degree+1 distinct samples the fit
    interpolates.
    """
    if not 1 <= degree <= 4:
        raise ValidationError(f"degree must be in [1, 4], got {degree}")
    n = len(series)
    if n < degree + 1:
        raise FitError(f"degree {degree} needs >= {degree + 1} samples, got {n}")
    w = weights_for(series, scheme)

    t_ref = float(series.t_rel[0])
    tau = (series.t_rel - t_ref) / _SECONDS_PER_HOUR
    a = np.vander(tau, degree + 1, increasing=True)
    aw = a * w[:, None]
    g = a.T @ aw
    b = aw.T @ series.offset_ns
    try:
        np.linalg.cholesky(g)  # SPD check; fails on rank-deficient designs
        c = np.linalg.solve(g, b)
        c += np.linalg.solve(g, b - g @ c)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"normal equations are singular: {exc}") from None
    coeffs = c / _SECONDS_PER_HOUR ** np.arange(degree + 1)
    return DriftModel(
        degree=degree,
        coeffs=tuple(coeffs),
        scheme=scheme,
        t_ref_s=t_ref,
        n_fit=n,
    )


def predict(model: DriftModel, t_rel) -> "float | np.ndarray":
    """Evaluate the model at ``t_rel`` seconds (scalar or array) -> offset [ns]."""
    val = P.polyval(np.asarray(t_rel, dtype=np.float64) - model.t_ref_s, model.coeffs)
    return float(val) if np.isscalar(t_rel) else val


def coast_rmse(model: DriftModel, truth: MeasurementSeries) -> float:
    """Root-mean-square prediction error [ns] against a truth series."""
    err = predict(model, truth.t_rel) - truth.offset_ns
    return float(np.sqrt(np.mean(err * err)))


def _window_cadence(fit_window: MeasurementSeries, coast_window: MeasurementSeries) -> float:
    cadences = {fit_window.cadence_s, coast_window.cadence_s} - {None}
    if len(cadences) > 1:
        raise AlignmentError(
            f"fit and coast windows declare different cadences: {sorted(cadences)}"
        )
    if cadences:
        return float(cadences.pop())
    if len(fit_window) >= 2:
        return float(fit_window.t_rel[1] - fit_window.t_rel[0])
    return float(coast_window.t_rel[0] - fit_window.t_rel[0])


def model_select(
    fit_window: MeasurementSeries,
    coast_window: MeasurementSeries,
    degrees=(1, 2, 3, 4),
    schemes=(WeightScheme.uniform(),),
) -> CoastReport:
    """Fit every (degree, scheme) candidate and rank by coasting RMSE.

    The windows must be contiguous: the coast window starts one cadence after
    the fit window ends. Rows are sorted ascending by RMSE with ties broken
    toward the lower degree, then the scheme order uniform, visnum_ratio,
    inverse_tdop. Candidates whose fit fails keep a row with the error noted
    and sort after all scored rows.
    """
    cadence = _window_cadence(fit_window, coast_window)
    gap = float(coast_window.t_rel[0] - fit_window.t_rel[-1])
    if abs(gap - cadence) > EPOCH_TOL_S:
        raise AlignmentError(
            f"coast window must start one cadence ({cadence} s) after the fit "
            f"window; gap is {gap} s"
        )
    degrees = sorted(set(int(d) for d in degrees))
    if any(d not in (1, 2, 3, 4) for d in degrees):
        raise ValidationError(f"degrees must be drawn from {{1,2,3,4}}, got {degrees}")

    rows: list[ModelScore] = []
    for degree in degrees:
        for scheme in schemes:
            try:
                model = fit(fit_window, degree, scheme)
                rows.append(
                    ModelScore(
                        degree=degree,
                        scheme=scheme,
                        rmse_ns=coast_rmse(model, coast_window),
                        model=model,
                    )
                )
            except (FitError, MetadataError, ZeroWeightError, ValidationError) as exc:
                rows.append(
                    ModelScore(degree=degree, scheme=scheme, rmse_ns=None, error=str(exc))
                )

    def sort_key(r: ModelScore):
        failed = r.rmse_ns is None
        return (
            failed,
            r.rmse_ns if not failed else 0.0,
            r.degree,
            SCHEME_ORDER.index(r.scheme.kind),
        )

    rows.sort(key=sort_key)
    if coast_window.cadence_s is not None:
        horizon = len(coast_window) * coast_window.cadence_s
    else:
        horizon = float(coast_window.t_rel[-1] - coast_window.t_rel[0]) + cadence
    return CoastReport(rows=tuple(rows), horizon_s=horizon)
