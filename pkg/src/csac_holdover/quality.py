"""GPS measurement-quality metrics over repeated datasets.

Several datasets recorded under identical conditions should agree; the spread
of their pairwise differences is the quality signal. The noise variance of a
value set is the mean squared pairwise difference, which works out to exactly
twice the unbiased sample variance. Stratifying the pooled pairwise
differences by visible-satellite count or by TDOP range shows how measurement
quality tracks each factor.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, InsufficientDataError, MetadataError, ValidationError
from .timeseries import EPOCH_TOL_S, MeasurementSeries

#: TDOP range edges used throughout: below 1.25 is "low", 2.0 and above "high".
DEFAULT_TDOP_THRESHOLDS = (1.25, 2.0)


@dataclass(frozen=True)
class QualityBinSpec:
    """How to stratify epochs: by visible count, or by TDOP range."""

    mode: str = "by_n_vis"
    tdop_thresholds: tuple[float, ...] = DEFAULT_TDOP_THRESHOLDS

    def __post_init__(self) -> None:
        if self.mode not in ("by_n_vis", "by_tdop"):
            raise ValidationError(f"mode must be by_n_vis or by_tdop, got {self.mode!r}")
        th = tuple(float(v) for v in self.tdop_thresholds)
        if any(v <= 0 for v in th) or any(b <= a for a, b in zip(th, th[1:])):
            raise ValidationError(
                f"tdop_thresholds must be positive and strictly increasing, got {th}"
            )
        object.__setattr__(self, "tdop_thresholds", th)


@dataclass(frozen=True)
class QualityBin:
    """One stratum: its label, pooled pairwise-difference count, and variance.

    ``noise_variance`` is None when fewer than two difference values landed in
    the bin. Units are ns^2 (offsets are ns).
    """

    label: str
    count: int
    noise_variance: float | None


@dataclass(frozen=True)
class QualityReport:
    """Noise variance per stratum, in stratum order (low to high)."""

    mode: str
    bins: tuple[QualityBin, ...]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("bin,count,noise_variance\n")
        for b in self.bins:
            nv = "" if b.noise_variance is None else f"{b.noise_variance:.9g}"
            out.write(f"{b.label},{b.count},{nv}\n")
        return out.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "mode": self.mode,
                "bins": [
                    {"bin": b.label, "count": b.count, "noise_variance": b.noise_variance}
                    for b in self.bins
                ],
            },
            indent=2,
        )


def noise_variance(x) -> float:
    """Mean squared pairwise difference of a value set.

    For n values this is ``sum_{i<j} (x_i - x_j)^2 / C(n, 2)``, identically
    2x the unbiased sample variance. Computed mean-centered so the result is
    stable under large common offsets.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.size
    if n < 2:
        raise InsufficientDataError(f"noise variance needs >= 2 values, got {n}")
    if not np.isfinite(x).all():
        raise ValidationError("noise variance input contains non-finite values")
    d = x - x.mean()
    ss = float(d @ d)
    s = float(d.sum())
    return (n * ss - s * s) * 2.0 / (n * (n - 1))


def _check_aligned(datasets: list[MeasurementSeries]) -> None:
    if len(datasets) < 2:
        raise InsufficientDataError("need at least 2 datasets for pairwise noise")
    ref = datasets[0]
    for k, ds in enumerate(datasets[1:], start=1):
        if len(ds) != len(ref):
            raise AlignmentError(
                f"dataset {k} has {len(ds)} samples, expected {len(ref)}"
            )
        if (ds.cadence_s is None) != (ref.cadence_s is None) or (
            ds.cadence_s is not None and ds.cadence_s != ref.cadence_s
        ):
            raise AlignmentError(
                f"dataset {k} cadence {ds.cadence_s} differs from {ref.cadence_s}"
            )
        if np.any(np.abs(ds.t_rel - ref.t_rel) > EPOCH_TOL_S):
            raise AlignmentError(f"dataset {k} epochs differ from dataset 0")
        if np.any(ds.n_vis != ref.n_vis):
            e = int(np.argmax(ds.n_vis != ref.n_vis))
            raise AlignmentError(
                f"dataset {k} n_vis disagrees with dataset 0 at epoch index {e}"
            )


def pairwise_noise_series(
    datasets: list[MeasurementSeries],
) -> list[tuple[tuple[int, int], np.ndarray]]:
    """Per-epoch offset differences for every dataset pair.

    Returns C(k, 2) entries keyed by (i, j) with i < j in input order; each
    value is ``offset_i - offset_j`` at matching epochs.
    """
    _check_aligned(datasets)
    out = []
    for i in range(len(datasets)):
        for j in range(i + 1, len(datasets)):
            out.append(((i, j), datasets[i].offset_ns - datasets[j].offset_ns))
    return out


def _bin_indices_and_labels(
    ref: MeasurementSeries, spec: QualityBinSpec
) -> tuple[np.ndarray, list[str]]:
    """Per-epoch bin index into the returned label list (first dataset's metadata)."""
    if spec.mode == "by_n_vis":
        values = np.unique(ref.n_vis)
        labels = [f"n_vis={int(v)}" for v in values]
        idx = np.searchsorted(values, ref.n_vis)
        return idx, labels
    if np.any(~ref.tdop_present()):
        e = int(np.argmax(~ref.tdop_present()))
        raise MetadataError(f"tdop absent at epoch index {e}; cannot stratify by TDOP")
    th = spec.tdop_thresholds
    labels = [f"tdop<{th[0]:g}"]
    labels += [f"{a:g}<=tdop<{b:g}" for a, b in zip(th, th[1:])]
    labels += [f"tdop>={th[-1]:g}"]
    # Left-closed bins: a value equal to a threshold belongs to the bin above it.
    idx = np.searchsorted(np.asarray(th), ref.tdop, side="right")
    return idx, labels


def stratified_quality(
    datasets: list[MeasurementSeries], spec: QualityBinSpec
) -> QualityReport:
    """Noise variance per quality stratum over aligned repeated datasets.

    Epochs are assigned to bins from the first dataset's metadata (visible
    count or TDOP range); all pairwise difference values whose epoch falls in
    a bin are pooled and the bin's noise variance computed from the pool.
    Bins that collect fewer than two values report an absent variance.
    """
    diffs = pairwise_noise_series(datasets)
    idx, labels = _bin_indices_and_labels(datasets[0], spec)
    bins = []
    for b, label in enumerate(labels):
        sel = idx == b
        pooled = np.concatenate([d[sel] for _, d in diffs]) if sel.any() else np.empty(0)
        variance = float(noise_variance(pooled)) if pooled.size >= 2 else None
        bins.append(QualityBin(label=label, count=int(pooled.size), noise_variance=variance))
    return QualityReport(mode=spec.mode, bins=tuple(bins))
