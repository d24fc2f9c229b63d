"""Clock-offset measurement series: data model, CSV round trip, windowing.

A measurement series holds timestamped CSAC-minus-GPS-time offsets in
nanoseconds together with per-epoch GPS quality metadata (visible-satellite
count, TDOP). Offsets are kept in nanoseconds so sub-microsecond structure
survives the round trip through CSV.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .errors import (
    BoundsError,
    CadenceError,
    FormatError,
    OrderingError,
    ValidationError,
)

CSV_HEADER = "t_rel_s,offset_ns,n_vis,tdop"

#: Equality tolerance on relative epochs [s] (cadence checks, round trips).
EPOCH_TOL_S = 1e-9
#: Equality tolerance on offsets [ns] for round-trip comparisons.
OFFSET_TOL_NS = 1e-3


@dataclass(frozen=True)
class Epoch:
    """A sampling instant: seconds since series start, optional UTC stamp."""

    t_rel: float
    t_abs: datetime | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.t_rel) or self.t_rel < 0:
            raise ValidationError(f"t_rel must be finite and >= 0, got {self.t_rel}")


@dataclass(frozen=True)
class Sample:
    """One measurement epoch: clock offset plus GPS quality metadata.

    ``tdop`` is None when fewer than four satellites were usable and no
    dilution-of-precision value exists for the epoch.
    """

    epoch: Epoch
    offset_ns: float
    n_vis: int
    tdop: float | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.offset_ns):
            raise ValidationError(f"offset_ns must be finite, got {self.offset_ns}")
        if self.n_vis < 0:
            raise ValidationError(f"n_vis must be >= 0, got {self.n_vis}")
        if self.tdop is not None:
            if not np.isfinite(self.tdop) or self.tdop <= 0:
                raise ValidationError(f"tdop must be > 0 when present, got {self.tdop}")
            if self.n_vis < 4:
                raise ValidationError(
                    f"tdop present but n_vis={self.n_vis} < 4 (no solution geometry)"
                )


@dataclass(frozen=True)
class MeasurementSeries:
    """Ordered clock-offset samples with uniform (optionally declared) cadence.

    Internally array-backed: ``t_rel``, ``offset_ns``, ``n_vis`` and ``tdop``
    are parallel numpy arrays; absent TDOP is stored as NaN in ``tdop`` but is
    exposed as None through :class:`Sample`. Instances are immutable; the
    arrays are set read-only so a series can be shared freely.
    """

    t_rel: np.ndarray = field(repr=False)
    offset_ns: np.ndarray = field(repr=False)
    n_vis: np.ndarray = field(repr=False)
    tdop: np.ndarray = field(repr=False)
    cadence_s: float | None = None
    label: str = ""
    start: datetime | None = None

    def __post_init__(self) -> None:
        t = np.ascontiguousarray(self.t_rel, dtype=np.float64)
        x = np.ascontiguousarray(self.offset_ns, dtype=np.float64)
        nv = np.ascontiguousarray(self.n_vis, dtype=np.int64)
        td = np.ascontiguousarray(self.tdop, dtype=np.float64)
        if not (t.shape == x.shape == nv.shape == td.shape) or t.ndim != 1:
            raise ValidationError("series arrays must be 1-D and of equal length")
        if t.size == 0:
            raise ValidationError("a measurement series may not be empty")
        if not np.isfinite(t).all() or t[0] < 0:
            raise ValidationError("t_rel must be finite and start >= 0")
        if np.any(np.diff(t) <= 0):
            k = int(np.argmax(np.diff(t) <= 0))
            raise OrderingError(
                f"t_rel not strictly increasing at sample index {k + 1} "
                f"(t={t[k + 1]!r} after t={t[k]!r})"
            )
        if not np.isfinite(x).all():
            raise ValidationError("offset_ns contains non-finite values")
        if np.any(nv < 0):
            raise ValidationError("n_vis contains negative values")
        present = ~np.isnan(td)
        if np.any(td[present] <= 0):
            raise ValidationError("tdop must be > 0 where present")
        if np.any(nv[present] < 4):
            k = int(np.argmax(present & (nv < 4)))
            raise ValidationError(
                f"sample index {k}: tdop present but n_vis={int(nv[k])} < 4"
            )
        if self.cadence_s is not None:
            if self.cadence_s <= 0:
                raise ValidationError(f"cadence_s must be > 0, got {self.cadence_s}")
            bad = np.abs(np.diff(t) - self.cadence_s) > EPOCH_TOL_S
            if np.any(bad):
                k = int(np.argmax(bad))
                raise CadenceError(
                    f"cadence {self.cadence_s} s violated between samples "
                    f"{k} and {k + 1} (dt={t[k + 1] - t[k]!r})"
                )
        for name, arr in (("t_rel", t), ("offset_ns", x), ("n_vis", nv), ("tdop", td)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_samples(
        cls,
        samples: list[Sample],
        cadence_s: float | None = None,
        label: str = "",
    ) -> MeasurementSeries:
        t = np.array([s.epoch.t_rel for s in samples], dtype=np.float64)
        x = np.array([s.offset_ns for s in samples], dtype=np.float64)
        nv = np.array([s.n_vis for s in samples], dtype=np.int64)
        td = np.array(
            [np.nan if s.tdop is None else s.tdop for s in samples], dtype=np.float64
        )
        start = samples[0].epoch.t_abs if samples else None
        return cls(t, x, nv, td, cadence_s=cadence_s, label=label, start=start)

    # -- sample access ----------------------------------------------------

    def __len__(self) -> int:
        return int(self.t_rel.size)

    def __getitem__(self, i: int) -> Sample:
        t = float(self.t_rel[i])
        t_abs = self.start + timedelta(seconds=t) if self.start is not None else None
        td = float(self.tdop[i])
        return Sample(
            epoch=Epoch(t_rel=t, t_abs=t_abs),
            offset_ns=float(self.offset_ns[i]),
            n_vis=int(self.n_vis[i]),
            tdop=None if np.isnan(td) else td,
        )

    @property
    def samples(self) -> list[Sample]:
        return [self[i] for i in range(len(self))]

    def tdop_present(self) -> np.ndarray:
        """Boolean mask of epochs that carry a TDOP value."""
        return ~np.isnan(self.tdop)

    def approx_equal(
        self,
        other: MeasurementSeries,
        t_tol: float = EPOCH_TOL_S,
        offset_tol: float = OFFSET_TOL_NS,
    ) -> bool:
        """Field-wise equality up to the declared round-trip tolerances."""
        if len(self) != len(other):
            return False
        if np.any(np.abs(self.t_rel - other.t_rel) > t_tol):
            return False
        if np.any(np.abs(self.offset_ns - other.offset_ns) > offset_tol):
            return False
        if np.any(self.n_vis != other.n_vis):
            return False
        pa, pb = self.tdop_present(), other.tdop_present()
        if np.any(pa != pb):
            return False
        return not np.any(np.abs(self.tdop[pa] - other.tdop[pb]) > 1e-6)


def split_at(
    series: MeasurementSeries, n_fit: int
) -> tuple[MeasurementSeries, MeasurementSeries]:
    """Split into a fit window (first ``n_fit`` samples) and a coast window.

    Both windows keep the original relative time axis and inherit the declared
    cadence, so concatenating the two reproduces the input series.
    """
    n = len(series)
    if not 0 < n_fit < n:
        raise BoundsError(f"n_fit must satisfy 0 < n_fit < {n}, got {n_fit}")
    parts = []
    for sl in (slice(0, n_fit), slice(n_fit, n)):
        parts.append(
            MeasurementSeries(
                series.t_rel[sl].copy(),
                series.offset_ns[sl].copy(),
                series.n_vis[sl].copy(),
                series.tdop[sl].copy(),
                cadence_s=series.cadence_s,
                label=series.label,
                start=series.start,
            )
        )
    return parts[0], parts[1]


def _fmt_t(t: float) -> str:
    s = f"{t:.9f}".rstrip("0").rstrip(".")
    return s if s else "0"


def _fmt_tdop(v: float) -> str:
    return "" if np.isnan(v) else f"{v:.6f}"


def emit_series(series: MeasurementSeries) -> bytes:
    """Render a series as CSV bytes in the format accepted by parse_series.

    Offsets carry six decimal digits of nanoseconds; epochs are printed to
    nanosecond resolution with trailing zeros trimmed.
    """
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for k in range(len(series)):
        out.write(
            f"{_fmt_t(series.t_rel[k])},{series.offset_ns[k]:.6f},"
            f"{int(series.n_vis[k])},{_fmt_tdop(series.tdop[k])}\n"
        )
    return out.getvalue().encode("utf-8")


def parse_series(
    data: bytes | str,
    cadence_s: float | None = None,
    label: str = "",
) -> MeasurementSeries:
    """Parse CSV measurement data (header ``t_rel_s,offset_ns,n_vis,tdop``).

    An empty ``tdop`` field means the value is absent for that epoch. Errors
    name the offending 1-based line: malformed rows raise
    :class:`~csac_holdover.errors.FormatError`, non-increasing epochs
    :class:`~csac_holdover.errors.OrderingError`, and spacing that disagrees
    with a declared ``cadence_s``
    :class:`~csac_holdover.errors.CadenceError`.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("line 1: empty input, expected header")
    if lines[0].strip("\r") != CSV_HEADER:
        raise FormatError(f"line 1: expected header {CSV_HEADER!r}, got {lines[0]!r}")
    if len(lines) < 2:
        raise FormatError("line 2: no data rows")

    n = len(lines) - 1
    t = np.empty(n)
    x = np.empty(n)
    nv = np.empty(n, dtype=np.int64)
    td = np.empty(n)
    for k, row in enumerate(lines[1:]):
        lineno = k + 2
        fields = row.strip("\r").split(",")
        if len(fields) != 4:
            raise FormatError(f"line {lineno}: expected 4 fields, got {len(fields)}")
        try:
            t[k] = float(fields[0])
            x[k] = float(fields[1])
            nv[k] = int(fields[2])
            td[k] = np.nan if fields[3] == "" else float(fields[3])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        if not np.isfinite(t[k]) or t[k] < 0:
            raise FormatError(f"line {lineno}: t_rel_s must be finite and >= 0")
        if not np.isfinite(x[k]):
            raise FormatError(f"line {lineno}: offset_ns must be finite")
        if nv[k] < 0:
            raise FormatError(f"line {lineno}: n_vis must be >= 0")
        if not np.isnan(td[k]):
            if not np.isfinite(td[k]) or td[k] <= 0:
                raise FormatError(f"line {lineno}: tdop must be > 0 when present")
            if nv[k] < 4:
                raise FormatError(
                    f"line {lineno}: tdop present but n_vis={int(nv[k])} < 4"
                )
        if k > 0:
            if t[k] <= t[k - 1]:
                raise OrderingError(
                    f"line {lineno}: t_rel_s {t[k]!r} not greater than "
                    f"previous {t[k - 1]!r}"
                )
            if cadence_s is not None and abs(t[k] - t[k - 1] - cadence_s) > EPOCH_TOL_S:
                raise CadenceError(
                    f"line {lineno}: spacing {t[k] - t[k - 1]!r} s does not match "
                    f"declared cadence {cadence_s} s"
                )
    return MeasurementSeries(t, x, nv, td, cadence_s=cadence_s, label=label)
