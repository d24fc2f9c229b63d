"""Synthetic end-to-end datasets: clock truth plus per-epoch GPS quality.

Generates what the hardware bench would have produced: a free-running CSAC's
offset against GPS time sampled on a regular cadence, with each epoch's
visible-satellite count and TDOP from the constellation geometry, and
optional measurement noise whose size follows TDOP. Everything is a pure
function of (scenario, clock spec, constellation); randomness comes from
numpy's PCG64 with per-replicate streams split as SeedSequence([seed, index])
so ensembles are reproducible bit-for-bit on a given build.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np

from .errors import ValidationError
from .geometry import (
    DEFAULT_MASK_RAD,
    Constellation,
    DopTimeline,
    ReceiverPos,
    dop_timeline,
)
from .timeseries import MeasurementSeries

#: Calendar instant mapped to t=0 of constellation propagation.
REFERENCE_EPOCH = datetime(2023, 1, 1, tzinfo=timezone.utc)

#: TDOP stand-in for measurement noise when no TDOP has been seen yet
#: (top of the typically observed range).
FALLBACK_TDOP = 3.0


@dataclass(frozen=True)
class ClockSpec:
    """Truth parameters of the simulated clock.

    The deterministic part is ``x0 + y0*t + 0.5*d*t^2``. On top of that,
    white frequency noise integrates into a random walk of the phase whose
    standard deviation grows as ``sigma_rwfm_ns_per_sqrt_s * sqrt(t)``, and
    each sample carries independent white phase noise of ``sigma_wpm_ns``.
    ``tdop_noise_gain`` couples additional measurement noise to the epoch's
    TDOP (sigma = gain * tdop, in ns); zero disables it.

    Defaults land coasting errors in the low-microsecond range typical of a
    chip-scale atomic clock left free-running for half a day; they are
    plausibility anchors, not calibrated device constants.
    """

    x0_ns: float = 4000.0
    y0_ns_per_s: float = 0.05
    d_ns_per_s2: float = 1e-6
    sigma_wpm_ns: float = 2.0
    sigma_rwfm_ns_per_sqrt_s: float = 0.05
    tdop_noise_gain: float = 0.0

    def __post_init__(self) -> None:
        for name in ("sigma_wpm_ns", "sigma_rwfm_ns_per_sqrt_s", "tdop_noise_gain"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")


@dataclass(frozen=True)
class Scenario:
    """One simulated data-collection campaign."""

    start: datetime
    duration_s: float
    rx: ReceiverPos
    cadence_s: float = 2.0
    max_sats: int | None = None
    mask_rad: float = DEFAULT_MASK_RAD
    seed: int = 0
    name: str = ""

    def __post_init__(self) -> None:
        if self.duration_s <= 0 or self.cadence_s <= 0:
            raise ValidationError("duration_s and cadence_s must be > 0")
        ratio = self.duration_s / self.cadence_s
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValidationError(
                f"duration_s={self.duration_s} not divisible by cadence_s={self.cadence_s}"
            )
        if self.max_sats is not None and self.max_sats <= 0:
            raise ValidationError(f"max_sats must be positive, got {self.max_sats}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a non-negative 64-bit integer")
        if self.start.tzinfo is None:
            object.__setattr__(self, "start", self.start.replace(tzinfo=timezone.utc))

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s / self.cadence_s)) + 1

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.cadence_s

    def start_offset_s(self) -> float:
        """Seconds between the constellation reference epoch and scenario start."""
        return (self.start - REFERENCE_EPOCH).total_seconds()


def preset_scenarios() -> list[Scenario]:
    """The three built-in campaign setups (Incheon, New York, Florence).

    Each runs 18 hours at a 2-second cadence: a 6-hour fit window followed by
    a 12-hour coast window.
    """
    common = dict(duration_s=64_800.0, cadence_s=2.0, mask_rad=DEFAULT_MASK_RAD)
    return [
        Scenario(
            start=datetime(2023, 1, 10, 10, 0, tzinfo=timezone.utc),
            rx=ReceiverPos(math.radians(37.6315), math.radians(126.3633), 11.665),
            max_sats=7,
            seed=20230110,
            name="scenario-1-incheon",
            **common,
        ),
        Scenario(
            start=datetime(2023, 1, 8, 4, 0, tzinfo=timezone.utc),
            rx=ReceiverPos(math.radians(43.0830), math.radians(-77.5890), 206.550),
            max_sats=8,
            seed=20230108,
            name="scenario-2-newyork",
            **common,
        ),
        Scenario(
            start=datetime(2023, 1, 9, 4, 0, tzinfo=timezone.utc),
            rx=ReceiverPos(math.radians(43.7800), math.radians(11.2500), 31.200),
            max_sats=9,
            seed=20230109,
            name="scenario-3-florence",
            **common,
        ),
    ]


def _clock_truth(
    spec: ClockSpec, n: int, cadence_s: float, rng: np.random.Generator
) -> np.ndarray:
    t = np.arange(n) * cadence_s
    x = spec.x0_ns + spec.y0_ns_per_s * t + 0.5 * spec.d_ns_per_s2 * t * t
    if spec.sigma_wpm_ns > 0:
        x = x + spec.sigma_wpm_ns * rng.standard_normal(n)
    if spec.sigma_rwfm_ns_per_sqrt_s > 0 and n > 1:
        step = spec.sigma_rwfm_ns_per_sqrt_s * math.sqrt(cadence_s)
        walk = np.concatenate([[0.0], np.cumsum(step * rng.standard_normal(n - 1))])
        x = x + walk
    return x


def simulate_clock_truth(
    spec: ClockSpec, n: int, cadence_s: float, seed: int
) -> np.ndarray:
    """Clock offset truth [ns] at ``n`` epochs spaced ``cadence_s`` apart.

    Deterministic given ``seed``; with all noise terms zero the result is the
    exact deterministic polynomial.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    return _clock_truth(spec, n, cadence_s, rng)


def _fill_tdop(tdop: np.ndarray) -> np.ndarray:
    """Forward-fill absent TDOP; leading gaps take the fallback value."""
    filled = tdop.copy()
    last = FALLBACK_TDOP
    for k in range(filled.size):
        if np.isnan(filled[k]):
            filled[k] = last
        else:
            last = filled[k]
    return filled


def _one_dataset(
    scn: Scenario,
    spec: ClockSpec,
    sky: DopTimeline,
    index: int,
    label: str,
) -> MeasurementSeries:
    rng = np.random.default_rng(np.random.SeedSequence([scn.seed, index]))
    offsets = _clock_truth(spec, scn.n_samples, scn.cadence_s, rng)
    if spec.tdop_noise_gain > 0:
        sigma = spec.tdop_noise_gain * _fill_tdop(sky.tdop)
        offsets = offsets + sigma * rng.standard_normal(scn.n_samples)
    return MeasurementSeries(
        scn.times(),
        offsets,
        sky.n_vis,
        sky.tdop,
        cadence_s=scn.cadence_s,
        label=label,
        start=scn.start,
    )


def sky_for_scenario(scn: Scenario, cst: Constellation) -> DopTimeline:
    """Visibility/DOP history of a scenario (shared by all its replicates)."""
    return dop_timeline(
        cst,
        scn.rx,
        scn.start_offset_s() + scn.times(),
        mask_rad=scn.mask_rad,
        max_sats=scn.max_sats,
    )


def simulate_dataset(
    scn: Scenario, spec: ClockSpec, cst: Constellation
) -> MeasurementSeries:
    """One synthetic measurement campaign.

    Per epoch: the geometry module supplies n_vis and TDOP, the clock model
    supplies the offset truth, and (when ``tdop_noise_gain`` > 0) measurement
    noise with sigma = gain * TDOP is added. During TDOP-less epochs the noise
    reuses the last seen TDOP. Equals ``replicate(...)[0]`` for the same
    inputs.
    """
    sky = sky_for_scenario(scn, cst)
    label = scn.name or f"sim-seed{scn.seed}"
    return _one_dataset(scn, spec, sky, index=0, label=label)


def replicate(
    scn: Scenario, spec: ClockSpec, cst: Constellation, k: int
) -> list[MeasurementSeries]:
    """``k`` repeated campaigns under identical conditions.

    All replicates share the same per-epoch metadata (n_vis, TDOP) and differ
    only in their noise draws; replicate ``i`` uses the stream
    SeedSequence([scenario seed, i]).
    """
    if k < 2:
        raise ValidationError(f"replicate needs k >= 2, got {k}")
    sky = sky_for_scenario(scn, cst)
    base = scn.name or f"sim-seed{scn.seed}"
    return [
        _one_dataset(scn, spec, sky, index=i, label=f"{base}-r{i}") for i in range(k)
    ]


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a Scenario from a JSON-style mapping.

    Either ``{"preset": 1|2|3, ...overrides}`` or explicit fields
    (``start`` ISO-8601, ``duration_s``, ``cadence_s``, ``lat_deg``,
    ``lon_deg``, ``alt_m``, ``max_sats``, ``mask_deg``, ``seed``, ``name``).
    """
    doc = dict(doc)
    if "preset" in doc:
        idx = doc.pop("preset")
        presets = preset_scenarios()
        if not isinstance(idx, int) or not 1 <= idx <= len(presets):
            raise ValidationError(f"preset must be 1..{len(presets)}, got {idx!r}")
        scn = presets[idx - 1]
    else:
        required = {"start", "duration_s", "lat_deg", "lon_deg"}
        missing = required - doc.keys()
        if missing:
            raise ValidationError(f"scenario config missing fields: {sorted(missing)}")
        scn = Scenario(
            start=_parse_start(doc.pop("start")),
            duration_s=float(doc.pop("duration_s")),
            rx=ReceiverPos(
                math.radians(float(doc.pop("lat_deg"))),
                math.radians(float(doc.pop("lon_deg"))),
                float(doc.pop("alt_m", 0.0)),
            ),
        )
    updates = {}
    for key in ("duration_s", "cadence_s", "seed", "name"):
        if key in doc:
            updates[key] = doc.pop(key)
    if "start" in doc:
        updates["start"] = _parse_start(doc.pop("start"))
    if "max_sats" in doc:
        v = doc.pop("max_sats")
        updates["max_sats"] = None if v is None else int(v)
    if "mask_deg" in doc:
        updates["mask_rad"] = math.radians(float(doc.pop("mask_deg")))
    if {"lat_deg", "lon_deg", "alt_m"} & doc.keys():
        updates["rx"] = ReceiverPos(
            math.radians(float(doc.pop("lat_deg", math.degrees(scn.rx.lat_rad)))),
            math.radians(float(doc.pop("lon_deg", math.degrees(scn.rx.lon_rad)))),
            float(doc.pop("alt_m", scn.rx.alt_m)),
        )
    if doc:
        raise ValidationError(f"unknown scenario config fields: {sorted(doc)}")
    return replace(scn, **updates) if updates else scn


def clock_spec_from_dict(doc: dict) -> ClockSpec:
    """Build a ClockSpec from a JSON-style mapping (field names as attributes)."""
    known = {f for f in ClockSpec.__dataclass_fields__}
    unknown = doc.keys() - known
    if unknown:
        raise ValidationError(f"unknown clock config fields: {sorted(unknown)}")
    return ClockSpec(**{k: float(v) for k, v in doc.items()})


def _parse_start(value) -> datetime:
    if isinstance(value, datetime):
        return value
    try:
        return datetime.fromisoformat(str(value).replace("Z", "+00:00"))
    except ValueError as exc:
        raise ValidationError(f"bad start timestamp {value!r}: {exc}") from None
