"""GPS constellation propagation, visibility, and dilution of precision.

Satellites follow circular Keplerian orbits (no perturbations); this yields
plausible visibility and DOP time histories without ephemeris-grade modeling.
Line-of-sight vectors are expressed East-North-Up at the receiver, and DOP
factors come from the standard geometry-matrix formulation: row i of G is
``[-e_i, -n_i, -u_i, 1]`` and the cofactor matrix is ``Q = (G^T G)^-1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, FormatError, ValidationError
from .timeseries import Epoch

# WGS-84 ellipsoid and gravitational constants.
WGS84_A_M = 6_378_137.0
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)
EARTH_ROTATION_RATE_RAD_S = 7.2921151467e-5
EARTH_GM_M3_S2 = 3.986004418e14

# Nominal GPS shell: 6 planes at 55 deg inclination, semi-major axis below.
GPS_SMA_M = 26_559_710.0
GPS_INCLINATION_RAD = math.radians(55.0)

#: Default elevation mask [rad] below which satellites are discarded.
DEFAULT_MASK_RAD = math.radians(5.0)

#: Condition-number ceiling beyond which a geometry is treated as singular.
SINGULARITY_COND = 1e12

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OrbitalElement:
    """Circular-orbit element set for one satellite.

    Angles are normalized into [0, 2*pi) at construction.
    """

    prn: int
    semi_major_axis_m: float
    inclination_rad: float
    raan_rad: float
    arg_lat_epoch_rad: float

    def __post_init__(self) -> None:
        if self.prn <= 0:
            raise ValidationError(f"prn must be positive, got {self.prn}")
        if self.semi_major_axis_m <= WGS84_A_M:
            raise ValidationError(
                f"semi-major axis {self.semi_major_axis_m} m is not above the Earth"
            )
        if not 0.0 <= self.inclination_rad <= math.pi:
            raise ValidationError(
                f"inclination must lie in [0, pi], got {self.inclination_rad}"
            )
        object.__setattr__(self, "raan_rad", self.raan_rad % _TWO_PI)
        object.__setattr__(self, "arg_lat_epoch_rad", self.arg_lat_epoch_rad % _TWO_PI)


@dataclass(frozen=True)
class Constellation:
    """A set of satellites plus the Earth constants used to propagate them."""

    elements: tuple[OrbitalElement, ...]
    earth_rotation_rate_rad_s: float = EARTH_ROTATION_RATE_RAD_S
    gm_m3_s2: float = EARTH_GM_M3_S2

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise ValidationError("constellation must contain at least one satellite")
        prns = [e.prn for e in self.elements]
        if len(set(prns)) != len(prns):
            raise ValidationError("constellation PRNs must be unique")

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class ReceiverPos:
    """WGS-84 geodetic receiver position."""

    lat_rad: float
    lon_rad: float
    alt_m: float = 0.0

    def __post_init__(self) -> None:
        if abs(self.lat_rad) > math.pi / 2:
            raise ValidationError(f"|lat_rad| must be <= pi/2, got {self.lat_rad}")


@dataclass(frozen=True)
class DopSet:
    """Dilution-of-precision factors from one epoch's geometry."""

    gdop: float
    pdop: float
    hdop: float
    vdop: float
    tdop: float


@dataclass(frozen=True)
class SkyState:
    """Per-epoch visibility: who is above the mask, where, and how well spread.

    ``los`` pairs each visible PRN with its unit line-of-sight vector in
    East-North-Up coordinates at the receiver. ``dops`` is None when fewer
    than four satellites are visible or the geometry is singular.
    """

    epoch: Epoch
    los: tuple[tuple[int, np.ndarray], ...]
    dops: DopSet | None = None

    @property
    def n_vis(self) -> int:
        return len(self.los)


def nominal_gps_constellation() -> Constellation:
    """Build the nominal 24-satellite GPS shell.

    Six planes with right ascensions 60 degrees apart, four satellites per
    plane spaced 90 degrees in argument of latitude, and a 30-degree phase
    advance per plane index. All orbits circular at 55 degrees inclination.
    """
    elements = []
    for plane in range(6):
        raan = math.radians(60.0 * plane)
        for slot in range(4):
            arg_lat = math.radians(90.0 * slot + 30.0 * plane)
            elements.append(
                OrbitalElement(
                    prn=4 * plane + slot + 1,
                    semi_major_axis_m=GPS_SMA_M,
                    inclination_rad=GPS_INCLINATION_RAD,
                    raan_rad=raan,
                    arg_lat_epoch_rad=arg_lat,
                )
            )
    return Constellation(tuple(elements))


def constellation_from_json(text: str) -> Constellation:
    """Load a constellation from a JSON array of orbital-element objects.

    Each entry must provide ``prn``, ``a_m``, ``inc_deg``, ``raan_deg`` and
    ``arg_lat_deg``. Earth constants are fixed at their WGS-84 values.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"constellation JSON: {exc}") from None
    if not isinstance(doc, list):
        raise FormatError("constellation JSON must be a list of element objects")
    elements = []
    for k, item in enumerate(doc):
        try:
            elements.append(
                OrbitalElement(
                    prn=int(item["prn"]),
                    semi_major_axis_m=float(item["a_m"]),
                    inclination_rad=math.radians(float(item["inc_deg"])),
                    raan_rad=math.radians(float(item["raan_deg"])),
                    arg_lat_epoch_rad=math.radians(float(item["arg_lat_deg"])),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"constellation JSON entry {k}: {exc!r}") from None
    return Constellation(tuple(elements))


def satellite_ecef(elem: OrbitalElement, t: float, cst: Constellation) -> np.ndarray:
    """Earth-fixed satellite position [m] at ``t`` seconds past the reference epoch.

    The in-plane anomaly advances at the circular mean motion; the ascending
    node regresses with Earth rotation to express the result in the rotating
    Earth-fixed frame. The position norm equals the semi-major axis exactly.
    """
    return _ecef_many(elem, np.asarray([t], dtype=np.float64), cst)[0]


def _ecef_many(elem: OrbitalElement, t: np.ndarray, cst: Constellation) -> np.ndarray:
    a = elem.semi_major_axis_m
    mean_motion = math.sqrt(cst.gm_m3_s2 / a**3)
    u = elem.arg_lat_epoch_rad + mean_motion * t
    node = elem.raan_rad - cst.earth_rotation_rate_rad_s * t
    cu, su = np.cos(u), np.sin(u)
    ci, si = math.cos(elem.inclination_rad), math.sin(elem.inclination_rad)
    cn, sn = np.cos(node), np.sin(node)
    # In-plane (a*cu, a*su, 0) rotated by Rz(node) @ Rx(inclination).
    x_orb, y_orb = a * cu, a * su
    return np.stack(
        [
            cn * x_orb - sn * ci * y_orb,
            sn * x_orb + cn * ci * y_orb,
            si * y_orb,
        ],
        axis=-1,
    )


def orbital_period_s(elem: OrbitalElement, cst: Constellation) -> float:
    """Keplerian period 2*pi*sqrt(a^3/GM) [s]."""
    return _TWO_PI * math.sqrt(elem.semi_major_axis_m**3 / cst.gm_m3_s2)


def geodetic_to_ecef(rx: ReceiverPos) -> np.ndarray:
    """Closed-form WGS-84 geodetic to Earth-fixed Cartesian conversion [m]."""
    slat, clat = math.sin(rx.lat_rad), math.cos(rx.lat_rad)
    slon, clon = math.sin(rx.lon_rad), math.cos(rx.lon_rad)
    n = WGS84_A_M / math.sqrt(1.0 - WGS84_E2 * slat * slat)
    return np.array(
        [
            (n + rx.alt_m) * clat * clon,
            (n + rx.alt_m) * clat * slon,
            (n * (1.0 - WGS84_E2) + rx.alt_m) * slat,
        ]
    )


def enu_rotation(rx: ReceiverPos) -> np.ndarray:
    """Rows map an Earth-fixed delta vector to (east, north, up) at ``rx``."""
    slat, clat = math.sin(rx.lat_rad), math.cos(rx.lat_rad)
    slon, clon = math.sin(rx.lon_rad), math.cos(rx.lon_rad)
    return np.array(
        [
            [-slon, clon, 0.0],
            [-slat * clon, -slat * slon, clat],
            [clat * clon, clat * slon, slat],
        ]
    )


def dop_from_los(los: "list[np.ndarray] | np.ndarray") -> DopSet:
    """DOP factors from >= 4 unit line-of-sight vectors (East-North-Up).

    Parameters
    ----------
    los : sequence of (3,) arrays or an (n, 3) array
        Unit vectors from receiver toward each satellite.

    Returns
    -------
    DopSet
        With ``hdop = sqrt(Q11+Q22)``, ``vdop = sqrt(Q33)``,
        ``tdop = sqrt(Q44)``, ``pdop`` and ``gdop`` the corresponding
        partial traces of ``Q = (G^T G)^-1``.

    Raises
    ------
    DegenerateGeometryError
        If ``G^T G`` is singular or its condition number exceeds 1e12.
    """
    vecs = np.atleast_2d(np.asarray(los, dtype=np.float64))
    if vecs.ndim != 2 or vecs.shape[1] != 3 or vecs.shape[0] < 4:
        raise ValidationError(f"need an (n>=4, 3) array of LOS vectors, got {vecs.shape}")
    norms = np.linalg.norm(vecs, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValidationError("LOS vectors must be unit-norm")

    g = np.hstack([-vecs, np.ones((vecs.shape[0], 1))])
    gtg = g.T @ g
    if np.linalg.cond(gtg) > SINGULARITY_COND:
        raise DegenerateGeometryError(
            f"geometry matrix condition number exceeds {SINGULARITY_COND:g}"
        )
    q = np.linalg.inv(gtg)
    d = np.diag(q)
    return DopSet(
        gdop=float(np.sqrt(d.sum())),
        pdop=float(np.sqrt(d[0] + d[1] + d[2])),
        hdop=float(np.sqrt(d[0] + d[1])),
        vdop=float(np.sqrt(d[2])),
        tdop=float(np.sqrt(d[3])),
    )


def _visible_order(elev: np.ndarray, mask_rad: float, max_sats: int | None) -> np.ndarray:
    """Indices of kept satellites, highest elevation first, ties by array order.

    Requires the corresponding PRNs to be in ascending array order so that the
    stable sort breaks elevation ties toward the lower PRN.
    """
    order = np.argsort(-elev, kind="stable")
    above = order[elev[order] >= mask_rad]
    if max_sats is not None and above.size > max_sats:
        above = above[:max_sats]
    return above


def sky_state(
    cst: Constellation,
    rx: ReceiverPos,
    t: float,
    mask_rad: float = DEFAULT_MASK_RAD,
    max_sats: int | None = None,
) -> SkyState:
    """Visibility and DOP at one epoch.

    Keeps satellites with elevation >= ``mask_rad``; when more than
    ``max_sats`` qualify, the highest-elevation ones are kept (ties broken
    toward the lower PRN). DOPs are filled only when at least four satellites
    remain and their geometry is non-singular.
    """
    if not 0.0 <= mask_rad < math.pi / 2:
        raise ValidationError(f"mask_rad must lie in [0, pi/2), got {mask_rad}")
    elems = sorted(cst.elements, key=lambda e: e.prn)
    rx_ecef = geodetic_to_ecef(rx)
    enu = enu_rotation(rx)
    los = np.empty((len(elems), 3))
    for k, elem in enumerate(elems):
        delta = satellite_ecef(elem, t, cst) - rx_ecef
        los[k] = enu @ (delta / np.linalg.norm(delta))
    elev = np.arcsin(np.clip(los[:, 2], -1.0, 1.0))
    keep = _visible_order(elev, mask_rad, max_sats)

    pairs = tuple((elems[int(k)].prn, los[int(k)].copy()) for k in keep)
    dops = None
    if keep.size >= 4:
        try:
            dops = dop_from_los(los[keep])
        except DegenerateGeometryError:
            dops = None
    return SkyState(epoch=Epoch(t_rel=max(t, 0.0)), los=pairs, dops=dops)


@dataclass(frozen=True)
class DopTimeline:
    """Vectorized visibility/DOP history over a regular epoch grid.

    DOP arrays hold NaN at epochs with fewer than four visible satellites or
    singular geometry; ``n_vis`` is always filled.
    """

    t: np.ndarray
    n_vis: np.ndarray
    gdop: np.ndarray
    pdop: np.ndarray
    hdop: np.ndarray
    vdop: np.ndarray
    tdop: np.ndarray

    def __len__(self) -> int:
        return int(self.t.size)


def dop_timeline(
    cst: Constellation,
    rx: ReceiverPos,
    times: np.ndarray,
    mask_rad: float = DEFAULT_MASK_RAD,
    max_sats: int | None = None,
) -> DopTimeline:
    """Compute :func:`sky_state` visibility and DOPs over many epochs at once.

    Semantically identical to calling :func:`sky_state` per epoch, but batched:
    satellite positions are propagated array-wise and the per-epoch normal
    matrices are inverted in one stacked operation.
    """
    if not 0.0 <= mask_rad < math.pi / 2:
        raise ValidationError(f"mask_rad must lie in [0, pi/2), got {mask_rad}")
    times = np.ascontiguousarray(times, dtype=np.float64)
    elems = sorted(cst.elements, key=lambda e: e.prn)
    n_t, n_s = times.size, len(elems)

    rx_ecef = geodetic_to_ecef(rx)
    enu = enu_rotation(rx)
    los = np.empty((n_t, n_s, 3))
    for k, elem in enumerate(elems):
        delta = _ecef_many(elem, times, cst) - rx_ecef
        los[:, k, :] = delta / np.linalg.norm(delta, axis=1, keepdims=True)
    los = los @ enu.T
    elev = np.arcsin(np.clip(los[:, :, 2], -1.0, 1.0))

    # Stable argsort on -elevation; ascending-PRN column order breaks ties.
    order = np.argsort(-elev, axis=1, kind="stable")
    elev_sorted = np.take_along_axis(elev, order, axis=1)
    above = elev_sorted >= mask_rad
    n_above = above.sum(axis=1)
    n_vis = n_above if max_sats is None else np.minimum(n_above, max_sats)

    # Visible = first n_vis entries of the elevation-sorted order.
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.broadcast_to(np.arange(n_s), (n_t, n_s)), axis=1)
    visible = (rank < n_vis[:, None]) & (elev >= mask_rad)

    rows = np.concatenate([-los, np.ones((n_t, n_s, 1))], axis=2)
    rows = np.where(visible[:, :, None], rows, 0.0)
    gtg = np.einsum("tsi,tsj->tij", rows, rows)

    solvable = n_vis >= 4
    if np.any(solvable):
        with np.errstate(all="ignore"):
            cond = np.linalg.cond(gtg[solvable])
        ok = np.isfinite(cond) & (cond <= SINGULARITY_COND)
        idx = np.flatnonzero(solvable)[ok]
    else:
        idx = np.empty(0, dtype=np.intp)

    dop = {k: np.full(n_t, np.nan) for k in ("gdop", "pdop", "hdop", "vdop", "tdop")}
    if idx.size:
        q = np.linalg.inv(gtg[idx])
        diag = q[:, (0, 1, 2, 3), (0, 1, 2, 3)]
        dop["hdop"][idx] = np.sqrt(diag[:, 0] + diag[:, 1])
        dop["vdop"][idx] = np.sqrt(diag[:, 2])
        dop["pdop"][idx] = np.sqrt(diag[:, 0] + diag[:, 1] + diag[:, 2])
        dop["tdop"][idx] = np.sqrt(diag[:, 3])
        dop["gdop"][idx] = np.sqrt(diag.sum(axis=1))
    return DopTimeline(t=times, n_vis=n_vis.astype(np.int64), **dop)
