"""Two-user, two-waveguide MISO interference channel with pinching antennas."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from pinchsim.errors import (
    DegenerateInputError,
    GeometryError,
    InfeasiblePlacementError,
    ParameterDomainError,
    SearchFailureError,
    ShapeError,
    SingularityError,
)
from pinchsim.logging_utils import get_logger
from pinchsim.models import PhysicalParams, Point3
from pinchsim.services.geometry import DerivedConstants, Waveguide, derive_constants

LOGGER = get_logger(__name__)

TWO_PI = 2.0 * math.pi
UNIT_NORM_TOLERANCE = 1e-12
SINGULARITY_TOLERANCE = 1e-12
# squared-residual form used by the grid search carries O(eps) rounding
SEARCH_COLLINEAR_RTOL = 1e-12
SYMMETRIC_XTOL_M = 1e-15
SYMMETRIC_RTOL = 4.0 * np.finfo(float).eps
FEED_INVARIANCE_RTOL = 1e-12
FEED_PHASE_ULPS = 64.0


@dataclass(frozen=True)
class MisoScenario:
    """Two users, two antennas (one per waveguide) and the transmit SNR rho = P / sigma^2.

    A waveguide entry of None marks a conventional antenna without an
    in-waveguide phase term.
    """

    users: Tuple[Point3, Point3]
    antennas: Tuple[Point3, Point3]
    waveguides: Tuple[Optional[Waveguide], Optional[Waveguide]]
    rho: float

    def __post_init__(self) -> None:
        if len(self.users) != 2 or len(self.antennas) != 2 or len(self.waveguides) != 2:
            raise ShapeError("a MISO scenario has exactly two users, antennas and waveguides")
        if not self.rho > 0:
            raise ParameterDomainError(f"rho must be positive, got {self.rho!r}")
        for k, (antenna, waveguide) in enumerate(zip(self.antennas, self.waveguides), start=1):
            if waveguide is not None and not waveguide.contains(antenna):
                raise GeometryError(f"antenna {k} is not on waveguide {k}")

    def with_antenna_x(self, x1: float, x2: float) -> "MisoScenario":
        moved = tuple(
            Point3.of(x, antenna.y, antenna.z) for x, antenna in zip((x1, x2), self.antennas)
        )
        return replace(self, antennas=moved)

    def with_feeds(self, feed1_x: float, feed2_x: float) -> "MisoScenario":
        waveguides = tuple(
            None if waveguide is None else waveguide.with_feed(feed)
            for waveguide, feed in zip(self.waveguides, (feed1_x, feed2_x))
        )
        return replace(self, waveguides=waveguides)

    def with_rho(self, rho: float) -> "MisoScenario":
        return replace(self, rho=rho)

    def user_array(self) -> np.ndarray:
        return np.array([user.as_array() for user in self.users])

    def waveguide_lengths(self) -> np.ndarray:
        """In-waveguide path from each feed to its antenna (0 for conventional antennas)."""

        return np.array(
            [
                0.0 if waveguide is None else abs(antenna.x - waveguide.feed_x_m)
                for antenna, waveguide in zip(self.antennas, self.waveguides)
            ]
        )


@dataclass(frozen=True)
class ChannelMatrix:
    """h[m, k]: channel from antenna k to user m."""

    h: np.ndarray

    def row(self, m: int) -> np.ndarray:
        return self.h[m]

    @property
    def norms_sq(self) -> np.ndarray:
        return np.sum(np.abs(self.h) ** 2, axis=1)


@dataclass(frozen=True)
class BeamformingMatrix:
    """Column m is the beamformer p_m; the gain seen by user i is h_i^H p_m."""

    p: np.ndarray

    def __post_init__(self) -> None:
        norms = np.linalg.norm(self.p, axis=0)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOLERANCE):
            raise ParameterDomainError(f"beamformer columns must have unit norm, got {norms}")


@dataclass(frozen=True)
class OrthogonalityReport:
    cross_term: float
    cross_term_reverse: float
    constraint1_residual_m: float
    constraint2_residual: float
    nearest_odd_k: int


@dataclass(frozen=True)
class SymmetricPlacement:
    delta_m: float
    users: Tuple[Point3, Point3]
    antennas: Tuple[Point3, Point3]
    k: int
    f_value_m: float


@dataclass(frozen=True)
class SearchResult:
    indices: Tuple[int, int]
    antenna_x: Tuple[float, float]
    scenario: MisoScenario
    beamformer: BeamformingMatrix
    sinrs: np.ndarray
    min_sinr: float
    bound_indices: Tuple[int, int]
    bound_sinrs: np.ndarray
    min_sinr_grid: Optional[np.ndarray] = None
    grids: Optional[Tuple[np.ndarray, np.ndarray]] = None


def _channels(
    users: np.ndarray,
    antennas: np.ndarray,
    waveguide_lengths: np.ndarray,
    consts: DerivedConstants,
) -> np.ndarray:
    """users (2, 3); antennas (..., 2, 3); waveguide_lengths (..., 2) -> (..., 2, 2)."""

    diff = users[:, None, :] - antennas[..., None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    phase = TWO_PI * (
        r / consts.wavelength_m + waveguide_lengths[..., None, :] / consts.guided_wavelength_m
    )
    return math.sqrt(consts.eta) * np.exp(-1j * phase) / r


def channel_matrix(scenario: MisoScenario, params: PhysicalParams) -> ChannelMatrix:
    consts = derive_constants(params)
    antennas = np.array([antenna.as_array() for antenna in scenario.antennas])
    return ChannelMatrix(
        h=_channels(scenario.user_array(), antennas, scenario.waveguide_lengths(), consts)
    )


def _as_arrays(H: ChannelMatrix | np.ndarray, P: BeamformingMatrix | np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    h = H.h if isinstance(H, ChannelMatrix) else np.asarray(H, dtype=complex)
    p = P.p if isinstance(P, BeamformingMatrix) else np.asarray(P, dtype=complex)
    return h, p


def gain_matrix(H: ChannelMatrix | np.ndarray, P: BeamformingMatrix | np.ndarray) -> np.ndarray:
    """|h_m^H p_i|^2 for every user m and beam i."""

    h, p = _as_arrays(H, P)
    return np.abs(h.conj() @ p) ** 2


def sinr_curves(
    H: ChannelMatrix | np.ndarray, P: BeamformingMatrix | np.ndarray, rhos: np.ndarray
) -> np.ndarray:
    """SINRs for each rho; returns shape (len(rhos), M)."""

    gains = gain_matrix(H, P)
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))[:, None]
    return rhos * signal[None, :] / (rhos * interference[None, :] + 1.0)


def sinr(
    H: ChannelMatrix | np.ndarray, P: BeamformingMatrix | np.ndarray, rho: float
) -> np.ndarray:
    return sinr_curves(H, P, np.array([rho]))[0]


def sinr_upper_bound(H: ChannelMatrix | np.ndarray, rho: float) -> np.ndarray:
    """Interference-free single-user SINRs rho * ||h_m||^2."""

    h = H.h if isinstance(H, ChannelMatrix) else np.asarray(H, dtype=complex)
    return rho * np.sum(np.abs(h) ** 2, axis=1)


def mrc_beamformer(H: ChannelMatrix | np.ndarray) -> BeamformingMatrix:
    h = H.h if isinstance(H, ChannelMatrix) else np.asarray(H, dtype=complex)
    norms = np.linalg.norm(h, axis=1)
    if np.any(norms == 0.0):
        raise DegenerateInputError("MRC needs non-zero user channels")
    return BeamformingMatrix(p=(h / norms[:, None]).T)


def zf_beamformer(H: ChannelMatrix | np.ndarray) -> BeamformingMatrix:
    """Project each user's channel off the other user's channel."""

    h = H.h if isinstance(H, ChannelMatrix) else np.asarray(H, dtype=complex)
    if h.shape != (2, 2):
        raise ShapeError(f"zero forcing expects a 2x2 channel matrix, got {h.shape}")
    columns = []
    for m in range(2):
        own, other = h[m], h[1 - m]
        other_sq = float(np.vdot(other, other).real)
        own_norm = float(np.linalg.norm(own))
        if other_sq == 0.0 or own_norm == 0.0:
            raise DegenerateInputError("zero forcing needs non-zero user channels")
        projected = own - (np.vdot(other, own) / other_sq) * other
        residual = float(np.linalg.norm(projected))
        if residual <= SINGULARITY_TOLERANCE * own_norm:
            raise SingularityError("user channels are collinear; zero forcing is undefined")
        columns.append(projected / residual)
    return BeamformingMatrix(p=np.column_stack(columns))


def _distances(scenario: MisoScenario) -> np.ndarray:
    return np.array(
        [
            [
                math.hypot(u.x - a.x, u.y - a.y, u.z - a.z)
                for a in scenario.antennas
            ]
            for u in scenario.users
        ]
    )


def phase_matched_beamformer(scenario: MisoScenario, params: PhysicalParams) -> BeamformingMatrix:
    """Beamformer built directly from geometry so user m receives its antennas in phase."""

    consts = derive_constants(params)
    r = _distances(scenario)
    lengths = scenario.waveguide_lengths()
    p = np.empty((2, 2), dtype=complex)
    for m in range(2):
        normaliser = 1.0 / math.sqrt(float(np.sum(r[m] ** -2)))
        for k in range(2):
            phase = TWO_PI * (r[m, k] / consts.wavelength_m + lengths[k] / consts.guided_wavelength_m)
            # h[m, k] carries exp(-j phase), so h_m^H p_m sums real positive terms
            p[k, m] = normaliser / r[m, k] * np.exp(-1j * phase)
    return BeamformingMatrix(p=p)


def orthogonality_residual(scenario: MisoScenario, params: PhysicalParams) -> OrthogonalityReport:
    consts = derive_constants(params)
    H = channel_matrix(scenario, params)
    P = phase_matched_beamformer(scenario, params)
    products = H.h.conj() @ P.p
    r = _distances(scenario)
    combination = r[0, 0] - r[1, 0] - r[0, 1] + r[1, 1]
    half_wave = consts.wavelength_m / 2.0
    k = 2 * round((combination / half_wave - 1.0) / 2.0) + 1
    ratio = (r[0, 0] * r[1, 0]) / (r[0, 1] * r[1, 1])
    return OrthogonalityReport(
        cross_term=float(abs(products[0, 1])),
        cross_term_reverse=float(abs(products[1, 0])),
        constraint1_residual_m=float(abs(combination - k * half_wave)),
        constraint2_residual=float(abs(ratio - 1.0)),
        nearest_odd_k=int(k),
    )


def phase_resolution(scenario: MisoScenario, params: PhysicalParams) -> float:
    """Float64 spacing, in radians, of the largest channel phase of the scenario."""

    consts = derive_constants(params)
    phase = TWO_PI * (
        _distances(scenario) / consts.wavelength_m
        + scenario.waveguide_lengths()[None, :] / consts.guided_wavelength_m
    )
    return float(np.spacing(np.max(phase)))


def feed_invariance_rtol(scenario: MisoScenario, moved: MisoScenario, params: PhysicalParams) -> float:
    """Relative SINR tolerance between a scenario and the same scenario with moved feeds.

    A feed shift rotates each column of H by one common phase, which no SINR
    sees. In float64 that phase is known to its spacing only; the error is
    scaled by cond(H)^2 for zero forcing and by sqrt(max SNR) for the
    interference term of the phase-matched beams.
    """

    H = channel_matrix(scenario, params)
    resolution = max(phase_resolution(scenario, params), phase_resolution(moved, params))
    amplification = float(np.linalg.cond(H.h) ** 2) + math.sqrt(
        float(np.max(sinr_upper_bound(H, scenario.rho)))
    )
    return max(FEED_INVARIANCE_RTOL, FEED_PHASE_ULPS * resolution * amplification)


def symmetric_f(x: float, x1: float, x2: float, D: float, d: float) -> float:
    """Distance difference seen from antenna 1 at x for users on the x axis."""

    q = D * D / 9.0 + d * d
    return math.sqrt((x - x1) ** 2 + q) - math.sqrt((x - x2) ** 2 + q)


def _nearest_odd(value: float) -> Tuple[int, int]:
    below = 2 * math.floor((value - 1.0) / 2.0) + 1
    above = 2 * math.ceil((value - 1.0) / 2.0) + 1
    return below, above


def symmetric_feasible_placement(
    x1: float,
    x2: float,
    D: float,
    d: float,
    params: PhysicalParams,
    *,
    delta_hint: float = 0.0,
) -> SymmetricPlacement:
    """Mirror-image antenna pair meeting both orthogonality constraints.

    Users sit at (x1, 0, 0) and (x2, 0, 0); antennas at (x1 + delta, D/3, d)
    and (x2 - delta, -D/3, d). The distance-product constraint holds by
    symmetry, and delta is solved so the path-length combination is an odd
    multiple of half a wavelength.
    """

    if not x1 < x2:
        raise ParameterDomainError(f"expected x1 < x2, got x1={x1}, x2={x2}")
    if D <= 0 or d <= 0:
        raise ParameterDomainError("D and d must be positive")
    consts = derive_constants(params)
    span = x2 - x1
    low = symmetric_f(x1, x1, x2, D, d)
    if abs(low) < consts.wavelength_m / 2.0:
        raise InfeasiblePlacementError(
            f"achievable range [{low:.6g}, 0] m is narrower than half a wavelength",
            achievable_range=(low, 0.0),
        )
    hint = min(max(delta_hint, 0.0), span)
    quarter = consts.wavelength_m / 4.0
    high = symmetric_f(x2, x1, x2, D, d)

    def residual(delta: float, target: float) -> float:
        return symmetric_f(x1 + delta, x1, x2, D, d) - target

    best: Optional[Tuple[float, float, int]] = None
    for k in sorted(set(_nearest_odd(symmetric_f(x1 + hint, x1, x2, D, d) / quarter))):
        target = k * quarter
        if not low <= target <= high:
            continue
        delta = float(
            brentq(residual, 0.0, span, args=(target,), xtol=SYMMETRIC_XTOL_M, rtol=SYMMETRIC_RTOL)
        )
        candidate = (abs(delta - hint), delta, k)
        if best is None or candidate < best:
            best = candidate
    if best is None:
        raise InfeasiblePlacementError(
            "no odd multiple of a quarter wavelength is reachable from the hint",
            achievable_range=(low, high),
        )
    _, delta, k = best
    users = (Point3.of(x1, 0.0, 0.0), Point3.of(x2, 0.0, 0.0))
    antennas = (Point3.of(x1 + delta, D / 3.0, d), Point3.of(x2 - delta, -D / 3.0, d))
    LOGGER.debug(
        "Symmetric placement solved with k=%s",
        k,
        extra={"event": "miso.symmetric.solved", "payload": {"delta_m": delta, "k": k}},
    )
    return SymmetricPlacement(
        delta_m=delta,
        users=users,
        antennas=antennas,
        k=int(k),
        f_value_m=symmetric_f(x1 + delta, x1, x2, D, d),
    )


def paired_waveguides(
    D: float,
    params: PhysicalParams,
    *,
    center: Optional[Point3] = None,
    x_extent: Optional[Tuple[float, float]] = None,
) -> Tuple[Waveguide, Waveguide]:
    """Waveguides at y = +D/3 (serving user 1) and y = -D/3 (serving user 2)."""

    cx, cy = (center.x, center.y) if center is not None else (0.0, 0.0)
    x_min, x_max = x_extent if x_extent is not None else (cx - D / 2.0, cx + D / 2.0)
    return tuple(  # type: ignore[return-value]
        Waveguide(
            y_offset_m=cy + sign * D / 3.0,
            height_m=params.waveguide_height_m,
            x_min_m=x_min,
            x_max_m=x_max,
        )
        for sign in (1.0, -1.0)
    )


def pinching_scenario(
    users: Tuple[Point3, Point3],
    waveguides: Tuple[Waveguide, Waveguide],
    rho: float,
) -> MisoScenario:
    """Each antenna at its user's closest point on the serving waveguide."""

    antennas = tuple(
        waveguide.closest_point(user) for user, waveguide in zip(users, waveguides)
    )
    return MisoScenario(users=tuple(users), antennas=antennas, waveguides=tuple(waveguides), rho=rho)


def conventional_scenario(
    users: Tuple[Point3, Point3],
    params: PhysicalParams,
    rho: float,
    *,
    center: Optional[Point3] = None,
) -> MisoScenario:
    """Two fixed antennas a quarter wavelength either side of the centre."""

    consts = derive_constants(params)
    cx, cy = (center.x, center.y) if center is not None else (0.0, 0.0)
    offset = consts.wavelength_m / 4.0
    antennas = (
        Point3.of(cx + offset, cy, params.waveguide_height_m),
        Point3.of(cx - offset, cy, params.waveguide_height_m),
    )
    return MisoScenario(users=tuple(users), antennas=antennas, waveguides=(None, None), rho=rho)


def symmetric_scenario(
    placement: SymmetricPlacement, D: float, params: PhysicalParams, rho: float
) -> MisoScenario:
    x_lo = min(placement.users[0].x, -D / 2.0)
    x_hi = max(placement.users[1].x, D / 2.0)
    waveguides = paired_waveguides(D, params, x_extent=(x_lo, x_hi))
    return MisoScenario(
        users=placement.users, antennas=placement.antennas, waveguides=waveguides, rho=rho
    )


def window_grid(center: float, half_width: float, step: float, waveguide: Waveguide) -> np.ndarray:
    """Candidate x positions center + k*step within the window and the waveguide span."""

    if step <= 0 or half_width < 0:
        raise ParameterDomainError("grid step must be positive and window non-negative")
    count = int(round(half_width / step))
    grid = center + step * np.arange(-count, count + 1, dtype=float)
    return grid[(grid >= waveguide.x_min_m) & (grid <= waveguide.x_max_m)]


def span_grid(waveguide: Waveguide, step: float) -> np.ndarray:
    if step <= 0:
        raise ParameterDomainError("grid step must be positive")
    count = int(math.floor((waveguide.x_max_m - waveguide.x_min_m) / step))
    return waveguide.x_min_m + step * np.arange(count + 1, dtype=float)


def algorithm1_search(
    template: MisoScenario,
    grid1: np.ndarray,
    grid2: np.ndarray,
    params: PhysicalParams,
    *,
    keep_grid: bool = False,
) -> SearchResult:
    """Exhaustive max-min ZF SINR search over antenna positions on both waveguides.

    Cells with collinear channels are skipped. Ties resolve to the lowest
    (n1, n2) in row-major order.
    """

    grid1 = np.asarray(grid1, dtype=float)
    grid2 = np.asarray(grid2, dtype=float)
    if grid1.size == 0 or grid2.size == 0:
        raise ParameterDomainError("both candidate grids must be non-empty")
    if any(waveguide is None for waveguide in template.waveguides):
        raise ParameterDomainError("the placement search needs pinching antennas on waveguides")
    consts = derive_constants(params)
    wg1, wg2 = template.waveguides
    users = template.user_array()
    rho = template.rho
    y = (template.antennas[0].y, template.antennas[1].y)
    z = (template.antennas[0].z, template.antennas[1].z)

    n2 = grid2.size
    antennas = np.empty((n2, 2, 3))
    antennas[:, 1, 0] = grid2
    antennas[:, 1, 1] = y[1]
    antennas[:, 1, 2] = z[1]
    antennas[:, 0, 1] = y[0]
    antennas[:, 0, 2] = z[0]
    lengths = np.empty((n2, 2))
    lengths[:, 1] = np.abs(grid2 - wg2.feed_x_m)

    min_sinr = np.empty((grid1.size, n2))
    min_bound = np.empty((grid1.size, n2))
    for i, x1 in enumerate(grid1):
        antennas[:, 0, 0] = x1
        lengths[:, 0] = abs(x1 - wg1.feed_x_m)
        h = _channels(users, antennas, lengths, consts)
        norms_sq = np.sum(np.abs(h) ** 2, axis=-1)
        cross_sq = np.abs(np.sum(h[:, 0, :].conj() * h[:, 1, :], axis=-1)) ** 2
        residual1 = norms_sq[:, 0] - cross_sq / norms_sq[:, 1]
        residual2 = norms_sq[:, 1] - cross_sq / norms_sq[:, 0]
        singular = (residual1 <= SEARCH_COLLINEAR_RTOL * norms_sq[:, 0]) | (
            residual2 <= SEARCH_COLLINEAR_RTOL * norms_sq[:, 1]
        )
        row = rho * np.minimum(residual1, residual2)
        row[singular] = -np.inf
        min_sinr[i] = row
        min_bound[i] = rho * np.min(norms_sq, axis=-1)

    flat = int(np.argmax(min_sinr))
    if not np.isfinite(min_sinr.flat[flat]):
        raise SearchFailureError("zero forcing is singular in every candidate cell")
    n1_best, n2_best = np.unravel_index(flat, min_sinr.shape)
    b1, b2 = np.unravel_index(int(np.argmax(min_bound)), min_bound.shape)

    winner = template.with_antenna_x(float(grid1[n1_best]), float(grid2[n2_best]))
    H = channel_matrix(winner, params)
    P = zf_beamformer(H)
    sinrs = sinr(H, P, rho)
    bound_scenario = template.with_antenna_x(float(grid1[b1]), float(grid2[b2]))
    bound_sinrs = sinr_upper_bound(channel_matrix(bound_scenario, params), rho)
    LOGGER.debug(
        "Placement search finished over %sx%s cells",
        grid1.size,
        n2,
        extra={
            "event": "miso.search.complete",
            "payload": {"indices": [int(n1_best), int(n2_best)], "min_sinr": float(sinrs.min())},
        },
    )
    return SearchResult(
        indices=(int(n1_best), int(n2_best)),
        antenna_x=(float(grid1[n1_best]), float(grid2[n2_best])),
        scenario=winner,
        beamformer=P,
        sinrs=sinrs,
        min_sinr=float(sinrs.min()),
        bound_indices=(int(b1), int(b2)),
        bound_sinrs=bound_sinrs,
        min_sinr_grid=min_sinr if keep_grid else None,
        grids=(grid1, grid2) if keep_grid else None,
    )


def local_search(
    template: MisoScenario,
    params: PhysicalParams,
    *,
    window_wavelengths: float = 10.0,
    step_wavelengths: float = 0.1,
    keep_grid: bool = False,
) -> SearchResult:
    """Search windows of +/- window_wavelengths around the closest waveguide points."""

    consts = derive_constants(params)
    wl = consts.wavelength_m
    grids = []
    for user, waveguide in zip(template.users, template.waveguides):
        if waveguide is None:
            raise ParameterDomainError("the placement search needs pinching antennas on waveguides")
        grids.append(
            window_grid(
                waveguide.closest_point(user).x,
                window_wavelengths * wl,
                step_wavelengths * wl,
                waveguide,
            )
        )
    return algorithm1_search(template, grids[0], grids[1], params, keep_grid=keep_grid)


def refine_search(
    template: MisoScenario,
    params: PhysicalParams,
    *,
    coarse_step_wavelengths: float = 1.0,
    fine_step_wavelengths: float = 0.05,
    fine_window_wavelengths: float = 1.0,
) -> SearchResult:
    """Whole-waveguide search: a coarse scan followed by a fine scan around the winner."""

    consts = derive_constants(params)
    wl = consts.wavelength_m
    wg1, wg2 = template.waveguides
    if wg1 is None or wg2 is None:
        raise ParameterDomainError("the placement search needs pinching antennas on waveguides")
    coarse = algorithm1_search(
        template,
        span_grid(wg1, coarse_step_wavelengths * wl),
        span_grid(wg2, coarse_step_wavelengths * wl),
        params,
    )
    fine1 = window_grid(coarse.antenna_x[0], fine_window_wavelengths * wl, fine_step_wavelengths * wl, wg1)
    fine2 = window_grid(coarse.antenna_x[1], fine_window_wavelengths * wl, fine_step_wavelengths * wl, wg2)
    return algorithm1_search(template, fine1, fine2, params)


__all__ = [
    "BeamformingMatrix",
    "ChannelMatrix",
    "MisoScenario",
    "OrthogonalityReport",
    "SearchResult",
    "SymmetricPlacement",
    "algorithm1_search",
    "channel_matrix",
    "conventional_scenario",
    "feed_invariance_rtol",
    "gain_matrix",
    "local_search",
    "mrc_beamformer",
    "orthogonality_residual",
    "paired_waveguides",
    "phase_matched_beamformer",
    "phase_resolution",
    "pinching_scenario",
    "refine_search",
    "sinr",
    "sinr_curves",
    "sinr_upper_bound",
    "span_grid",
    "symmetric_f",
    "symmetric_feasible_placement",
    "symmetric_scenario",
    "window_grid",
    "zf_beamformer",
]
