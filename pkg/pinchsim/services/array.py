"""Multiple pinching antennas on one waveguide: channels, OMA placement and NOMA."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from pinchsim.errors import CapacityError, GeometryError, ParameterDomainError, ShapeError
from pinchsim.logging_utils import get_logger
from pinchsim.models import PhysicalParams, Point3, SnrOperatingPoint
from pinchsim.services.geometry import DerivedConstants, Waveguide, derive_constants
from pinchsim.services.single_antenna import LN2, ergodic_sum_rate_pinching_highsnr

LOGGER = get_logger(__name__)

TWO_PI = 2.0 * math.pi
PLACEMENT_XTOL_M = 1e-12
ALLOCATION_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class AntennaArray:
    """Ordered antenna positions on a single waveguide."""

    positions: Tuple[Point3, ...]
    waveguide: Waveguide
    min_spacing_m: Optional[float] = None

    def __post_init__(self) -> None:
        for point in self.positions:
            if not self.waveguide.contains(point):
                raise GeometryError(
                    f"antenna at ({point.x}, {point.y}, {point.z}) is not on the waveguide"
                )
        if self.min_spacing_m is not None and len(self.positions) > 1:
            xs = sorted(point.x for point in self.positions)
            gaps = np.diff(xs)
            if np.any(gaps < self.min_spacing_m - PLACEMENT_XTOL_M):
                raise GeometryError(
                    f"antenna spacing {float(gaps.min())} m is below the guard distance "
                    f"{self.min_spacing_m} m"
                )

    @classmethod
    def from_x(
        cls,
        xs: Sequence[float],
        waveguide: Waveguide,
        *,
        min_spacing_m: Optional[float] = None,
    ) -> "AntennaArray":
        return cls(
            positions=tuple(waveguide.point_at(float(x)) for x in xs),
            waveguide=waveguide,
            min_spacing_m=min_spacing_m,
        )

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def x(self) -> np.ndarray:
        return np.array([point.x for point in self.positions], dtype=float)


@dataclass(frozen=True)
class OmaBound:
    exact: float
    clustered: float


@dataclass(frozen=True)
class NomaAllocation:
    alphas: Tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.alphas:
            raise ParameterDomainError("a NOMA allocation needs at least one coefficient")
        if any(alpha < 0 for alpha in self.alphas):
            raise ParameterDomainError("NOMA power coefficients must be non-negative")
        if abs(math.fsum(self.alphas) - 1.0) > ALLOCATION_SUM_TOLERANCE:
            raise ParameterDomainError(
                f"NOMA power coefficients must sum to 1, got {math.fsum(self.alphas)!r}"
            )

    def __len__(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True)
class NomaRates:
    rates: Tuple[float, ...]
    decoding_order: Tuple[int, ...]
    channel_gains: Tuple[float, ...]
    decode_table: np.ndarray
    per_antenna_power_w: float

    @property
    def sum_rate(self) -> float:
        return math.fsum(self.rates)


def effective_channels(
    users: np.ndarray,
    antenna_x: np.ndarray,
    waveguide: Waveguide,
    consts: DerivedConstants,
) -> np.ndarray:
    """Superposed spherical-wave channels.

    users has shape (n, 3); antenna_x has shape (N,) for a shared array or
    (n, N) for per-user arrays. Returns n complex coefficients.
    """

    users = np.atleast_2d(users)
    antenna_x = np.asarray(antenna_x, dtype=float)
    if antenna_x.ndim == 1:
        antenna_x = np.broadcast_to(antenna_x, (users.shape[0], antenna_x.shape[0]))
    dx = users[:, 0:1] - antenna_x
    dy = users[:, 1:2] - waveguide.y_offset_m
    dz = users[:, 2:3] - waveguide.height_m
    r = np.sqrt(dx * dx + dy * dy + dz * dz)
    if np.any(r == 0.0):
        raise GeometryError("a user coincides with an antenna")
    theta = TWO_PI * np.abs(antenna_x - waveguide.feed_x_m) / consts.guided_wavelength_m
    phase = TWO_PI * r / consts.wavelength_m + theta
    return np.sum(math.sqrt(consts.eta) * np.exp(-1j * phase) / r, axis=1)


def effective_channel(user: Point3, array: AntennaArray, params: PhysicalParams) -> complex:
    if len(array) == 0:
        raise ParameterDomainError("antenna array is empty")
    consts = derive_constants(params)
    return complex(effective_channels(user.as_array()[None, :], array.x, array.waveguide, consts)[0])


def rate_oma_array(
    user: Point3,
    array: AntennaArray,
    power_w: float,
    num_users: int,
    params: PhysicalParams,
) -> float:
    """TDMA rate when the whole array serves one user with P_m split over N antennas."""

    consts = derive_constants(params)
    h = effective_channel(user, array, params)
    snr = abs(h) ** 2 * power_w / (len(array) * consts.noise_power_w)
    return math.log1p(snr) / LN2 / num_users


def rate_oma_bound(
    user: Point3,
    array: AntennaArray,
    power_w: float,
    num_users: int,
    params: PhysicalParams,
) -> OmaBound:
    """Phase-aligned upper bound and its clustered-antenna simplification."""

    if len(array) == 0:
        raise ParameterDomainError("antenna array is empty")
    consts = derive_constants(params)
    n = len(array)
    users = user.as_array()[None, :]
    r = np.linalg.norm(
        np.array([p.as_array() for p in array.positions]) - users, axis=1
    )
    coherent = float(np.sum(math.sqrt(consts.eta) / r))
    exact = math.log1p(power_w * coherent**2 / (n * consts.noise_power_w)) / LN2 / num_users
    closest = array.waveguide.closest_point(user)
    dist_sq = float(np.sum((closest.as_array() - users[0]) ** 2))
    clustered = (
        math.log1p(n * power_w * consts.eta / (consts.noise_power_w * dist_sq)) / LN2 / num_users
    )
    return OmaBound(exact=exact, clustered=clustered)


def _total_phase(x: float, user: Point3, waveguide: Waveguide, consts: DerivedConstants) -> float:
    r = math.hypot(user.x - x, user.y - waveguide.y_offset_m, user.z - waveguide.height_m)
    return TWO_PI * (r / consts.wavelength_m + abs(x - waveguide.feed_x_m) / consts.guided_wavelength_m)


def _first_phase_solution(
    user: Point3,
    waveguide: Waveguide,
    consts: DerivedConstants,
    x_from: float,
    direction: int,
) -> Optional[float]:
    """First x along `direction` from x_from with total phase at a multiple of 2*pi."""

    end = waveguide.x_max_m if direction > 0 else waveguide.x_min_m
    if (end - x_from) * direction < 0:
        return None
    # the phase is monotone on either side of the feed point
    stops = [x_from]
    feed = waveguide.feed_x_m
    if (feed - x_from) * direction > 0 and (end - feed) * direction > 0:
        stops.append(feed)
    stops.append(end)

    def shifted(x: float, target: float) -> float:
        return _total_phase(x, user, waveguide, consts) - target

    for a, b in zip(stops, stops[1:]):
        phi_a = _total_phase(a, user, waveguide, consts)
        phi_b = _total_phase(b, user, waveguide, consts)
        if phi_b >= phi_a:
            target = TWO_PI * math.ceil(phi_a / TWO_PI)
            if target > phi_b:
                continue
        else:
            target = TWO_PI * math.floor(phi_a / TWO_PI)
            if target < phi_b:
                continue
        if shifted(a, target) == 0.0:
            return a
        lo, hi = (a, b) if a < b else (b, a)
        return float(brentq(shifted, lo, hi, args=(target,), xtol=PLACEMENT_XTOL_M))
    return None


def place_antennas_oma(
    user: Point3,
    num_antennas: int,
    waveguide: Waveguide,
    params: PhysicalParams,
    *,
    direction: int = 1,
) -> AntennaArray:
    """Place N antennas so every phasor arrives at the user in phase.

    Starting from the user's closest waveguide point, each antenna is the
    first phase-aligned location at least one guard distance beyond the
    previous one, scanning toward x_max (direction=+1) or x_min (-1).
    """

    if num_antennas < 1:
        raise ParameterDomainError("at least one antenna is required")
    if direction not in (1, -1):
        raise ParameterDomainError("direction must be +1 or -1")
    consts = derive_constants(params)
    x_from = waveguide.closest_point(user).x
    placed: List[float] = []
    for _ in range(num_antennas):
        x = _first_phase_solution(user, waveguide, consts, x_from, direction)
        if x is None:
            LOGGER.info(
                "Waveguide span exhausted after %s antenna(s)",
                len(placed),
                extra={
                    "event": "array.placement.capacity",
                    "payload": {"requested": num_antennas, "placed": len(placed)},
                },
            )
            raise CapacityError(
                f"waveguide span hosts only {len(placed)} of {num_antennas} phase-aligned "
                f"antennas beyond x={waveguide.closest_point(user).x:.6f} m",
                max_feasible=len(placed),
            )
        placed.append(x)
        x_from = x + direction * consts.guard_distance_m
    LOGGER.debug(
        "Placed %s antenna(s)",
        len(placed),
        extra={
            "event": "array.placement.complete",
            "payload": {"x": placed, "direction": direction},
        },
    )
    return AntennaArray.from_x(placed, waveguide, min_spacing_m=consts.guard_distance_m)


def place_antennas_with_fallback(
    user: Point3,
    num_antennas: int,
    waveguide: Waveguide,
    params: PhysicalParams,
) -> AntennaArray:
    """Place toward x_max, or toward x_min when the span beyond the user is too short."""

    try:
        return place_antennas_oma(user, num_antennas, waveguide, params)
    except CapacityError:
        LOGGER.debug(
            "Retrying placement toward x_min",
            extra={
                "event": "array.placement.reversed",
                "payload": {"user": [user.x, user.y], "num_antennas": num_antennas},
            },
        )
        return place_antennas_oma(user, num_antennas, waveguide, params, direction=-1)


def alignment_residual_rad(user: Point3, array: AntennaArray, params: PhysicalParams) -> float:
    """Largest distance of any antenna's total phase from a multiple of 2*pi."""

    consts = derive_constants(params)
    worst = 0.0
    for point in array.positions:
        phi = _total_phase(point.x, user, array.waveguide, consts)
        worst = max(worst, abs(phi - TWO_PI * round(phi / TWO_PI)))
    return worst


def build_noma_coefficients(num_users: int) -> NomaAllocation:
    """Odd-weight power split: b_m = 2(M - m) + 1, alpha_m = b_m / M^2."""

    if num_users < 1:
        raise ParameterDomainError("NOMA needs at least one user")
    total = num_users * num_users
    return NomaAllocation(
        alphas=tuple((2 * (num_users - m) + 1) / total for m in range(1, num_users + 1))
    )


def noma_weak_user_ceiling(alloc: NomaAllocation) -> float:
    """High-SNR limit of the weakest user's rate under SIC."""

    if len(alloc) < 2:
        raise ParameterDomainError("the weak-user ceiling needs at least two users")
    rest = math.fsum(alloc.alphas[1:])
    return math.log1p(alloc.alphas[0] / rest) / LN2


def sic_decode_table(
    sorted_gains: np.ndarray, alphas: Sequence[float], snr_per_antenna: np.ndarray
) -> np.ndarray:
    """Rates R_{i,m} for decoder i decoding user m under SIC.

    sorted_gains has shape (n, M) ascending along axis 1 and is already
    divided by the noise power; snr_per_antenna has shape (P,) and holds
    P/N. Returns (n, P, M, M) with NaN where i < m.
    """

    alphas = np.asarray(alphas, dtype=float)
    n, m_users = sorted_gains.shape
    tail = np.concatenate([np.cumsum(alphas[::-1])[::-1][1:], [0.0]])
    table = np.full((n, snr_per_antenna.shape[0], m_users, m_users), np.nan)
    scaled = sorted_gains[:, None, :] * snr_per_antenna[None, :, None]
    for i in range(m_users):
        g = scaled[:, :, i]
        for m in range(i + 1):
            table[:, :, i, m] = np.log1p(g * alphas[m] / (g * tail[m] + 1.0)) / LN2
    return table


def sic_rates(table: np.ndarray) -> np.ndarray:
    """Per-rank achievable rates: the minimum over every decoder of that signal."""

    return np.nanmin(table, axis=2)


def noma_rates(
    users: Sequence[Point3],
    alloc: NomaAllocation,
    power_w: float,
    params: PhysicalParams,
    waveguide: Waveguide,
) -> NomaRates:
    """SIC rates with one antenna at each user's closest waveguide point.

    Users are relabelled by ascending |h|^2 before decoding; the returned
    rates follow the caller's order.
    """

    if len(users) != len(alloc):
        raise ShapeError(
            f"allocation has {len(alloc)} coefficients for {len(users)} users"
        )
    consts = derive_constants(params)
    m_users = len(users)
    coords = np.array([user.as_array() for user in users])
    antenna_x = np.array([waveguide.closest_point(user).x for user in users])
    gains = np.abs(effective_channels(coords, antenna_x, waveguide, consts)) ** 2
    order = np.argsort(gains, kind="stable")
    per_antenna_power = power_w / m_users
    full_table = sic_decode_table(
        gains[order][None, :] / consts.noise_power_w,
        alloc.alphas,
        np.array([per_antenna_power]),
    )
    table = full_table[0, 0]
    ranked = sic_rates(full_table)[0, 0]
    rates = np.empty(m_users)
    rates[order] = ranked
    return NomaRates(
        rates=tuple(float(rate) for rate in rates),
        decoding_order=tuple(int(index) for index in order),
        channel_gains=tuple(float(g) for g in gains),
        decode_table=table,
        per_antenna_power_w=per_antenna_power,
    )


def noma_ergodic_sum_highsnr(
    D: float,
    d: float,
    transmit_power_dbm: float,
    num_antennas: int,
    alpha2: float,
    params: PhysicalParams,
) -> float:
    """High-SNR two-user NOMA ergodic sum rate with far-apart user areas."""

    if not 0.0 < alpha2 < 1.0:
        raise ParameterDomainError(f"alpha2 must lie in (0, 1), got {alpha2!r}")
    if num_antennas < 1:
        raise ParameterDomainError("at least one antenna is required")
    strong = SnrOperatingPoint(
        transmit_power_dbm=transmit_power_dbm + 10.0 * math.log10(alpha2 / num_antennas),
        params=params.model_copy(update={"waveguide_height_m": d}),
        num_users=1,
        region_side_m=D,
    )
    return -math.log2(alpha2) + ergodic_sum_rate_pinching_highsnr(strong)


def noma_oma_gap_highsnr(dist1: float, dist2: float) -> float:
    """Two-user NOMA-over-OMA gain at high SNR when OMA uses P_m = M P."""

    if dist1 <= 0 or dist2 <= 0:
        raise ParameterDomainError("user-to-waveguide distances must be positive")
    return math.log2(dist1 / dist2) - 3.0


__all__ = [
    "AntennaArray",
    "NomaAllocation",
    "NomaRates",
    "OmaBound",
    "alignment_residual_rad",
    "build_noma_coefficients",
    "effective_channel",
    "effective_channels",
    "noma_ergodic_sum_highsnr",
    "noma_oma_gap_highsnr",
    "noma_rates",
    "noma_weak_user_ceiling",
    "place_antennas_oma",
    "place_antennas_with_fallback",
    "rate_oma_array",
    "rate_oma_bound",
    "sic_decode_table",
    "sic_rates",
]
