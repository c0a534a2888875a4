"""Rates for one conventional antenna versus one pinching antenna on one waveguide."""
from __future__ import annotations

import math
from typing import Tuple

import numpy as np

from pinchsim.errors import GeometryError, ParameterDomainError
from pinchsim.models import PhysicalParams, Point3, SnrOperatingPoint
from pinchsim.services.geometry import dbm_to_watts, derive_constants, distance

LOG2E = math.log2(math.e)
LN2 = math.log(2.0)

# below this argument the g3/g4/g5 closed forms lose digits to cancellation
SERIES_THRESHOLD = 1e-4


def snr_gain(op_point: SnrOperatingPoint) -> float:
    """gamma = eta * P_m / sigma^2 for an operating point."""

    consts = derive_constants(op_point.params)
    return consts.eta * dbm_to_watts(op_point.transmit_power_dbm) / consts.noise_power_w


def _log2_1p(x: float) -> float:
    return math.log1p(x) / LN2


def rate_conventional_instant(
    user: Point3,
    antenna: Point3,
    power_w: float,
    params: PhysicalParams,
    num_users: int = 1,
) -> float:
    """TDMA rate of a user served by a fixed antenna."""

    if antenna.z <= 0:
        raise ParameterDomainError("conventional antenna height must be positive")
    if num_users < 1:
        raise ParameterDomainError("num_users must be at least 1")
    consts = derive_constants(params)
    dist_sq = distance(user, antenna) ** 2
    if dist_sq == 0.0:
        raise GeometryError("user coincides with the antenna")
    return _log2_1p(consts.eta * power_w / (dist_sq * consts.noise_power_w)) / num_users


def rate_pinching_instant(
    user: Point3,
    params: PhysicalParams,
    power_w: float,
    num_users: int = 1,
    waveguide_y: float = 0.0,
) -> float:
    """TDMA rate with the pinching antenna moved to the user's closest waveguide point."""

    if num_users < 1:
        raise ParameterDomainError("num_users must be at least 1")
    consts = derive_constants(params)
    d = params.waveguide_height_m
    dist_sq = (user.y - waveguide_y) ** 2 + (user.z - d) ** 2
    return _log2_1p(consts.eta * power_w / (dist_sq * consts.noise_power_w)) / num_users


def conventional_rates(
    users: np.ndarray, antenna: np.ndarray, gamma: np.ndarray, num_users: int = 1
) -> np.ndarray:
    """Vectorised fixed-antenna rates; returns shape (len(users), len(gamma))."""

    dist_sq = np.sum((users - antenna[None, :]) ** 2, axis=1)
    return np.log1p(gamma[None, :] / dist_sq[:, None]) / LN2 / num_users


def pinching_rates(
    users: np.ndarray,
    waveguide_y: float,
    height: float,
    gamma: np.ndarray,
    num_users: int = 1,
) -> np.ndarray:
    """Vectorised single-pinching-antenna rates; users are (n, 3) with z = 0."""

    dist_sq = height**2 + (users[:, 1] - waveguide_y) ** 2
    return np.log1p(gamma[None, :] / dist_sq[:, None]) / LN2 / num_users


def g_closed(a: float, D: float) -> float:
    """Closed form of the integral of log2(y^2 + a) for y in [0, D/2]."""

    if a <= 0:
        raise ParameterDomainError(f"g requires a > 0, got {a!r}")
    if D < 0:
        raise ParameterDomainError(f"region side must be non-negative, got {D!r}")
    half = D / 2.0
    root = math.sqrt(a)
    return (
        half * math.log2(half * half + a)
        - D * LOG2E
        + 2.0 * LOG2E * root * math.atan(half / root)
    )


def g2_closed(a: float, D: float) -> float:
    """Closed form of the integral of ln(z + a) for z in [0, D^2/4]."""

    if a <= 0:
        raise ParameterDomainError(f"g2 requires a > 0, got {a!r}")
    quarter = D * D / 4.0
    return quarter * math.log(quarter + a) - quarter + a * math.log1p(quarter / a)


def _check_side(D: float, d: float) -> None:
    if D <= 0 or d <= 0:
        raise ParameterDomainError(f"region side and height must be positive, got D={D}, d={d}")


def ergodic_sum_rate_pinching(op_point: SnrOperatingPoint) -> float:
    """Exact ergodic sum rate with one pinching antenna."""

    D = op_point.region_side_m
    d = op_point.params.waveguide_height_m
    _check_side(D, d)
    gamma = snr_gain(op_point)
    base = D * D / 4.0 + d * d
    root_hi = math.sqrt(d * d + gamma)
    return _log2_1p(gamma / base) + (4.0 / D) * LOG2E * (
        root_hi * math.atan(D / (2.0 * root_hi)) - d * math.atan(D / (2.0 * d))
    )


def ergodic_sum_rate_pinching_integral(op_point: SnrOperatingPoint) -> float:
    """The same quantity written through g: (2/D)(g(d^2 + gamma) - g(d^2))."""

    D = op_point.region_side_m
    d = op_point.params.waveguide_height_m
    _check_side(D, d)
    gamma = snr_gain(op_point)
    return (2.0 / D) * (g_closed(d * d + gamma, D) - g_closed(d * d, D))


def ergodic_sum_rate_pinching_highsnr(op_point: SnrOperatingPoint) -> float:
    D = op_point.region_side_m
    d = op_point.params.waveguide_height_m
    _check_side(D, d)
    gamma = snr_gain(op_point)
    base = D * D / 4.0 + d * d
    return (
        math.log2(base + gamma)
        + 2.0 * LOG2E
        - math.log2(base)
        - (4.0 / D) * LOG2E * d * math.atan(D / (2.0 * d))
    )


def ergodic_sum_rate_conventional_bound(op_point: SnrOperatingPoint) -> float:
    """Disc-relaxation upper bound on the centre-antenna ergodic sum rate."""

    D = op_point.region_side_m
    d = op_point.params.waveguide_height_m
    _check_side(D, d)
    gamma = snr_gain(op_point)
    return (4.0 / (D * D)) * LOG2E * (g2_closed(d * d + gamma, D) - g2_closed(d * d, D))


def ergodic_sum_rate_conventional_bound_highsnr(op_point: SnrOperatingPoint) -> float:
    D = op_point.region_side_m
    d = op_point.params.waveguide_height_m
    _check_side(D, d)
    gamma = snr_gain(op_point)
    base = D * D / 4.0 + d * d
    return (
        math.log2(base + gamma)
        + LOG2E
        - math.log2(base)
        - (4.0 / (D * D)) * d * d * math.log2(base / (d * d))
    )


def g3(x: float) -> float:
    if x < 0:
        raise ParameterDomainError("g3 is defined for x >= 0")
    if x < SERIES_THRESHOLD:
        x2 = x * x
        return LOG2E * (x2 / 6.0 - x2 * x2 / 15.0)
    return LOG2E - (2.0 / x) * LOG2E * math.atan(x) + _log2_1p(x * x) / (x * x)


def g4(x: float) -> float:
    if x < 0:
        raise ParameterDomainError("g4 is defined for x >= 0")
    if x < SERIES_THRESHOLD:
        return LOG2E * x**3 / 6.0
    return LOG2E * math.atan(x) - _log2_1p(x * x) / x


def g5(x: float) -> float:
    if x < 0:
        raise ParameterDomainError("g5 is defined for x >= 0")
    if x < SERIES_THRESHOLD:
        return LOG2E * x**4 / 2.0
    x2 = x * x
    return _log2_1p(x2) - LOG2E * x2 / (1.0 + x2)


def rate_gap_highsnr(D: float, d: float) -> float:
    """High-SNR ergodic gain of the pinching antenna over the conventional bound."""

    _check_side(D, d)
    return g3(D / (2.0 * d))


def monte_carlo_pinching(
    op_point: SnrOperatingPoint, num_samples: int, rng: np.random.Generator
) -> Tuple[float, float]:
    """Sample mean and standard error of the pinching sum rate over a uniform y."""

    D = op_point.region_side_m
    d = op_point.params.waveguide_height_m
    gamma = snr_gain(op_point)
    y = rng.uniform(-D / 2.0, D / 2.0, size=num_samples)
    rates = np.log1p(gamma / (d * d + y * y)) / LN2
    return float(rates.mean()), float(rates.std(ddof=1) / math.sqrt(num_samples))


def monte_carlo_conventional(
    op_point: SnrOperatingPoint, num_samples: int, rng: np.random.Generator
) -> Tuple[float, float]:
    """Sample mean and standard error of the centre-antenna sum rate over the square."""

    D = op_point.region_side_m
    d = op_point.params.waveguide_height_m
    gamma = snr_gain(op_point)
    xy = rng.uniform(-D / 2.0, D / 2.0, size=(num_samples, 2))
    rates = np.log1p(gamma / (d * d + np.sum(xy * xy, axis=1))) / LN2
    return float(rates.mean()), float(rates.std(ddof=1) / math.sqrt(num_samples))


__all__ = [
    "LOG2E",
    "conventional_rates",
    "ergodic_sum_rate_conventional_bound",
    "ergodic_sum_rate_conventional_bound_highsnr",
    "ergodic_sum_rate_pinching",
    "ergodic_sum_rate_pinching_highsnr",
    "ergodic_sum_rate_pinching_integral",
    "g2_closed",
    "g3",
    "g4",
    "g5",
    "g_closed",
    "monte_carlo_conventional",
    "monte_carlo_pinching",
    "pinching_rates",
    "rate_conventional_instant",
    "rate_gap_highsnr",
    "rate_pinching_instant",
    "snr_gain",
]
