"""Physical constants, unit conversions and waveguide geometry."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from pinchsim.errors import GeometryError, ParameterDomainError
from pinchsim.models import PhysicalParams, Point3

ON_WAVEGUIDE_TOLERANCE_M = 1e-9


@dataclass(frozen=True)
class DerivedConstants:
    wavelength_m: float
    guided_wavelength_m: float
    eta: float
    noise_power_w: float
    guard_distance_m: float


def dbm_to_watts(power_dbm: float | np.ndarray) -> float | np.ndarray:
    return 10.0 ** ((power_dbm - 30.0) / 10.0)


def watts_to_dbm(power_w: float) -> float:
    if power_w <= 0:
        raise ParameterDomainError("power in watts must be positive to express in dBm")
    return 10.0 * math.log10(power_w) + 30.0


def derive_constants(params: PhysicalParams) -> DerivedConstants:
    """Wavelengths, path-loss constant and noise power for a parameter set."""

    f_c = params.carrier_frequency_hz
    if not math.isfinite(f_c) or f_c <= 0:
        raise ParameterDomainError(f"carrier frequency must be positive, got {f_c!r}")
    n_eff = params.refractive_index
    if not math.isfinite(n_eff) or n_eff <= 0:
        raise ParameterDomainError(f"refractive index must be positive, got {n_eff!r}")
    if not math.isfinite(params.waveguide_height_m) or params.waveguide_height_m <= 0:
        raise ParameterDomainError(
            f"waveguide height must be positive, got {params.waveguide_height_m!r}"
        )
    if not math.isfinite(params.noise_power_dbm):
        raise ParameterDomainError("noise power must be finite")

    wavelength = SPEED_OF_LIGHT / f_c
    guard = params.guard_distance_m
    if guard is None:
        guard = wavelength / 2.0
    elif not math.isfinite(guard) or guard <= 0:
        raise ParameterDomainError(f"guard distance must be positive, got {guard!r}")

    return DerivedConstants(
        wavelength_m=wavelength,
        guided_wavelength_m=wavelength / n_eff,
        eta=SPEED_OF_LIGHT**2 / (16.0 * math.pi**2 * f_c**2),
        noise_power_w=dbm_to_watts(params.noise_power_dbm),
        guard_distance_m=guard,
    )


def distance(a: Point3, b: Point3) -> float:
    return math.hypot(a.x - b.x, a.y - b.y, a.z - b.z)


@dataclass(frozen=True)
class Waveguide:
    """Dielectric waveguide parallel to the x axis."""

    y_offset_m: float
    height_m: float
    x_min_m: float
    x_max_m: float
    feed_x_m: Optional[float] = None

    def __post_init__(self) -> None:
        if self.height_m <= 0:
            raise GeometryError("waveguide height must be positive")
        if not self.x_min_m < self.x_max_m:
            raise GeometryError(
                f"waveguide span is empty: x_min={self.x_min_m} >= x_max={self.x_max_m}"
            )
        if self.feed_x_m is None:
            object.__setattr__(self, "feed_x_m", self.x_min_m)
        if not self.x_min_m <= self.feed_x_m <= self.x_max_m:
            raise GeometryError(
                f"feed point x={self.feed_x_m} lies outside the span "
                f"[{self.x_min_m}, {self.x_max_m}]"
            )

    @property
    def feed_point(self) -> Point3:
        return Point3.of(self.feed_x_m, self.y_offset_m, self.height_m)

    def point_at(self, x: float) -> Point3:
        return Point3.of(x, self.y_offset_m, self.height_m)

    def contains(self, point: Point3, tol: float = ON_WAVEGUIDE_TOLERANCE_M) -> bool:
        return (
            abs(point.y - self.y_offset_m) <= tol
            and abs(point.z - self.height_m) <= tol
            and self.x_min_m - tol <= point.x <= self.x_max_m + tol
        )

    def closest_point(self, user: Point3) -> Point3:
        """The point on the waveguide nearest to a user (psi^Pin)."""

        x = min(max(user.x, self.x_min_m), self.x_max_m)
        return self.point_at(x)

    def with_feed(self, feed_x_m: float) -> "Waveguide":
        return Waveguide(
            y_offset_m=self.y_offset_m,
            height_m=self.height_m,
            x_min_m=self.x_min_m,
            x_max_m=self.x_max_m,
            feed_x_m=feed_x_m,
        )


def waveguide_phase(feed: Point3, antenna: Point3, guided_wavelength_m: float) -> float:
    """In-waveguide phase shift from the feed to an antenna, in radians."""

    if guided_wavelength_m <= 0:
        raise ParameterDomainError("guided wavelength must be positive")
    if (
        abs(feed.y - antenna.y) > ON_WAVEGUIDE_TOLERANCE_M
        or abs(feed.z - antenna.z) > ON_WAVEGUIDE_TOLERANCE_M
    ):
        raise GeometryError(
            f"antenna ({antenna.x}, {antenna.y}, {antenna.z}) is not on the waveguide "
            f"through the feed at y={feed.y}, z={feed.z}"
        )
    return 2.0 * math.pi * distance(feed, antenna) / guided_wavelength_m


def waveguide_for_region(
    x_extent: tuple[float, float],
    y_offset_m: float,
    params: PhysicalParams,
    *,
    feed_x_m: Optional[float] = None,
) -> Waveguide:
    """Waveguide spanning a deployment's x extent, fed from its left end by default."""

    x_min, x_max = x_extent
    return Waveguide(
        y_offset_m=y_offset_m,
        height_m=params.waveguide_height_m,
        x_min_m=x_min,
        x_max_m=x_max,
        feed_x_m=feed_x_m,
    )


__all__ = [
    "SPEED_OF_LIGHT",
    "DerivedConstants",
    "Waveguide",
    "dbm_to_watts",
    "derive_constants",
    "distance",
    "waveguide_for_region",
    "waveguide_phase",
    "watts_to_dbm",
]
