"""Pydantic schemas for physical parameters, deployments and scenario configs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Annotated, Any, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

DEFAULT_SWEEP_DBM: Tuple[float, ...] = tuple(float(p) for p in range(0, 55, 5))

SchemeTag = Literal[
    "conventional",
    "pinching-1",
    "pinching-N-oma",
    "noma",
    "miso-mrc",
    "miso-zf",
    "miso-bound",
    "miso-search",
]


class _Schema(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Point3(_Schema):
    """Cartesian point in meters."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @model_validator(mode="before")
    @classmethod
    def _accept_sequences(cls, data: Any) -> Any:
        if isinstance(data, np.ndarray):
            data = data.tolist()
        if isinstance(data, (list, tuple)):
            if len(data) != 3:
                raise ValueError("a point needs exactly three coordinates")
            return {"x": data[0], "y": data[1], "z": data[2]}
        return data

    @model_validator(mode="after")
    def _finite(self) -> "Point3":
        if not all(math.isfinite(value) for value in (self.x, self.y, self.z)):
            raise ValueError("point coordinates must be finite")
        return self

    @classmethod
    def of(cls, x: float, y: float, z: float) -> "Point3":
        return cls(x=float(x), y=float(y), z=float(z))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


class PhysicalParams(_Schema):
    """Radio and waveguide constants; domain checks happen in derive_constants."""

    carrier_frequency_hz: float = Field(28e9, description="Carrier frequency f_c in Hz.")
    noise_power_dbm: float = Field(-90.0, description="Receiver noise power in dBm.")
    waveguide_height_m: float = Field(3.0, description="Waveguide and antenna height d.")
    refractive_index: float = Field(1.4, description="Effective refractive index n_eff.")
    guard_distance_m: Optional[float] = Field(
        None,
        description="Minimum spacing between antennas on one waveguide; half a wavelength when unset.",
    )


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle in the user plane."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @classmethod
    def around(cls, center: Point3, side_x: float, side_y: float) -> "Region":
        return cls(
            x_min=center.x - side_x / 2.0,
            x_max=center.x + side_x / 2.0,
            y_min=center.y - side_y / 2.0,
            y_max=center.y + side_y / 2.0,
        )

    @property
    def center(self) -> Point3:
        return Point3.of((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0, 0.0)

    @property
    def side_x(self) -> float:
        return self.x_max - self.x_min

    @property
    def side_y(self) -> float:
        return self.y_max - self.y_min


def _require_planar(*points: Point3) -> None:
    for point in points:
        if point.z != 0.0:
            raise ValueError("user regions lie in the x-y plane; center z must be 0")


class _DeploymentBase(_Schema):
    def regions(self) -> List[Region]:  # pragma: no cover - overridden
        raise NotImplementedError

    def x_extent(self) -> Tuple[float, float]:
        regions = self.regions()
        return min(r.x_min for r in regions), max(r.x_max for r in regions)


class SquareDeployment(_DeploymentBase):
    kind: Literal["square"] = "square"
    center: Point3 = Field(default_factory=Point3)
    side_m: float = Field(10.0, gt=0)

    @model_validator(mode="after")
    def _planar(self) -> "SquareDeployment":
        _require_planar(self.center)
        return self

    def regions(self) -> List[Region]:
        return [Region.around(self.center, self.side_m, self.side_m)]


class RectangleDeployment(_DeploymentBase):
    """Users in a rectangle whose x side runs along the waveguide."""

    kind: Literal["rectangle"] = "rectangle"
    center: Point3 = Field(default_factory=Point3)
    side_x_m: float = Field(20.0, gt=0)
    side_y_m: float = Field(10.0, gt=0)

    @model_validator(mode="after")
    def _planar(self) -> "RectangleDeployment":
        _require_planar(self.center)
        return self

    def regions(self) -> List[Region]:
        return [Region.around(self.center, self.side_x_m, self.side_y_m)]


class NomaPairDeployment(_DeploymentBase):
    """Weak user in area 1, strong user in area 2."""

    kind: Literal["noma_pair"] = "noma_pair"
    area1_center: Point3 = Field(default_factory=lambda: Point3.of(20.0, 20.0, 0.0))
    area2_center: Point3 = Field(default_factory=lambda: Point3.of(-10.0, 0.0, 0.0))
    side_m: float = Field(2.0, gt=0)

    @model_validator(mode="after")
    def _planar(self) -> "NomaPairDeployment":
        _require_planar(self.area1_center, self.area2_center)
        return self

    @classmethod
    def from_offsets(cls, d1: float, d2: float, side_m: float = 2.0) -> "NomaPairDeployment":
        return cls(
            area1_center=Point3.of(d1, d1, 0.0),
            area2_center=Point3.of(-d2, 0.0, 0.0),
            side_m=side_m,
        )

    def regions(self) -> List[Region]:
        return [
            Region.around(self.area1_center, self.side_m, self.side_m),
            Region.around(self.area2_center, self.side_m, self.side_m),
        ]


class NomaAreasDeployment(_DeploymentBase):
    """M user areas ordered from weakest (index 0) to strongest."""

    kind: Literal["noma_areas"] = "noma_areas"
    centers: Tuple[Point3, ...] = Field(..., min_length=1)
    side_m: float = Field(2.0, gt=0)

    @model_validator(mode="after")
    def _planar(self) -> "NomaAreasDeployment":
        _require_planar(*self.centers)
        return self

    @classmethod
    def staircase(
        cls,
        num_users: int,
        *,
        spacing_m: float = 20.0,
        strong_center: Tuple[float, float] = (-10.0, 0.0),
        side_m: float = 2.0,
    ) -> "NomaAreasDeployment":
        centers = [
            Point3.of((num_users - m) * spacing_m, (num_users - m) * spacing_m, 0.0)
            for m in range(1, num_users)
        ]
        centers.append(Point3.of(strong_center[0], strong_center[1], 0.0))
        return cls(centers=tuple(centers), side_m=side_m)

    def regions(self) -> List[Region]:
        return [Region.around(center, self.side_m, self.side_m) for center in self.centers]


class SplitSquareDeployment(_DeploymentBase):
    """Square cut by waveguides at y = ±D/3; users in the upper and lower strips."""

    kind: Literal["split_square"] = "split_square"
    center: Point3 = Field(default_factory=Point3)
    side_m: float = Field(20.0, gt=0)

    @model_validator(mode="after")
    def _planar(self) -> "SplitSquareDeployment":
        _require_planar(self.center)
        return self

    def regions(self) -> List[Region]:
        half = self.side_m / 2.0
        third = self.side_m / 3.0
        cx, cy = self.center.x, self.center.y
        return [
            Region(x_min=cx - half, x_max=cx + half, y_min=cy + third, y_max=cy + half),
            Region(x_min=cx - half, x_max=cx + half, y_min=cy - half, y_max=cy - third),
        ]


Deployment = Annotated[
    Union[
        SquareDeployment,
        RectangleDeployment,
        NomaPairDeployment,
        NomaAreasDeployment,
        SplitSquareDeployment,
    ],
    Field(discriminator="kind"),
]


class SnrOperatingPoint(_Schema):
    """Transmit power, user count and region size for the ergodic-rate forms."""

    transmit_power_dbm: float
    params: PhysicalParams = Field(default_factory=PhysicalParams)
    num_users: int = Field(1, ge=1)
    region_side_m: float = Field(10.0, gt=0)


class TrialPlan(_Schema):
    seed: int = Field(0, ge=0, le=2**64 - 1)
    num_trials: int = Field(1000, ge=1)
    deployment: Deployment = Field(default_factory=SquareDeployment)
    scheme: SchemeTag = "pinching-1"
    sweep_dbm: Tuple[float, ...] = Field(default=DEFAULT_SWEEP_DBM)
    num_users: int = Field(1, ge=1, description="Users sharing the channel (M).")
    num_antennas: int = Field(1, ge=1, description="Antennas per waveguide (N).")
    prng: Literal["pcg64", "philox"] = "pcg64"
    miso_antennas: Literal["pinching", "conventional"] = "pinching"
    search_domain: Literal["D1", "D2"] = "D2"
    search_window_wavelengths: float = Field(10.0, gt=0)
    search_step_wavelengths: float = Field(0.1, gt=0)

    @field_validator("sweep_dbm")
    @classmethod
    def _strictly_increasing(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value:
            raise ValueError("sweep must contain at least one power point")
        if not all(math.isfinite(p) for p in value):
            raise ValueError("sweep powers must be finite")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("sweep powers must be strictly increasing")
        return value


class ScenarioConfig(_Schema):
    """JSON scenario document consumed by the CLI."""

    schema_version: Literal[1] = 1
    params: PhysicalParams = Field(default_factory=PhysicalParams)
    plan: TrialPlan = Field(default_factory=TrialPlan)
    analytical: bool = Field(True, description="Emit closed-form curves next to Monte Carlo.")
    curve_family: Tuple[float, ...] = Field(
        default=(),
        description="Values of the figure's curve-family parameter (D, D_L, N, M or D_1).",
    )
    realizations: int = Field(2, ge=1, description="Seeded user drops for fig10/table1.")
    operating_power_dbm: float = Field(30.0, description="Transmit power for fig10/table1.")
    output: Optional[str] = None


__all__ = [
    "DEFAULT_SWEEP_DBM",
    "Deployment",
    "NomaAreasDeployment",
    "NomaPairDeployment",
    "PhysicalParams",
    "Point3",
    "RectangleDeployment",
    "Region",
    "ScenarioConfig",
    "SchemeTag",
    "SnrOperatingPoint",
    "SplitSquareDeployment",
    "SquareDeployment",
    "TrialPlan",
]
