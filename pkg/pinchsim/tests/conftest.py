from typing import Callable

import numpy as np
import pytest

from pinchsim.models import PhysicalParams
from pinchsim.services.geometry import (
    DerivedConstants,
    Waveguide,
    derive_constants,
    waveguide_for_region,
    watts_to_dbm,
)


@pytest.fixture()
def params() -> PhysicalParams:
    return PhysicalParams()


@pytest.fixture()
def constants(params: PhysicalParams) -> DerivedConstants:
    return derive_constants(params)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture()
def waveguide(params: PhysicalParams) -> Waveguide:
    return waveguide_for_region((-5.0, 5.0), 0.0, params)


@pytest.fixture()
def unit_gain_power(constants: DerivedConstants) -> Callable[[float], float]:
    """Transmit power in dBm at which eta * P / sigma^2 equals the requested gain."""

    def _power(gain: float) -> float:
        return watts_to_dbm(gain * constants.noise_power_w / constants.eta)

    return _power


@pytest.fixture()
def rho_30dbm(constants: DerivedConstants) -> float:
    return 1.0 / constants.noise_power_w


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch: pytest.MonkeyPatch) -> None:
    for name in ("PINCHSIM_WORKERS", "PINCHSIM_BLOCK_SIZE", "PINCHSIM_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
