import math

import pytest

from pinchsim.services.quadrature import adaptive_simpson


def test_integrates_smooth_functions() -> None:
    value, error = adaptive_simpson(math.sin, 0.0, math.pi)

    assert value == pytest.approx(2.0, abs=1e-9)
    assert error < 1e-8


def test_cubic_is_exact() -> None:
    value, _ = adaptive_simpson(lambda x: x**3, 0.0, 2.0)

    assert value == pytest.approx(4.0, abs=1e-12)


def test_reversed_and_empty_intervals() -> None:
    assert adaptive_simpson(math.sin, math.pi, 0.0)[0] == pytest.approx(-2.0, abs=1e-9)
    assert adaptive_simpson(math.sin, 1.0, 1.0) == (0.0, 0.0)


def test_tolerance_must_be_positive() -> None:
    with pytest.raises(ValueError):
        adaptive_simpson(math.sin, 0.0, 1.0, tol=0.0)
