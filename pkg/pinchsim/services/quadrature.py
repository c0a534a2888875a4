"""Adaptive Simpson quadrature used as an independent oracle for closed forms."""
from __future__ import annotations

from typing import Callable, Tuple

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_DEPTH = 40


def _simpson(fa: float, fm: float, fb: float, width: float) -> float:
    return width / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOLERANCE,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> Tuple[float, float]:
    """Integrate f over [a, b] to an absolute tolerance.

    Returns (value, error_estimate). The tolerance is split evenly between
    halves at each subdivision and the accepted panels carry a Richardson
    correction.
    """

    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, error = adaptive_simpson(f, b, a, tol, max_depth)
        return -value, error

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, b - a)

    total = 0.0
    error = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, f_lo, f_mid, f_hi, estimate, local_tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left_mid = 0.5 * (lo + mid)
        right_mid = 0.5 * (mid + hi)
        f_left = f(left_mid)
        f_right = f(right_mid)
        left = _simpson(f_lo, f_left, f_mid, mid - lo)
        right = _simpson(f_mid, f_right, f_hi, hi - mid)
        delta = left + right - estimate
        if depth >= max_depth or abs(delta) <= 15.0 * local_tol:
            total += left + right + delta / 15.0
            error += abs(delta) / 15.0
            continue
        stack.append((mid, hi, f_mid, f_right, f_hi, right, local_tol / 2.0, depth + 1))
        stack.append((lo, mid, f_lo, f_left, f_mid, left, local_tol / 2.0, depth + 1))
    return total, error


__all__ = ["DEFAULT_MAX_DEPTH", "DEFAULT_TOLERANCE", "adaptive_simpson"]
