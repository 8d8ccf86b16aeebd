"""Shared numerical primitives: adaptive Simpson quadrature and bisection inverses.

All root finding here is done by bisection on monotone functions.  The
functions being inverted (H', L, psi0, ...) are guaranteed monotone but not
uniformly smooth near zero, so derivative-based iterations are avoided.
"""

from __future__ import annotations

import math
from collections.abc import Callable

MAX_SUBDIVISIONS = 10**6


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    rtol: float = 1e-10,
    max_depth: int = 60,
) -> float:
    """Integrate f on [a, b] by adaptive Simpson with interval bisection.

    The tolerance is relative to the magnitude of the running whole-interval
    estimate.  Subdivision is capped at MAX_SUBDIVISIONS intervals and
    max_depth levels; exceeding either raises QuadratureError.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, rtol=rtol, max_depth=max_depth)

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, b - a)
    # Absolute budget derived once from the first estimate; a floor keeps
    # near-zero integrals from demanding impossible precision.
    atol = rtol * max(abs(whole), 1e-300)

    count = [0]

    def recurse(a, fa, m, fm, b, fb, whole, tol, depth):
        count[0] += 2
        if count[0] > MAX_SUBDIVISIONS:
            raise QuadratureError("subdivision cap exceeded")
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = _simpson(fa, flm, fm, m - a)
        right = _simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if depth >= max_depth:
            raise QuadratureError(f"max depth {max_depth} reached at [{a}, {b}]")
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return recurse(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1) + recurse(
            m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1
        )

    return recurse(a, fa, m, fm, b, fb, whole, atol, 0)


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Root of f on [lo, hi] by plain bisection; f(lo) and f(hi) must not share sign."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError(f"root not bracketed on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (fhi > 0.0):
            hi = mid
        else:
            lo = mid
        if hi - lo <= xtol:
            break
    return 0.5 * (lo + hi)


def invert_increasing(
    f: Callable[[float], float],
    y: float,
    lo: float,
    hi: float | None = None,
    xtol: float = 1e-12,
) -> float:
    """Solve f(x) = y for increasing f, expanding the upper bracket if needed.

    With hi=None the bracket grows geometrically from lo until f exceeds y,
    which handles inverses whose domain is a half line.
    """
    if hi is None:
        hi = lo + 1.0 if lo <= 0.0 else 2.0 * lo
        for _ in range(200):
            if f(hi) >= y:
                break
            hi = 2.0 * hi if hi > 0.0 else hi + 1.0
        else:
            raise ValueError("failed to bracket inverse: target may be out of range")
    return bisect_root(lambda x: f(x) - y, lo, hi, xtol=xtol)


def trapezoid_nonuniform(t, f):
    """Cumulative-free trapezoid of samples f over abscissae t."""
    total = 0.0
    for i in range(len(t) - 1):
        total += 0.5 * (f[i] + f[i + 1]) * (t[i + 1] - t[i])
    return total


def log_midpoints(lo: float, hi: float, n: int) -> list[float]:
    """n points geometrically spaced on [lo, hi], lo > 0."""
    if n == 1:
        return [lo]
    ratio = (hi / lo) ** (1.0 / (n - 1))
    return [lo * ratio**k for k in range(n)]


def isclose_rel(a: float, b: float, rtol: float) -> bool:
    return math.isclose(a, b, rel_tol=rtol, abs_tol=0.0)
