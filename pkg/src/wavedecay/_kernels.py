"""Time-stepping kernels for the coupled wave system.

Two interchangeable implementations of the same update:

  * a numba @njit kernel (default when numba imports cleanly), and
  * a vectorized pure-numpy fallback.

Selection: set WAVEDECAY_BACKEND=numpy to force the fallback, or
WAVEDECAY_BACKEND=numba to insist on the jit path (import error otherwise).
Both paths implement identical arithmetic so results agree to rounding.

The update is a leapfrog step in which the velocity coupling and the
damping act on the midpoint velocity (u_next - u_prev) / (2 dt).  That
choice makes the discrete energy identity exact: the coupling cancels in
the energy balance and the only energy change per step is
-dt * sum(dx * rho(u'_mid) * u'_mid).  Eliminating v_next (whose equation
is linear in the midpoint velocity) reduces each node to one monotone
scalar equation

    clin * s + dt^2 * a * ghat(s) = b,   clin = 2 dt + dt^3 alpha^2 / 2,

solved by safeguarded Newton inside a sign bracket.

State arrays are padded: length n + 2 with fixed zeros at both ends.
"""

from __future__ import annotations

import math
import os

import numpy as np

_TINY = 1e-150

_requested = os.environ.get("WAVEDECAY_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(f"WAVEDECAY_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numpy":
    _HAVE_NUMBA = False
else:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise
        _HAVE_NUMBA = False

if not _HAVE_NUMBA:

    def njit(*args, **kwargs):  # no-op decorator so the jit source stays importable
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def _ghat(s, fam, p, q, s_sat, g_sat):
    if s == 0.0:
        return 0.0
    a = -s if s < 0.0 else s
    if a >= s_sat:
        v = g_sat / s_sat * a
    elif fam == 0:
        v = a
    elif fam == 1:
        v = a**p
    elif fam == 2:
        v = 0.0 if a < _TINY else math.exp(-1.0 / (a * a))
    elif fam == 3:
        v = a**p * math.log(1.0 / a) ** q
    else:
        v = math.exp(-math.log(1.0 / a) ** p)
    return v if s > 0.0 else -v


@njit(cache=True)
def _ghat_prime(s, fam, p, q, s_sat, g_sat):
    a = -s if s < 0.0 else s
    if a >= s_sat:
        return g_sat / s_sat
    if a == 0.0:
        return 1.0 if fam == 0 else 0.0
    if fam == 0:
        return 1.0
    if fam == 1:
        return p * a ** (p - 1.0)
    if fam == 2:
        return 0.0 if a < _TINY else math.exp(-1.0 / (a * a)) * 2.0 / (a * a * a)
    ell = math.log(1.0 / a)
    if fam == 3:
        return a ** (p - 1.0) * ell ** (q - 1.0) * (p * ell - q)
    if ell <= 0.0:
        return 0.0
    return math.exp(-(ell**p)) * p * ell ** (p - 1.0) / a


@njit(cache=True)
def _solve_node(b, clin, k2, fam, p, q, s_sat, g_sat, tol, maxit):
    """Root of clin*s + k2*ghat(s) - b; returns nan on non-convergence.

    The root lies between 0 and b/clin because ghat has the sign of s.
    Newton steps are accepted only inside the current sign bracket; anything
    else falls back to bisection, so progress is guaranteed.
    """
    if b == 0.0:
        return 0.0
    s_lin = b / clin
    if b > 0.0:
        lo, hi = 0.0, s_lin
    else:
        lo, hi = s_lin, 0.0
    s = s_lin
    feps = 1e-14 * abs(b)
    for _ in range(maxit):
        f = clin * s + k2 * _ghat(s, fam, p, q, s_sat, g_sat) - b
        if abs(f) <= feps:
            return s
        if f > 0.0:
            hi = s
        else:
            lo = s
        if hi - lo <= tol * (1.0 + abs(s)):
            return 0.5 * (lo + hi)
        d = clin + k2 * _ghat_prime(s, fam, p, q, s_sat, g_sat)
        sn = s - f / d
        if sn <= lo or sn >= hi or sn == s:
            sn = 0.5 * (lo + hi)
            if sn == s:
                return s
        s = sn
    return math.nan


@njit(cache=True)
def _advance_numba(up, uc, vp, vc, alpha, aa, dt, dx, nsteps, fam, p, q, s_sat, g_sat, tol, maxit):
    n2 = uc.shape[0]
    inv_dx2 = 1.0 / (dx * dx)
    dt2 = dt * dt
    two_dt = 2.0 * dt
    half_dt3 = 0.5 * dt2 * dt
    un = np.zeros(n2)
    vn = np.zeros(n2)
    for _ in range(nsteps):
        for i in range(1, n2 - 1):
            lapu = (uc[i - 1] - 2.0 * uc[i] + uc[i + 1]) * inv_dx2
            lapv = (vc[i - 1] - 2.0 * vc[i] + vc[i + 1]) * inv_dx2
            P = 2.0 * uc[i] - up[i] + dt2 * lapu
            Q = 2.0 * vc[i] - vp[i] + dt2 * lapv
            al = alpha[i]
            rmid0 = (Q - vp[i]) / two_dt
            b = P - up[i] - dt2 * al * rmid0
            clin = two_dt + half_dt3 * al * al
            k2 = dt2 * aa[i]
            if k2 == 0.0:
                s = b / clin
            else:
                s = _solve_node(b, clin, k2, fam, p, q, s_sat, g_sat, tol, maxit)
                if math.isnan(s):
                    return 1, i, b
            un[i] = up[i] + two_dt * s
            vn[i] = Q + dt2 * al * s
        for i in range(1, n2 - 1):
            up[i] = uc[i]
            uc[i] = un[i]
            vp[i] = vc[i]
            vc[i] = vn[i]
    return 0, -1, 0.0


def ghat_np(s: np.ndarray, fam: int, p: float, q: float, s_sat: float, g_sat: float) -> np.ndarray:
    """Vectorized odd extension of g (same branches as the scalar jit version)."""
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    out = np.zeros_like(a)
    lin = a >= s_sat
    out[lin] = g_sat / s_sat * a[lin]
    mid = (~lin) & (a > 0.0)
    am = a[mid]
    if fam == 0:
        v = am
    elif fam == 1:
        v = am**p
    elif fam == 2:
        v = np.zeros_like(am)
        ok = am >= _TINY
        v[ok] = np.exp(-1.0 / (am[ok] * am[ok]))
    elif fam == 3:
        v = am**p * np.log(1.0 / am) ** q
    else:
        v = np.exp(-np.log(1.0 / am) ** p)
    out[mid] = v
    return np.sign(s) * out


def _ghat_prime_np(s, fam, p, q, s_sat, g_sat):
    a = np.abs(np.asarray(s, dtype=float))
    out = np.full_like(a, g_sat / s_sat)
    mid = a < s_sat
    am = a[mid]
    if fam == 0:
        v = np.ones_like(am)
    elif fam == 1:
        with np.errstate(divide="ignore"):
            v = np.where(am > 0.0, p * am ** (p - 1.0), 0.0 if p > 1.0 else 1.0)
    elif fam == 2:
        v = np.zeros_like(am)
        ok = am >= _TINY
        v[ok] = np.exp(-1.0 / (am[ok] ** 2)) * 2.0 / am[ok] ** 3
    else:
        v = np.zeros_like(am)
        ok = am > 0.0
        ell = np.log(1.0 / am[ok])
        if fam == 3:
            v[ok] = am[ok] ** (p - 1.0) * ell ** (q - 1.0) * (p * ell - q)
        else:
            pos = ell > 0.0
            w = np.zeros_like(ell)
            w[pos] = np.exp(-(ell[pos] ** p)) * p * ell[pos] ** (p - 1.0) / am[ok][pos]
            v[ok] = w
    out[mid] = v
    return out


def _advance_numpy(up, uc, vp, vc, alpha, aa, dt, dx, nsteps, fam, p, q, s_sat, g_sat, tol, maxit):
    inv_dx2 = 1.0 / (dx * dx)
    dt2 = dt * dt
    two_dt = 2.0 * dt
    al = alpha[1:-1]
    a_in = aa[1:-1]
    clin = two_dt + 0.5 * dt2 * dt * al * al
    k2 = dt2 * a_in
    damped = k2 > 0.0
    for _ in range(nsteps):
        lapu = (uc[:-2] - 2.0 * uc[1:-1] + uc[2:]) * inv_dx2
        lapv = (vc[:-2] - 2.0 * vc[1:-1] + vc[2:]) * inv_dx2
        P = 2.0 * uc[1:-1] - up[1:-1] + dt2 * lapu
        Q = 2.0 * vc[1:-1] - vp[1:-1] + dt2 * lapv
        rmid0 = (Q - vp[1:-1]) / two_dt
        b = P - up[1:-1] - dt2 * al * rmid0
        s = b / clin
        if damped.any():
            bd = b[damped]
            cd = clin[damped]
            kd = k2[damped]
            sd = bd / cd
            lo = np.minimum(0.0, sd)
            hi = np.maximum(0.0, sd)
            x = sd.copy()
            feps = 1e-14 * np.abs(bd)
            done = bd == 0.0
            x[done] = 0.0
            for _it in range(maxit):
                f = cd * x + kd * ghat_np(x, fam, p, q, s_sat, g_sat) - bd
                done = done | (np.abs(f) <= feps)
                if done.all():
                    break
                pos = (f > 0.0) & ~done
                neg = (f < 0.0) & ~done
                hi[pos] = x[pos]
                lo[neg] = x[neg]
                d = cd + kd * _ghat_prime_np(x, fam, p, q, s_sat, g_sat)
                xn = x - f / d
                bad = (xn <= lo) | (xn >= hi)
                xn[bad] = 0.5 * (lo[bad] + hi[bad])
                x = np.where(done, x, xn)
            else:
                if not done.all():
                    bad_local = int(np.argmax(~done))
                    node = int(np.nonzero(damped)[0][bad_local]) + 1
                    return 1, node, float(f[bad_local])
            s[damped] = x
        un = up[1:-1] + two_dt * s
        vn = Q + dt2 * al * s
        up[1:-1] = uc[1:-1]
        uc[1:-1] = un
        vp[1:-1] = vc[1:-1]
        vc[1:-1] = vn
    return 0, -1, 0.0


if _HAVE_NUMBA:
    ACTIVE_BACKEND = "numba"
    advance = _advance_numba
else:
    ACTIVE_BACKEND = "numpy"
    advance = _advance_numpy

advance_numpy = _advance_numpy
advance_numba = _advance_numba if _HAVE_NUMBA else None


def active_backend() -> str:
    return ACTIVE_BACKEND
