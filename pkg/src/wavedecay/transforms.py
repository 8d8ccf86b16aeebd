"""Convex conjugate machinery and decay envelopes.

For a growth law with H strictly convex on [0, r0^2], define

    Hhat*(y) = sup_{x in [0, r0^2]} (x y - H(x)),
    L(y)     = Hhat*(y) / y   (y > 0),  L(0) = 0,

so L maps [0, inf) one-to-one onto [0, r0^2).  The upper decay envelopes are

    general:     t |-> 2 beta L(1 / psi0^{-1}(t / M)),      t >= M / H'(r0^2)
    simplified:  t |-> 2 beta (H')^{-1}(kappa M / t),        laws away from linear

with

    psi0(x) = 1/H'(r0^2)
              + int_{1/x}^{H'(r0^2)} dtheta / (theta^2 (1 - Lambda((H')^{-1}(theta)))).

The simplified form requires limsup Lambda < 1 at 0; the linear law (and
anything classified as linear-like) is rejected because the psi0 integrand
degenerates.  beta, M, kappa and the lower-bound constants are calibration
parameters carried by DecayEnvelope; the calibration helpers live in the
harness module.
"""

from __future__ import annotations

import bisect as _bisect
import math
from dataclasses import dataclass, field
from functools import lru_cache
from collections.abc import Callable

from .feedback import FeedbackLaw, eval_H, eval_H_prime, lambda_H, lambda_limit
from .numutil import adaptive_simpson, bisect_root, invert_increasing


class TransformError(ValueError):
    """Evaluation outside an operation's stated domain."""


class ClassificationError(TransformError):
    """Operation requires a law away from linear growth (limsup Lambda < 1)."""


@lru_cache(maxsize=None)
def _c0(law: FeedbackLaw) -> float:
    """H'(r0^2), the right edge of the derivative range."""
    return eval_H_prime(law, law.r0**2)


@lru_cache(maxsize=None)
def _H_edge(law: FeedbackLaw) -> float:
    return eval_H(law, law.r0**2)


@lru_cache(maxsize=None)
def _away_from_linear(law: FeedbackLaw) -> bool:
    return lambda_limit(law) < 1.0 - 1e-6


def require_away_from_linear(law: FeedbackLaw) -> None:
    if not _away_from_linear(law):
        raise ClassificationError(
            f"{law!r} is classified as linear-like (limsup Lambda ~ 1); "
            "the simplified envelope and psi0 do not apply"
        )


def hprime_inv(law: FeedbackLaw, y: float) -> float:
    """(H')^{-1}(y) on [0, H'(r0^2)]: closed form for power laws, else bisection."""
    c0 = _c0(law)
    if y < 0.0 or y > c0 * (1.0 + 1e-12):
        raise TransformError(f"H' inverse domain is [0, {c0}], got {y}")
    if law.family == "linear":
        raise ClassificationError("H' is constant for the linear law")
    if y <= 0.0:
        return 0.0
    if y >= c0:
        return law.r0**2
    if law.family == "power":
        if law.p == 1.0:
            raise ClassificationError("H' is constant for power p=1")
        return (2.0 * y / (law.p + 1.0)) ** (2.0 / (law.p - 1.0))
    return bisect_root(lambda x: eval_H_prime(law, x) - y, 0.0, law.r0**2, xtol=1e-12)


def conjugate(law: FeedbackLaw, y: float) -> float:
    """Convex conjugate of H restricted to [0, r0^2], evaluated at y >= 0.

    For 0 <= y <= H'(r0^2) the supremum is interior at (H')^{-1}(y); beyond
    that it sits at the right endpoint.
    """
    if y < 0.0:
        raise TransformError("conjugate requires y >= 0")
    if y == 0.0:
        return 0.0
    r2 = law.r0**2
    if law.family == "linear" or (law.family == "power" and law.p == 1.0):
        return r2 * (y - 1.0) if y > 1.0 else 0.0
    c0 = _c0(law)
    if y >= c0:
        return y * r2 - _H_edge(law)
    x_star = hprime_inv(law, y)
    return y * x_star - eval_H(law, x_star)


def eval_L(law: FeedbackLaw, y: float) -> float:
    """L(y) = conjugate(y) / y for y > 0, L(0) = 0; increasing onto [0, r0^2)."""
    if y < 0.0:
        raise TransformError("L requires y >= 0")
    if y == 0.0:
        return 0.0
    return conjugate(law, y) / y


def inverse_L(law: FeedbackLaw, z: float) -> float:
    """The unique y >= 0 with L(y) = z, for z in [0, r0^2)."""
    r2 = law.r0**2
    if z < 0.0 or z >= r2:
        raise TransformError(f"inverse_L domain is [0, {r2}), got {z}")
    if z == 0.0:
        return 0.0
    return invert_increasing(lambda y: eval_L(law, y), z, lo=0.0, xtol=1e-12)


# Cached cumulative values of the psi0 integral, per law: sorted thetas with
# I(theta) = int_theta^c0.  Repeated evaluations (the inversion bisections
# hammer nearby points) then only integrate short segments from the nearest
# cached node above.
_PSI0_CACHE: dict[FeedbackLaw, tuple[list[float], list[float]]] = {}
_PSI0_CACHE_CAP = 8192


def _psi0_integrand(law: FeedbackLaw):
    def integrand(theta: float) -> float:
        xh = hprime_inv(law, theta)
        lam = lambda_H(law, xh) if xh > 0.0 else 0.0
        denom = 1.0 - lam
        if denom <= 0.0:
            raise ClassificationError("psi0 integrand degenerates (Lambda -> 1)")
        return 1.0 / (theta * theta * denom)

    return integrand


def psi0_eval(law: FeedbackLaw, x: float) -> float:
    """psi0(x) for x >= 1/H'(r0^2), by adaptive quadrature (rtol 1e-10)."""
    require_away_from_linear(law)
    c0 = _c0(law)
    x_min = 1.0 / c0
    if x < x_min * (1.0 - 1e-12):
        raise TransformError(f"psi0 domain is [{x_min}, inf), got {x}")
    if x <= x_min:
        return x_min

    theta = 1.0 / x
    thetas, values = _PSI0_CACHE.setdefault(law, ([c0], [0.0]))
    i = _bisect.bisect_left(thetas, theta)
    if i < len(thetas) and thetas[i] == theta:
        return x_min + values[i]
    anchor = i if i < len(thetas) else len(thetas) - 1
    value = values[anchor] + adaptive_simpson(
        _psi0_integrand(law), theta, thetas[anchor], rtol=1e-10
    )
    if len(thetas) < _PSI0_CACHE_CAP:
        thetas.insert(i, theta)
        values.insert(i, value)
    return x_min + value


def psi0_inverse(law: FeedbackLaw, tau: float) -> float:
    """Inverse of psi0 by bisection with an expanding upper bracket."""
    x_min = 1.0 / _c0(law)
    if tau < x_min * (1.0 - 1e-12):
        raise TransformError(f"psi0 inverse domain is [{x_min}, inf), got {tau}")
    if tau <= x_min:
        return x_min
    return invert_increasing(lambda x: psi0_eval(law, x), tau, lo=x_min, xtol=1e-10)


@dataclass
class DecayEnvelope:
    """A calibrated decay bound.

    kind 'general' or 'simplified' are upper bounds (2*beta scale, time scale
    M, and for the simplified form the extra factor kappa).  kind 'lower' is
    the lower bound with constants gamma_s (4 sqrt of the initial first-order
    energy), C_s from the comparison argument, and time shifts T0, T1.
    kind 'poly' / 'expo' are the closed-form bounds used by the synthetic
    integral-inequality checks (parameters e0, M/alpha, resp. e0, T).
    """

    kind: str
    law: FeedbackLaw | None = None
    beta: float = 1.0
    M: float = 1.0
    kappa: float = 1.0
    T0: float = 0.0
    T1: float = 0.0
    gamma_s: float = 1.0
    C_s: float = 1.0
    e0: float = 1.0
    alpha: float = 1.0
    extras: dict = field(default_factory=dict)

    def domain_start(self) -> float:
        if self.kind == "general":
            return self.M / _c0(self.law)
        if self.kind == "simplified":
            return self.kappa * self.M / _c0(self.law)
        if self.kind == "lower":
            return max(self.T1 + self.T0, self.T0 + 1.0 / _c0(self.law))
        if self.kind == "expo":
            return self.M
        return 0.0

    def __call__(self, t: float) -> float:
        return envelope_value(self, t)


def envelope_general(env: DecayEnvelope, t: float) -> float:
    """2 beta L(1 / psi0^{-1}(t/M)) for t >= M / H'(r0^2)."""
    t_min = env.M / _c0(env.law)
    if t < t_min * (1.0 - 1e-12):
        raise TransformError(f"general envelope domain starts at {t_min}, got {t}")
    x = psi0_inverse(env.law, t / env.M)
    return 2.0 * env.beta * eval_L(env.law, 1.0 / x)


def envelope_simplified(env: DecayEnvelope, t: float) -> float:
    """2 beta (H')^{-1}(kappa M / t); requires a law away from linear growth."""
    require_away_from_linear(env.law)
    arg = env.kappa * env.M / t
    if t <= 0.0 or arg > _c0(env.law) * (1.0 + 1e-12):
        raise TransformError("t too small for the simplified envelope domain")
    return 2.0 * env.beta * hprime_inv(env.law, min(arg, _c0(env.law)))


def envelope_value(env: DecayEnvelope, t: float) -> float:
    if env.kind == "general":
        return envelope_general(env, t)
    if env.kind == "simplified":
        return envelope_simplified(env, t)
    if env.kind == "lower":
        # imported here to keep module dependencies one-way
        from .odecmp import lower_envelope

        return lower_envelope(env, t)
    if env.kind == "poly":
        a = env.alpha
        return env.e0 * min(1.0, (env.M * (a + 1.0) / (env.M + a * env.e0**a * t)) ** (1.0 / a))
    if env.kind == "expo":
        return env.e0 * math.exp(1.0 - t / env.M)
    raise TransformError(f"unknown envelope kind {env.kind!r}")


def optimal_weight(
    law: FeedbackLaw, E_value: float, beta: float, polynomial: bool = False
) -> float:
    """Weight L^{-1}(E / 2 beta); in polynomial mode, E^{(p-1)/2} for power laws."""
    if E_value < 0.0:
        raise TransformError("energy must be nonnegative")
    if polynomial:
        if law.family != "power":
            raise TransformError("polynomial weight mode requires the power family")
        return E_value ** (0.5 * (law.p - 1.0))
    z = E_value / (2.0 * beta)
    if z >= law.r0**2:
        raise TransformError(
            f"E/(2 beta) = {z} is outside the range of L; increase beta "
            f"(needs beta >= E(0) / (2 L(H'(r0^2))))"
        )
    return inverse_L(law, z)


def beta_floor(law: FeedbackLaw, e0: float) -> float:
    """Smallest admissible beta for the optimal weight: E(0) / (2 L(H'(r0^2)))."""
    return e0 / (2.0 * eval_L(law, _c0(law)))


def weight_psi_r(
    w: Callable[[float], float],
    r: float,
    value: float,
    mode: str,
    w_inv: Callable[[float], float] | None = None,
) -> float:
    """K_r / psi_r machinery for a strictly increasing weight w on [0, eta).

    mode 'K':    K_r(tau) = int_tau^r dy / (y w(y)),  tau in (0, r]
    mode 'psi':  psi_r(z) = z + K_r(w^{-1}(1/z)),      z >= 1 / w(r)

    w^{-1} is found by bisection on [0, r] unless supplied.
    """
    if r <= 0.0:
        raise TransformError("r must be positive")
    if mode == "K":
        tau = value
        if not (0.0 < tau <= r * (1.0 + 1e-12)):
            raise TransformError(f"K_r domain is (0, {r}], got {tau}")
        if tau >= r:
            return 0.0
        return adaptive_simpson(lambda y: 1.0 / (y * w(y)), tau, r, rtol=1e-10)
    if mode == "psi":
        z = value
        z_min = 1.0 / w(r)
        if z < z_min * (1.0 - 1e-12):
            raise TransformError(f"psi_r domain is [{z_min}, inf), got {z}")
        if z <= z_min:
            return z_min
        target = 1.0 / z
        if w_inv is not None:
            tau = w_inv(target)
        else:
            tau = bisect_root(lambda y: w(y) - target, 0.0, r, xtol=1e-13)
        return z + weight_psi_r(w, r, tau, "K")
    raise TransformError(f"mode must be 'K' or 'psi', got {mode!r}")
