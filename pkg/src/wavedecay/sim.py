"""Dissipation-exact finite-difference solver for the coupled 1D wave system

    u_tt - u_xx + alpha(x) v_t + a(x) ghat(u_t) = 0
    v_tt - v_xx - alpha(x) u_t                  = 0

on (0, 1) with homogeneous Dirichlet ends.  The scheme is leapfrog with the
coupling and damping terms taken implicitly at the midpoint velocity; with
the compatible discrete energy

    E_{k-1/2} = dx/2 * [ |(u_k - u_{k-1})/dt|^2 + <D u_{k-1}, D u_k> + (same for v) ]

(D = forward difference including the boundary edges) the per-step balance is

    E_{k+1/2} - E_{k-1/2} = -dt * dx * sum_i rho(x_i, s_i) s_i,

with s the midpoint velocity: the coupling is exactly energy-neutral and all
decay comes from the damping term.  Trace rows therefore live at half-step
times; the first row is the initialization pair labeled t = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .feedback import CoefficientField, FeedbackLaw
from ._kernels import ghat_np

DEFAULT_ALPHA_MAX = 0.2
ENERGY_FLOOR_FACTOR = 1e-14
NODE_SOLVE_TOL = 1e-13
NODE_SOLVE_MAXIT = 200


class SimError(RuntimeError):
    """Simulation setup or stepping failure."""


# ---------------------------------------------------------------------------
# initial profiles


def parse_profile(text: str):
    """Parse an initial-profile description into a callable on x in (0, 1).

    Accepted atoms, joined by '+':
      zero
      sine:K:AMP          AMP * sin(K pi x)
      bump:L:R:AMP        C^infty bump supported on (L, R) strictly inside (0,1)
    """
    text = text.strip()
    if not text:
        raise SimError("empty initial profile")
    atoms = [a.strip() for a in text.split("+")]
    parts = []
    for atom in atoms:
        fields = atom.split(":")
        kind = fields[0]
        if kind == "zero":
            parts.append(lambda x: np.zeros_like(x))
        elif kind == "sine":
            if len(fields) != 3:
                raise SimError(f"sine profile needs sine:K:AMP, got {atom!r}")
            k, amp = int(fields[1]), float(fields[2])
            if k < 1:
                raise SimError("sine mode index must be >= 1")
            parts.append(lambda x, k=k, amp=amp: amp * np.sin(k * math.pi * x))
        elif kind == "bump":
            if len(fields) != 4:
                raise SimError(f"bump profile needs bump:L:R:AMP, got {atom!r}")
            lo, hi, amp = float(fields[1]), float(fields[2]), float(fields[3])
            if not (0.0 < lo < hi < 1.0):
                raise SimError("bump support must lie strictly inside (0,1) (zero boundary)")

            def bump(x, lo=lo, hi=hi, amp=amp):
                xi = (2.0 * x - lo - hi) / (hi - lo)
                out = np.zeros_like(x)
                inside = np.abs(xi) < 1.0
                out[inside] = amp * np.exp(1.0 - 1.0 / (1.0 - xi[inside] ** 2))
                return out

            parts.append(bump)
        else:
            raise SimError(f"unknown profile atom {atom!r}")

    def profile(x):
        out = np.zeros_like(x)
        for f in parts:
            out = out + f(x)
        return out

    return profile


# ---------------------------------------------------------------------------
# configuration and state


@dataclass
class SimConfig:
    law: FeedbackLaw
    alpha_field: CoefficientField | None = None
    a_field: CoefficientField | None = None
    n: int = 399
    cfl: float = 0.9
    dt: float | None = None
    t_final: float = 2000.0
    stride: int = 200
    u0: str = "sine:1:1.0"
    u1: str = "zero"
    v0: str = "sine:2:0.5"
    v1: str = "zero"
    smooth: bool = True
    alpha_max: float = DEFAULT_ALPHA_MAX


@dataclass
class WaveState:
    n: int
    dx: float
    dt: float
    t: float
    law: FeedbackLaw
    alpha: np.ndarray  # padded, length n+2, zero ends
    a: np.ndarray
    u_prev: np.ndarray
    u_curr: np.ndarray
    v_prev: np.ndarray
    v_curr: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 2)


def build_coefficients(spec: CoefficientField | None, n: int) -> np.ndarray:
    """Sample a coefficient field at the padded grid nodes (zeros when absent)."""
    x = np.linspace(0.0, 1.0, n + 2)
    if spec is None:
        return np.zeros(n + 2)
    vals = spec.sample(x)
    vals[0] = 0.0
    vals[-1] = 0.0
    return vals


def _lap(w: np.ndarray, dx: float) -> np.ndarray:
    out = np.zeros_like(w)
    out[1:-1] = (w[:-2] - 2.0 * w[1:-1] + w[2:]) / (dx * dx)
    return out


def init_state(cfg: SimConfig) -> WaveState:
    """Build the two-level starting state with a second-order Taylor start."""
    if cfg.n < 3:
        raise SimError("grid needs at least 3 interior nodes")
    dx = 1.0 / (cfg.n + 1)
    if cfg.dt is not None:
        dt = cfg.dt
        if not (0.0 < dt < dx):
            raise SimError(f"dt = {dt} violates the stability bound dt < dx = {dx}")
    else:
        if not (0.0 < cfg.cfl < 1.0):
            raise SimError(f"cfl must lie in (0, 1), got {cfg.cfl}")
        dt = cfg.cfl * dx

    alpha = build_coefficients(cfg.alpha_field, cfg.n)
    a = build_coefficients(cfg.a_field, cfg.n)
    if cfg.alpha_max > DEFAULT_ALPHA_MAX:
        warnings.warn(
            f"alpha_max = {cfg.alpha_max} exceeds the default smallness bound "
            f"{DEFAULT_ALPHA_MAX}; decay guarantees may not apply",
            stacklevel=2,
        )
    if alpha.max(initial=0.0) > cfg.alpha_max:
        raise SimError(
            f"coupling amplitude {alpha.max():g} exceeds alpha_max = {cfg.alpha_max}"
        )

    x = np.linspace(0.0, 1.0, cfg.n + 2)
    u0 = parse_profile(cfg.u0)(x)
    u1 = parse_profile(cfg.u1)(x)
    v0 = parse_profile(cfg.v0)(x)
    v1 = parse_profile(cfg.v1)(x)
    for name, w in (("u0", u0), ("u1", u1), ("v0", v0), ("v1", v1)):
        scale = float(np.max(np.abs(w)))
        edge = max(abs(w[0]), abs(w[-1]))
        if edge > 1e-12 * max(scale, 1.0):
            raise SimError(f"initial profile {name} is nonzero on the boundary")
        w[0] = w[-1] = 0.0  # flush rounding residue of analytic profiles

    law = cfg.law
    rho1 = a * ghat_np(u1, law.code, law.p, law.q, law.s_sat, law.g_sat)
    u_tt0 = _lap(u0, dx) - alpha * v1 - rho1
    v_tt0 = _lap(v0, dx) + alpha * u1
    u_prev = u0 - dt * u1 + 0.5 * dt * dt * u_tt0
    v_prev = v0 - dt * v1 + 0.5 * dt * dt * v_tt0
    u_prev[0] = u_prev[-1] = 0.0
    v_prev[0] = v_prev[-1] = 0.0

    return WaveState(
        n=cfg.n,
        dx=dx,
        dt=dt,
        t=0.0,
        law=law,
        alpha=alpha,
        a=a,
        u_prev=u_prev,
        u_curr=u0.copy(),
        v_prev=v_prev,
        v_curr=v0.copy(),
    )


def _advance(state: WaveState, nsteps: int) -> None:
    law = state.law
    status, node, resid = _kernels.advance(
        state.u_prev,
        state.u_curr,
        state.v_prev,
        state.v_curr,
        state.alpha,
        state.a,
        state.dt,
        state.dx,
        nsteps,
        law.code,
        law.p,
        law.q,
        law.s_sat,
        law.g_sat,
        NODE_SOLVE_TOL,
        NODE_SOLVE_MAXIT,
    )
    if status != 0:
        raise SimError(
            f"node solve failed to converge at node {node} (t ~ {state.t:g}, "
            f"residual scale {resid:g})"
        )
    state.t += nsteps * state.dt


def step(state: WaveState) -> WaveState:
    """Advance the state by one time step (in place)."""
    _advance(state, 1)
    return state


def energy(state: WaveState) -> tuple[float, float]:
    """Compatible discrete energy and first-order energy at the half step.

    The gradient part uses the product of forward differences at the two
    stored levels, which is the functional the scheme conserves exactly when
    the damping vanishes.  The first-order energy evaluates the accelerations
    through the equations at the level average (meaningful for smooth data).
    """
    dt, dx = state.dt, state.dx
    wu = (state.u_curr - state.u_prev) / dt
    wv = (state.v_curr - state.v_prev) / dt
    kin = 0.5 * dx * (np.dot(wu[1:-1], wu[1:-1]) + np.dot(wv[1:-1], wv[1:-1]))
    duc = np.diff(state.u_curr) / dx
    dup = np.diff(state.u_prev) / dx
    dvc = np.diff(state.v_curr) / dx
    dvp = np.diff(state.v_prev) / dx
    grad = 0.5 * dx * (np.dot(duc, dup) + np.dot(dvc, dvp))
    e = kin + grad

    law = state.law
    u_half = 0.5 * (state.u_curr + state.u_prev)
    v_half = 0.5 * (state.v_curr + state.v_prev)
    rho = state.a * ghat_np(wu, law.code, law.p, law.q, law.s_sat, law.g_sat)
    u_tt = _lap(u_half, dx) - state.alpha * wv - rho
    v_tt = _lap(v_half, dx) + state.alpha * wu
    e1 = 0.5 * dx * (
        np.dot(u_tt[1:-1], u_tt[1:-1])
        + np.dot(v_tt[1:-1], v_tt[1:-1])
        + np.dot(np.diff(wu) / dx, np.diff(wu) / dx)
        + np.dot(np.diff(wv) / dx, np.diff(wv) / dx)
    )
    return float(e), float(e1)


def dissipation_rate(state: WaveState) -> float:
    """-dx * sum rho(x, w) w with the half-step velocity w; always <= 0."""
    law = state.law
    wu = (state.u_curr - state.u_prev) / state.dt
    rho = state.a * ghat_np(wu, law.code, law.p, law.q, law.s_sat, law.g_sat)
    return float(-state.dx * np.dot(wu[1:-1], rho[1:-1]))


# ---------------------------------------------------------------------------
# traces


@dataclass
class EnergyTrace:
    t: np.ndarray
    E: np.ndarray
    E1: np.ndarray
    dissipation: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def e0(self) -> float:
        return float(self.E[0])

    def truncated(self, t_max: float) -> "EnergyTrace":
        keep = self.t <= t_max * (1.0 + 1e-12)
        return EnergyTrace(
            t=self.t[keep],
            E=self.E[keep],
            E1=self.E1[keep],
            dissipation=self.dissipation[keep],
            meta=dict(self.meta),
        )

    def to_csv(self, path) -> None:
        lines = []
        for key in sorted(self.meta):
            lines.append(f"# {key}={self.meta[key]}")
        lines.append("t,E,E1,dissipation")
        for i in range(len(self.t)):
            lines.append(
                f"{self.t[i]:.17g},{self.E[i]:.17g},{self.E1[i]:.17g},"
                f"{self.dissipation[i]:.17g}"
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "EnergyTrace":
        meta = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if "=" in body:
                        k, v = body.split("=", 1)
                        meta[k.strip()] = v.strip()
                    continue
                if line.startswith("t,"):
                    continue
                rows.append([float(c) for c in line.split(",")])
        arr = np.array(rows) if rows else np.zeros((0, 4))
        return cls(t=arr[:, 0], E=arr[:, 1], E1=arr[:, 2], dissipation=arr[:, 3], meta=meta)


def run(cfg: SimConfig, meta: dict | None = None) -> EnergyTrace:
    """Step to t_final, sampling every `stride` steps; early stop at the energy floor."""
    if cfg.t_final <= 0.0:
        raise SimError("t_final must be positive")
    if cfg.stride < 1:
        raise SimError("stride must be >= 1")
    state = init_state(cfg)
    dt = state.dt
    total_steps = int(math.ceil(cfg.t_final / dt))

    ts, es, e1s, ds = [], [], [], []
    law = cfg.law

    def sample(step_index: int) -> float:
        e, e1 = energy(state)
        t_label = max(0.0, step_index * dt - 0.5 * dt)
        ts.append(t_label)
        es.append(e)
        e1s.append(e1 if cfg.smooth else math.nan)
        ds.append(dissipation_rate(state))
        return e

    e0 = sample(0)
    floor = ENERGY_FLOOR_FACTOR * e0
    early_stop = False
    k = 0
    while k < total_steps:
        m = min(cfg.stride, total_steps - k)
        _advance(state, m)
        k += m
        e = sample(k)
        if e0 > 0.0 and e < floor:
            early_stop = True
            break

    trace_meta = {
        "n": str(cfg.n),
        "dx": f"{state.dx:.17g}",
        "dt": f"{dt:.17g}",
        "stride": str(cfg.stride),
        "t_final": f"{cfg.t_final:.17g}",
        "law_family": law.family,
        "law_p": f"{law.p:.17g}",
        "law_q": f"{law.q:.17g}",
        "law_r0": f"{law.r0:.17g}",
        "e0": f"{e0:.17g}",
        "e1_0": f"{e1s[0]:.17g}",
        "smooth": str(cfg.smooth).lower(),
        "alpha_max": f"{cfg.alpha_max:.17g}",
        "backend": _kernels.active_backend(),
        "early_stop": str(early_stop).lower(),
        "geometry_1d": "control/damping regions are nonempty open subintervals (geometric condition trivial in 1d)",
    }
    if meta:
        trace_meta.update(meta)
    return EnergyTrace(
        t=np.array(ts),
        E=np.array(es),
        E1=np.array(e1s),
        dissipation=np.array(ds),
        meta=trace_meta,
    )
