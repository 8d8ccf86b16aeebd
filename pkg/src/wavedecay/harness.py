"""Experiment orchestration: weighted integral inequalities, decay-rate fits,
envelope calibration and comparison, and full config-driven runs.

The weighted inequality at the center of everything is

    int_S^T w(E(t)) E(t) dt <= M E(S)   for all 0 <= S <= T;

check_integral_inequality measures the smallest such M on a trace (trapezoid
in time, the supremum taken over a grid of start points) and optionally
extends the horizon by extrapolating a fitted power-law tail.  The decay
bounds that follow from that inequality (polynomial, exponential, and the
general-weight form) are exercised against synthetic traces by lemma_suite.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig
from .feedback import FeedbackLaw
from .numutil import invert_increasing
from .odecmp import hfl_screen
from .sim import EnergyTrace, run
from .transforms import (
    DecayEnvelope,
    TransformError,
    _away_from_linear,
    _c0,
    beta_floor,
    envelope_value,
    hprime_inv,
    optimal_weight,
    weight_psi_r,
)


class HarnessError(ValueError):
    pass


MONOTONE_STEP_TOL = 1e-11  # relative to E(0), per sampled step
UPPER_MARGIN_SLACK = 1.0 + 1e-9
LOWER_MARGIN_SLACK = 1.0 - 1e-9


# ---------------------------------------------------------------------------
# weighted integral inequality


@dataclass
class IntegralCheck:
    M: float
    S_values: np.ndarray
    ratios: np.ndarray
    tail: float
    tail_extrapolated: bool
    passed: bool | None = None
    M_bound: float | None = None


def _dense_grid(horizon: float) -> np.ndarray:
    t_break = min(1.0, horizon)
    lin = np.linspace(0.0, t_break, 4001)
    if horizon <= t_break:
        return lin
    n_geo = min(int(math.log(horizon / t_break) / 1e-4) + 2, 200_001)
    geo = np.geomspace(t_break, horizon, n_geo)
    return np.unique(np.concatenate([lin, geo]))


def _weight_values(weight, E: np.ndarray) -> np.ndarray:
    try:
        w = np.asarray(weight(E), dtype=float)
        if w.shape == E.shape:
            return w
    except Exception:
        pass
    return np.array([weight(float(e)) for e in E])


def _power_tail(t, f, t_end):
    """Extrapolated integral of f beyond t_end from a last-decade power-law fit."""
    sel = (t >= t_end / 10.0) & (f > 0.0) & (t > 0.0)
    if sel.sum() < 5:
        return 0.0, False
    lt, lf = np.log(t[sel]), np.log(f[sel])
    slope, intercept = np.polyfit(lt, lf, 1)
    if slope >= -1.0 - 1e-6:
        return math.inf, True  # tail not integrable under the fitted rate
    # int_T^inf C s^slope ds with C = exp(intercept)
    tail = math.exp(intercept) * t_end ** (slope + 1.0) / (-(slope + 1.0))
    return tail, True


def check_integral_inequality(
    trace_or_function,
    weight,
    M_bound: float | None = None,
    mode: str = "finite",
    horizon: float | None = None,
    n_starts: int = 50,
) -> IntegralCheck:
    """Smallest M with int_S^T w(E) E dt <= M E(S) over a grid of 50 starts.

    Accepts an EnergyTrace, a (t, E) pair, or a callable E(t) (which then
    needs a horizon; it is sampled on a dense hybrid linear/geometric grid).
    mode='power_tail' extends the integral beyond the final time using a
    power law fitted to the last decade.
    """
    if isinstance(trace_or_function, EnergyTrace):
        t = np.asarray(trace_or_function.t, dtype=float)
        E = np.asarray(trace_or_function.E, dtype=float)
    elif callable(trace_or_function):
        if horizon is None:
            raise HarnessError("a callable input needs an explicit horizon")
        t = _dense_grid(horizon)
        E = np.array([trace_or_function(float(x)) for x in t])
    else:
        t, E = (np.asarray(a, dtype=float) for a in trace_or_function)
    if len(t) < 3:
        raise HarnessError("need at least 3 samples")
    e_scale = max(E[0], 1e-300)
    if np.any(np.diff(E) > 1e-12 * e_scale):
        raise HarnessError("input must be nonincreasing")

    f = _weight_values(weight, E) * E
    seg = 0.5 * (f[1:] + f[:-1]) * np.diff(t)
    right = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])

    tail, extrapolated = 0.0, False
    if mode == "power_tail":
        tail, extrapolated = _power_tail(t, f, float(t[-1]))
    elif mode != "finite":
        raise HarnessError(f"mode must be 'finite' or 'power_tail', got {mode!r}")

    idx = np.unique(np.round(np.linspace(0, len(t) - 1, n_starts)).astype(int))
    ratios = []
    svals = []
    for i in idx:
        if E[i] <= 0.0:
            continue
        ratios.append((right[i] + tail) / E[i])
        svals.append(t[i])
    if not ratios:
        raise HarnessError("no start points with positive energy")
    ratios = np.array(ratios)
    M = float(np.max(ratios))
    passed = None if M_bound is None else bool(M <= M_bound)
    return IntegralCheck(
        M=M,
        S_values=np.array(svals),
        ratios=ratios,
        tail=tail,
        tail_extrapolated=extrapolated,
        passed=passed,
        M_bound=M_bound,
    )


# ---------------------------------------------------------------------------
# synthetic decay-bound suite


@dataclass
class SuiteEntry:
    name: str
    passed: bool
    detail: str


@dataclass
class SuiteReport:
    entries: list[SuiteEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def add(self, name: str, passed: bool, detail: str) -> None:
        self.entries.append(SuiteEntry(name, bool(passed), detail))


def lemma_suite() -> SuiteReport:
    """Battery of synthetic checks of the decay bounds implied by the
    weighted integral inequality: the polynomial bound (two forms), the
    exponential bound, and the general-weight bound.
    """
    rep = SuiteReport()

    # The measured M carries the extrapolated-tail error amplified by 1/E at
    # late start points, so its sanity tolerance is loose; the substantive
    # assertion is that the concluded bound dominates pointwise (with the
    # measured M as the hypothesis constant, which only weakens the bound).

    # polynomial bound, form valid from t >= T: E = 1/(1+t), alpha = 1
    alpha = 1.0
    chk = check_integral_inequality(
        lambda t: 1.0 / (1.0 + t), lambda y: y**alpha, mode="power_tail", horizon=1e4
    )
    T = chk.M  # E(0) = 1 so the E(0)^alpha factor drops
    ts = np.geomspace(max(T, 1e-6), 1e3, 200)
    e = 1.0 / (1.0 + ts)
    bound = ((T + alpha * ts) / (T + alpha * T)) ** (-1.0 / alpha)
    ok = bool(np.all(e <= bound * UPPER_MARGIN_SLACK))
    rep.add(
        "poly_bound_from_T",
        ok and abs(chk.M - 1.0) < 1e-2,
        f"measured M={chk.M:.8f}, max E/bound={np.max(e / bound):.6f}",
    )

    # polynomial bound valid from t = 0: E = (1+t)^-2, alpha = 1/2
    alpha = 0.5
    chk = check_integral_inequality(
        lambda t: (1.0 + t) ** -2.0, lambda y: y**alpha, mode="power_tail", horizon=1e4
    )
    M = chk.M
    ts = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 200)])
    e = (1.0 + ts) ** -2.0
    bound = np.minimum(1.0, (M * (alpha + 1.0) / (M + alpha * ts)) ** (1.0 / alpha))
    ok = bool(np.all(e <= bound * UPPER_MARGIN_SLACK))
    rep.add(
        "poly_bound_from_0",
        ok and abs(chk.M - 0.5) < 1e-2,
        f"measured M={chk.M:.8f}, max E/bound={np.max(e / bound):.6f}",
    )

    # exponential bound: E = e^-t, unit weight (dense linear grid: no tail)
    tg = np.linspace(0.0, 40.0, 40001)
    chk = check_integral_inequality((tg, np.exp(-tg)), lambda y: np.ones_like(y), mode="finite")
    T = chk.M
    ts = np.linspace(T, 30.0, 200)
    e = np.exp(-ts)
    bound = np.exp(1.0 - ts / T)
    ok = bool(np.all(e <= bound * UPPER_MARGIN_SLACK))
    rep.add(
        "expo_bound",
        ok and abs(chk.M - 1.0) < 1e-5,
        f"measured M={chk.M:.8f}, max E/bound={np.max(e / bound):.6f}",
    )

    # general-weight bound: E = 1/(1+t), w = identity
    w = lambda y: y
    chk = check_integral_inequality(lambda t: 1.0 / (1.0 + t), w, mode="power_tail", horizon=1e4)
    M = chk.M
    total = float(chk.ratios[0] * 1.0)  # ratio at S=0 equals int_0^inf E w(E) since E(0)=1
    r = total / M if M > 0 else 1.0
    t_lo = M / w(r)
    ts = np.geomspace(t_lo, 1e3, 25)
    ok = True
    worst = 0.0
    for tv in ts:
        z = invert_increasing(
            lambda zz: weight_psi_r(w, r, zz, "psi"), tv / M, lo=1.0 / w(r), xtol=1e-9
        )
        bound = 1.0 / z  # w^{-1} is the identity here
        ratio = (1.0 / (1.0 + tv)) / bound
        worst = max(worst, ratio)
        if ratio > UPPER_MARGIN_SLACK:
            ok = False
    rep.add(
        "general_weight_bound",
        ok,
        f"measured M={M:.8f}, r={r:.8f}, max E/bound={worst:.6f}",
    )
    return rep


# ---------------------------------------------------------------------------
# tail fits and envelope comparison


@dataclass
class FitReport:
    slope: float
    stderr: float
    window: tuple[float, float]
    r_squared: float
    n_points: int
    mode: str
    envelope_margins: tuple[float, float] | None = None
    passed: bool | None = None


def default_fit_window(t: np.ndarray, fracs: tuple[float, float] = (2.0 / 3.0, 1.0)):
    """Window given as fractions of the trace's span in log time."""
    pos = np.asarray(t, dtype=float)
    pos = pos[pos > 0.0]
    if len(pos) < 2:
        raise HarnessError("trace has too few positive-time samples to window")
    llo, lhi = math.log(pos[0]), math.log(pos[-1])
    return (
        math.exp(llo + fracs[0] * (lhi - llo)),
        math.exp(llo + fracs[1] * (lhi - llo)),
    )


def fit_tail_exponent(
    trace, window: tuple[float, float] | None = None, mode: str = "power", stretch_p: float = 3.0
) -> FitReport:
    """Least-squares slope of log E against a mode-dependent abscissa.

    mode 'power':     log E vs log t          (slope = power-law exponent)
    mode 'loglog':    log E vs log log t      (slow, logarithmic decay)
    mode 'stretched': log E vs (log t)^(1/p)  (between polynomial and exponential)
    mode 'exp':       log E vs t              (exponential decay rate)
    """
    if isinstance(trace, EnergyTrace):
        t, E = trace.t, trace.E
    else:
        t, E = trace
    t = np.asarray(t, dtype=float)
    E = np.asarray(E, dtype=float)
    if window is None:
        window = default_fit_window(t)
    w0, w1 = window
    if not (w0 < w1):
        raise HarnessError("degenerate fit window")
    t_floor = 1.0 + 1e-9 if mode in ("loglog", "stretched") else 0.0
    sel = (t >= w0) & (t <= w1) & (E > 0.0) & (t > t_floor)
    if sel.sum() < 10:
        raise HarnessError(f"fewer than 10 usable samples in window [{w0:g}, {w1:g}]")
    ts, es = t[sel], E[sel]
    if mode == "power":
        x = np.log(ts)
    elif mode == "loglog":
        x = np.log(np.log(ts))
    elif mode == "stretched":
        x = np.log(ts) ** (1.0 / stretch_p)
    elif mode == "exp":
        x = ts
    else:
        raise HarnessError(f"unknown fit mode {mode!r}")
    y = np.log(es)
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise HarnessError("degenerate abscissa in fit window")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    resid = y - (ym + slope * (x - xm))
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - ym) ** 2))
    stderr = math.sqrt(ss_res / max(n - 2, 1) / sxx)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return FitReport(
        slope=slope,
        stderr=stderr,
        window=(float(w0), float(w1)),
        r_squared=r2,
        n_points=n,
        mode=mode,
    )


def compare_to_envelope(
    trace,
    envelope: DecayEnvelope,
    t_start: float | None = None,
    max_points: int | None = None,
) -> FitReport:
    """Margins min/max of E(t)/envelope(t) over the envelope's valid domain.

    Upper envelopes pass when the max margin stays at or below 1; the lower
    envelope passes when the min margin stays at or above 1 (tiny slack for
    the touch point itself).  The general envelope is costly per point, so
    its margins are evaluated on a subsample unless max_points overrides.
    """
    if isinstance(trace, EnergyTrace):
        t, E = trace.t, trace.E
    else:
        t, E = trace
    t = np.asarray(t, dtype=float)
    E = np.asarray(E, dtype=float)
    lo = envelope.domain_start()
    if t_start is not None:
        lo = max(lo, t_start)
    sel = (t >= lo * (1.0 - 1e-12)) & (E > 0.0)
    if not sel.any():
        raise HarnessError("trace does not overlap the envelope domain")
    ts, es = t[sel], E[sel]
    if max_points is None and envelope.kind == "general":
        max_points = 256
    if max_points is not None and len(ts) > max_points:
        idx = np.unique(np.round(np.linspace(0, len(ts) - 1, max_points)).astype(int))
        ts, es = ts[idx], es[idx]
    env = np.array([envelope_value(envelope, float(tv)) for tv in ts])
    ratios = es / env
    margins = (float(np.min(ratios)), float(np.max(ratios)))
    if envelope.kind in ("general", "simplified", "poly", "expo"):
        passed = margins[1] <= UPPER_MARGIN_SLACK
    elif envelope.kind == "lower":
        passed = margins[0] >= LOWER_MARGIN_SLACK
    else:
        passed = None
    return FitReport(
        slope=math.nan,
        stderr=math.nan,
        window=(float(ts[0]), float(ts[-1])),
        r_squared=math.nan,
        n_points=int(len(ts)),
        mode=f"envelope:{envelope.kind}",
        envelope_margins=margins,
        passed=passed,
    )


# ---------------------------------------------------------------------------
# envelope calibration


def _window_samples(trace: EnergyTrace, t_lo: float, max_points: int | None = None):
    sel = (trace.t >= t_lo) & (trace.E > 0.0)
    if not sel.any():
        raise HarnessError(f"no positive-energy samples at or beyond t = {t_lo:g}")
    ts, es = trace.t[sel], trace.E[sel]
    if max_points is not None and len(ts) > max_points:
        idx = np.unique(np.round(np.linspace(0, len(ts) - 1, max_points)).astype(int))
        ts, es = ts[idx], es[idx]
    return ts, es


def calibrate_upper(
    trace: EnergyTrace,
    law: FeedbackLaw,
    kind: str = "auto",
    beta: float | str = "calibrate",
    kappa: float = 1.0,
    window: tuple[float, float] | None = None,
) -> DecayEnvelope:
    """Smallest upper envelope dominating the trace on the fit window.

    beta defaults to its smallest admissible value E(0)/(2 L(H'(r0^2))).
    The time constant M is the smallest value for which the envelope sits on
    or above every windowed sample (the envelope is increasing in M), so the
    calibrated envelope touches the trace at its worst point.  M is capped so
    the envelope's domain still starts at the window's left edge; a trace
    that cannot be dominated within that cap raises.
    """
    if kind == "auto":
        kind = "simplified" if _away_from_linear(law) else "general"
    e0 = trace.e0
    beta_v = beta if isinstance(beta, (int, float)) else beta_floor(law, e0)
    if window is None:
        window = default_fit_window(trace.t)
    # the general envelope is expensive per point; calibrate on a subsample
    max_pts = 256 if kind == "general" else None
    ts, es = _window_samples(trace, window[0], max_points=max_pts)
    c0 = _c0(law)
    m_cap = float(ts[0]) * c0 / kappa

    def dominates(m: float) -> bool:
        env = DecayEnvelope(kind=kind, law=law, beta=beta_v, M=m, kappa=kappa)
        for tv, ev in zip(ts, es):
            if envelope_value(env, float(tv)) < ev:
                return False
        return True

    if not dominates(m_cap):
        raise HarnessError(
            "upper-envelope calibration failed: trace cannot be dominated "
            "with the envelope domain starting inside the window"
        )
    lo, hi = m_cap * 1e-8, m_cap
    if dominates(lo):
        hi = lo
    else:
        for _ in range(60):
            mid = math.sqrt(lo * hi)  # geometric: M spans orders of magnitude
            if dominates(mid):
                hi = mid
            else:
                lo = mid
            if hi / lo < 1.0 + 1e-6:
                break
    env = DecayEnvelope(kind=kind, law=law, beta=beta_v, M=hi, kappa=kappa)
    env.extras["t_calibration"] = float(ts[0])
    return env


def calibrate_lower(
    trace: EnergyTrace,
    law: FeedbackLaw,
    gamma_c: float | str = "calibrate",
    T0: float | str = "auto",
    T1: float = 0.0,
    window: tuple[float, float] | None = None,
) -> DecayEnvelope:
    """Largest lower envelope staying below the trace on the tail window.

    gamma_s comes from the initial first-order energy (4 sqrt(E1(0))); T0 is
    estimated as the first sample with E <= (r0^2/gamma_s)^2 (0 when the
    trace never gets there); the remaining constant is fixed so the envelope
    touches the windowed trace from below at its worst point.
    """
    e1_0 = float(trace.meta.get("e1_0", "nan"))
    gamma_s = 4.0 * math.sqrt(e1_0) if math.isfinite(e1_0) and e1_0 > 0.0 else 1.0
    if T0 == "auto":
        thresh = (law.r0**2 / gamma_s) ** 2
        hit = np.nonzero(trace.E <= thresh)[0]
        T0_v = float(trace.t[hit[0]]) if len(hit) else 0.0
    else:
        T0_v = float(T0)
    if window is None:
        window = default_fit_window(trace.t)
    c0 = _c0(law)
    t_min = max(window[0], T0_v + 1.000001 / c0)
    ts, es = _window_samples(trace, t_min)
    if isinstance(gamma_c, (int, float)):
        gc = float(gamma_c)
    else:
        # largest constant keeping the envelope at or below every sample
        gc = 0.0
        for tv, ev in zip(ts, es):
            x = hprime_inv(law, min(1.0 / (tv - T0_v), c0))
            gc = max(gc, x / math.sqrt(ev))
    env = DecayEnvelope(
        kind="lower",
        law=law,
        gamma_s=gamma_s,
        C_s=gc / gamma_s,
        T0=T0_v,
        T1=max(T1, float(ts[0]) - T0_v),
    )
    env.extras["t_calibration"] = float(ts[0])
    return env


# ---------------------------------------------------------------------------
# experiment driver


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trace: EnergyTrace
    summary: dict
    passed: bool
    trace_path: str = ""
    report_txt: str = ""
    report_kv: str = ""


def _atomic_write(path: str, content: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(content)
    os.replace(tmp, path)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def run_experiment(cfg: ExperimentConfig, write_files: bool = True) -> ExperimentResult:
    """Simulate, check the weighted inequality, fit the tail, compare envelopes.

    Produces <out>/<name>.trace.csv plus a plain-text report and a flat
    key=value report.  All outputs are deterministic functions of the config.
    """
    trace = run(cfg.sim, meta={"config_digest": cfg.digest, "name": cfg.name})
    law = cfg.law
    e0 = trace.e0
    summary: dict[str, object] = {
        "name": cfg.name,
        "config_digest": cfg.digest,
        "law": repr(law),
        "n": cfg.sim.n,
        "dt": float(trace.meta["dt"]),
        "backend": trace.meta["backend"],
        "e0": e0,
        "e1_0": float(trace.meta["e1_0"]),
        "geometry_1d": trace.meta["geometry_1d"],
        "early_stop": trace.meta["early_stop"],
    }
    checks: list[bool] = []

    damped = cfg.sim.a_field is not None and cfg.sim.a_field.floor > 0.0
    if not damped:
        drift = float(np.max(np.abs(trace.E - e0))) / e0 if e0 > 0.0 else 0.0
        ok = drift <= 1e-6
        summary["conservation_max_drift"] = drift
        summary["conservation_pass"] = ok
        summary["fit"] = "not attempted (undamped run)"
        checks.append(ok)
    else:
        inc = np.diff(trace.E)
        worst = float(np.max(inc)) if len(inc) else 0.0
        mono_ok = worst <= MONOTONE_STEP_TOL * max(e0, 1e-300)
        summary["monotone_max_increase"] = worst
        summary["monotone_pass"] = mono_ok
        checks.append(mono_ok)

        if e0 > 0.0:
            beta = beta_floor(law, e0)
            summary["beta"] = beta
            try:
                chk = check_integral_inequality(
                    trace, lambda y: optimal_weight(law, y, beta), mode="finite"
                )
                summary["M_optimal_weight"] = chk.M
                checks.append(math.isfinite(chk.M))
            except (TransformError, HarnessError) as exc:
                summary["M_optimal_weight"] = f"failed: {exc}"
                checks.append(False)
            if law.family == "power" and law.p > 1.0:
                chk = check_integral_inequality(
                    trace, lambda y: y ** (0.5 * (law.p - 1.0)), mode="finite"
                )
                summary["M_polynomial_weight"] = chk.M

            mode = cfg.fit.mode
            if mode == "auto":
                mode = {
                    "linear": "exp",
                    "power": "power",
                    "power_log": "power",
                    "exp_inv_square": "loglog",
                    "sub_exponential": "stretched",
                }[law.family]
            window = default_fit_window(trace.t, cfg.fit.window)
            try:
                fit = fit_tail_exponent(trace, window=window, mode=mode, stretch_p=max(law.p, 2.1))
                summary["fit_mode"] = mode
                summary["fit_window_lo"] = fit.window[0]
                summary["fit_window_hi"] = fit.window[1]
                summary["fit_slope"] = fit.slope
                summary["fit_stderr"] = fit.stderr
                summary["fit_r2"] = fit.r_squared
            except HarnessError as exc:
                summary["fit"] = f"failed: {exc}"

            # upper envelope
            try:
                upper = calibrate_upper(
                    trace,
                    law,
                    kind=cfg.envelope.kind,
                    beta=cfg.envelope.beta,
                    kappa=cfg.envelope.kappa,
                    window=window,
                )
                cmp_u = compare_to_envelope(trace, upper, t_start=upper.extras["t_calibration"])
                summary["upper_kind"] = upper.kind
                summary["upper_M"] = upper.M
                summary["upper_margin_min"] = cmp_u.envelope_margins[0]
                summary["upper_margin_max"] = cmp_u.envelope_margins[1]
                summary["upper_pass"] = cmp_u.passed
                checks.append(bool(cmp_u.passed))
            except (TransformError, HarnessError) as exc:
                summary["upper_envelope"] = f"skipped: {exc}"

            # lower envelope (needs smooth data for gamma_s and the screening)
            if cfg.sim.smooth and hfl_screen(law):
                try:
                    lower = calibrate_lower(
                        trace,
                        law,
                        gamma_c=cfg.envelope.gamma_c,
                        T0=cfg.envelope.T0,
                        T1=cfg.envelope.T1,
                        window=window,
                    )
                    cmp_l = compare_to_envelope(trace, lower)
                    summary["lower_T0"] = lower.T0
                    summary["lower_gamma_s"] = lower.gamma_s
                    summary["lower_C_s"] = lower.C_s
                    summary["lower_margin_min"] = cmp_l.envelope_margins[0]
                    summary["lower_margin_max"] = cmp_l.envelope_margins[1]
                    summary["lower_pass"] = cmp_l.passed
                    checks.append(bool(cmp_l.passed))
                except (TransformError, HarnessError) as exc:
                    summary["lower_envelope"] = f"skipped: {exc}"
            else:
                summary["lower_envelope"] = "skipped: rough data or law fails screening"

    passed = all(checks) if checks else True
    summary["passed"] = passed

    result = ExperimentResult(config=cfg, trace=trace, summary=summary, passed=passed)
    if write_files:
        os.makedirs(cfg.out_dir, exist_ok=True)
        base = os.path.join(cfg.out_dir, cfg.name)
        result.trace_path = base + ".trace.csv"
        tmp = result.trace_path + ".tmp"
        trace.to_csv(tmp)
        os.replace(tmp, result.trace_path)

        kv_lines = [f"{k}={_fmt(v)}" for k, v in summary.items()]
        result.report_kv = base + ".report.kv"
        _atomic_write(result.report_kv, "\n".join(kv_lines) + "\n")

        txt = ["experiment report", "=" * 18]
        for k, v in summary.items():
            txt.append(f"{k:24s} {_fmt(v)}")
        result.report_txt = base + ".report.txt"
        _atomic_write(result.report_txt, "\n".join(txt) + "\n")
    return result
