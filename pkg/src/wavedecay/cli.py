"""Command-line interface.

Subcommands:
  calc       feedback calculus table and envelope values (tab-separated)
  simulate   config -> trace CSV (optionally the full experiment pipeline)
  fit        trace CSV -> tail-exponent report
  compare    'trace': trace vs calibrated envelope; 'ode': comparison-ODE CSV
  suite      synthetic decay-bound suite plus quick invariant batteries
  sweep      run every config in a directory through the full pipeline
  bench      time the numba kernel against the numpy fallback

Exit codes: 0 on pass, 1 on any failed assertion, 2 on config errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import _kernels
from .config import ConfigError, load_config
from .feedback import eval_H, eval_H_prime, lambda_H, make_feedback
from .harness import (
    HarnessError,
    calibrate_lower,
    calibrate_upper,
    compare_to_envelope,
    default_fit_window,
    fit_tail_exponent,
    lemma_suite,
    run_experiment,
)
from .numutil import log_midpoints
from .odecmp import ComparisonError, K_inverse, hfl_screen, solve_comparison
from .sim import EnergyTrace, SimConfig, SimError, init_state, run
from .transforms import DecayEnvelope, TransformError, envelope_value, eval_L

PASS, FAIL, CONFIG_ERR = 0, 1, 2


def _parse_grid(text: str, default_lo: float, default_hi: float, default_n: int = 50):
    if not text:
        return log_midpoints(default_lo, default_hi, default_n)
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be LO:HI:N, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if not (0.0 < lo < hi) or n < 2:
        raise ConfigError("grid needs 0 < LO < HI and N >= 2")
    return log_midpoints(lo, hi, n)


def _cmd_calc(args) -> int:
    cfg = load_config(args.config)
    law = cfg.law
    if args.calculus:
        print("x\tH\tH_prime\tlambda")
        for tok in args.calculus.split(","):
            x = float(tok)
            lam = lambda_H(law, x) if x > 0.0 else math.nan
            print(f"{x:.12g}\t{eval_H(law, x):.12g}\t{eval_H_prime(law, x):.12g}\t{lam:.12g}")
        if not args.grid and not args.trace:
            return PASS

    kind = args.kind or (cfg.envelope.kind if cfg.envelope.kind != "auto" else "simplified")
    if args.trace:
        trace = EnergyTrace.from_csv(args.trace)
        if kind == "lower":
            env = calibrate_lower(trace, law, gamma_c=cfg.envelope.gamma_c, T0=cfg.envelope.T0)
        else:
            env = calibrate_upper(trace, law, kind=kind, beta=cfg.envelope.beta, kappa=cfg.envelope.kappa)
    else:
        beta = cfg.envelope.beta if isinstance(cfg.envelope.beta, float) else 1.0
        M = cfg.envelope.M if isinstance(cfg.envelope.M, float) else 1.0
        env = DecayEnvelope(kind=kind, law=law, beta=beta, M=M, kappa=cfg.envelope.kappa)
    lo = env.domain_start()
    ts = _parse_grid(args.grid, max(lo, 1e-6), max(lo, 1e-6) * 1e4)
    print("t\tenvelope")
    for t in ts:
        if t < lo * (1.0 - 1e-12):
            continue
        print(f"{t:.12g}\t{envelope_value(env, t):.12g}")
    return PASS


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg.out_dir = args.out
    if args.full:
        result = run_experiment(cfg)
        print(f"trace:  {result.trace_path}")
        print(f"report: {result.report_txt}")
        return PASS if result.passed else FAIL
    trace = run(cfg.sim, meta={"config_digest": cfg.digest, "name": cfg.name})
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, cfg.name + ".trace.csv")
    tmp = path + ".tmp"
    trace.to_csv(tmp)
    os.replace(tmp, path)
    print(path)
    return PASS


def _cmd_fit(args) -> int:
    trace = EnergyTrace.from_csv(args.trace)
    fracs = tuple(float(x) for x in args.window_frac.split(","))
    window = default_fit_window(trace.t, fracs)  # type: ignore[arg-type]
    rep = fit_tail_exponent(trace, window=window, mode=args.mode, stretch_p=args.stretch_p)
    lines = [
        f"mode={rep.mode}",
        f"window_lo={rep.window[0]:.12g}",
        f"window_hi={rep.window[1]:.12g}",
        f"slope={rep.slope:.12g}",
        f"stderr={rep.stderr:.12g}",
        f"r_squared={rep.r_squared:.12g}",
        f"n_points={rep.n_points}",
    ]
    out = "\n".join(lines)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    print(out)
    return PASS


def _cmd_compare_trace(args) -> int:
    cfg = load_config(args.config)
    trace = EnergyTrace.from_csv(args.trace)
    fracs = tuple(float(x) for x in args.window_frac.split(","))
    window = default_fit_window(trace.t, fracs)  # type: ignore[arg-type]
    code = PASS
    upper = calibrate_upper(
        trace, cfg.law, kind=cfg.envelope.kind, beta=cfg.envelope.beta,
        kappa=cfg.envelope.kappa, window=window,
    )
    rep_u = compare_to_envelope(trace, upper, t_start=upper.extras["t_calibration"])
    print(f"upper_kind={upper.kind}")
    print(f"upper_margin_min={rep_u.envelope_margins[0]:.12g}")
    print(f"upper_margin_max={rep_u.envelope_margins[1]:.12g}")
    print(f"upper_pass={rep_u.passed}")
    if not rep_u.passed:
        code = FAIL
    if hfl_screen(cfg.law):
        lower = calibrate_lower(
            trace, cfg.law, gamma_c=cfg.envelope.gamma_c, T0=cfg.envelope.T0,
            T1=cfg.envelope.T1, window=window,
        )
        rep_l = compare_to_envelope(trace, lower)
        print(f"lower_margin_min={rep_l.envelope_margins[0]:.12g}")
        print(f"lower_margin_max={rep_l.envelope_margins[1]:.12g}")
        print(f"lower_pass={rep_l.passed}")
        if not rep_l.passed:
            code = FAIL
    else:
        print("lower_envelope=skipped (law fails growth screening)")
    return code


def _cmd_compare_ode(args) -> int:
    cfg = load_config(args.config)
    law = cfg.law
    kappa = args.kappa if args.kappa is not None else (
        cfg.sim.a_field.cap if cfg.sim.a_field is not None else 1.0
    )
    z0 = args.z0 if args.z0 is not None else law.r0**2
    hi_default = 100.0
    ts = _parse_grid(args.grid, 1e-2, hi_default)
    sol = solve_comparison(law, kappa, z0, horizon=max(ts) * 1.0000001)
    env = DecayEnvelope(kind="lower", law=law, gamma_s=1.0, C_s=1.0, T0=0.0, T1=0.0)
    lo_env = env.domain_start()
    print("t,z,K_inverse,lower_envelope")
    for t in ts:
        z = sol.z_at(t)
        kinv = K_inverse(law, kappa * t, z0) if t > 0.0 else z0
        le = envelope_value(env, t) if t >= lo_env else math.nan
        print(f"{t:.12g},{z:.12g},{kinv:.12g},{le:.12g}")
    return PASS


def _cmd_suite(args) -> int:
    ok = True
    rep = lemma_suite()
    for e in rep.entries:
        print(f"[{'PASS' if e.passed else 'FAIL'}] {e.name}: {e.detail}")
    ok &= rep.passed

    # quick invariant batteries
    law = make_feedback("power", p=3.0, r0=1.0)
    ls = [abs(eval_L(law, 1.0) - 0.25), abs(eval_L(law, 2.0) - 0.5)]
    ok_l = max(ls) < 1e-9
    print(f"[{'PASS' if ok_l else 'FAIL'}] conjugate_closed_forms: max dev {max(ls):.2e}")
    ok &= ok_l

    xs = np.linspace(0.0, 1.0, 50)
    ys = np.linspace(0.0, 4.0, 50)
    worst = 0.0
    from .transforms import conjugate

    for y in ys:
        cy = conjugate(law, float(y))
        worst = min(worst, float(np.min(cy - (xs * y - xs**2))))
    ok_f = worst >= -1e-10
    print(f"[{'PASS' if ok_f else 'FAIL'}] fenchel_inequality: min slack {worst:.2e}")
    ok &= ok_f

    smallcfg = SimConfig(
        law=law, alpha_field=None, a_field=None, n=63, cfl=0.9, t_final=1.0, stride=50,
        u0="sine:1:1.0", u1="zero", v0="zero", v1="zero",
    )
    tr = run(smallcfg)
    drift = float(np.max(np.abs(tr.E - tr.e0)) / tr.e0)
    ok_c = drift < 1e-11
    print(f"[{'PASS' if ok_c else 'FAIL'}] micro_conservation: drift {drift:.2e}")
    ok &= ok_c

    sol = solve_comparison(law, 1.0, 1.0, horizon=100.0)
    dev = float(np.max(np.abs(sol.z - 1.0 / (1.0 + sol.t))))
    ok_z = dev < 1e-8
    print(f"[{'PASS' if ok_z else 'FAIL'}] comparison_ode_analytic: max dev {dev:.2e}")
    ok &= ok_z

    print("suite:", "PASS" if ok else "FAIL")
    return PASS if ok else FAIL


def _sweep_one(path: str, out: str | None) -> tuple[str, bool, str]:
    cfg = load_config(path)
    if out:
        cfg.out_dir = out
    result = run_experiment(cfg)
    return path, result.passed, result.report_txt


def _cmd_sweep(args) -> int:
    paths = sorted(
        os.path.join(args.configs, f)
        for f in os.listdir(args.configs)
        if f.endswith(".ini")
    )
    if not paths:
        print(f"no .ini configs found in {args.configs}", file=sys.stderr)
        return CONFIG_ERR
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, paths, [args.out] * len(paths)))
    else:
        results = [_sweep_one(p, args.out) for p in paths]
    code = PASS
    for path, passed, report in results:
        print(f"[{'PASS' if passed else 'FAIL'}] {path} -> {report}")
        if not passed:
            code = FAIL
    return code


def _cmd_bench(args) -> int:
    law = make_feedback("power", p=3.0, r0=1.0)
    from .feedback import CoefficientField

    cfg = SimConfig(
        law=law,
        alpha_field=CoefficientField("indicator", (0.4, 0.9), 0.2),
        a_field=CoefficientField("indicator", (0.2, 0.6), 1.0),
        n=args.n,
        cfl=0.9,
        t_final=1e9,  # not used; we advance manually
    )
    results = {}
    for name, kernel in (("numba", _kernels.advance_numba), ("numpy", _kernels.advance_numpy)):
        if kernel is None:
            print(f"{name:6s}  unavailable")
            continue
        state = init_state(cfg)
        lawt = (law.code, law.p, law.q, law.s_sat, law.g_sat)
        # warm-up covers jit compilation
        kernel(state.u_prev, state.u_curr, state.v_prev, state.v_curr,
               state.alpha, state.a, state.dt, state.dx, 10, *lawt, 1e-13, 200)
        t0 = time.perf_counter()
        kernel(state.u_prev, state.u_curr, state.v_prev, state.v_curr,
               state.alpha, state.a, state.dt, state.dx, args.steps, *lawt, 1e-13, 200)
        dt = time.perf_counter() - t0
        results[name] = dt
        print(f"{name:6s}  {args.steps} steps, n={args.n}: {dt:.3f} s "
              f"({1e6 * dt / args.steps:.1f} us/step)")
    if len(results) == 2:
        print(f"speedup numba vs numpy: {results['numpy'] / results['numba']:.1f}x")
    print(f"active backend: {_kernels.active_backend()}")
    return PASS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavedecay")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calc", help="calculus table and envelope values")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", default="", help="time grid LO:HI:N (log-spaced)")
    p.add_argument("--kind", choices=("general", "simplified", "lower"), default=None)
    p.add_argument("--trace", default=None, help="trace CSV used to calibrate the envelope")
    p.add_argument("--calculus", default="", help="comma-separated x values to tabulate H, H', lambda")
    p.set_defaults(func=_cmd_calc)

    p = sub.add_parser("simulate", help="run the solver and write the trace CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--full", action="store_true", help="also run fits/envelopes and write reports")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="fit a tail exponent to a trace CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--mode", choices=("power", "loglog", "stretched", "exp"), default="power")
    p.add_argument("--stretch-p", type=float, default=3.0)
    p.add_argument("--window-frac", default="0.6667,1.0")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("compare", help="trace-vs-envelope report, or comparison-ODE CSV")
    csub = p.add_subparsers(dest="what", required=True)
    pt = csub.add_parser("trace")
    pt.add_argument("--trace", required=True)
    pt.add_argument("--config", required=True)
    pt.add_argument("--window-frac", default="0.6667,1.0")
    pt.set_defaults(func=_cmd_compare_trace)
    po = csub.add_parser("ode")
    po.add_argument("--config", required=True)
    po.add_argument("--grid", default="")
    po.add_argument("--kappa", type=float, default=None)
    po.add_argument("--z0", type=float, default=None)
    po.set_defaults(func=_cmd_compare_ode)

    p = sub.add_parser("suite", help="synthetic decay-bound suite and invariant batteries")
    p.set_defaults(func=_cmd_suite)

    p = sub.add_parser("sweep", help="run every config in a directory")
    p.add_argument("--configs", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1, help="parallel workers (experiments are independent)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bench", help="time the numba kernel against the numpy fallback")
    p.add_argument("--n", type=int, default=399)
    p.add_argument("--steps", type=int, default=20000)
    p.set_defaults(func=_cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_ERR
    except (SimError, TransformError, HarnessError, ComparisonError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
