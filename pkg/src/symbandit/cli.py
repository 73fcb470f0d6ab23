"""Command-line entry point.

Subcommands: dp, pde, prefactor, simulate, sweep, figure, verify.
Usage errors exit 2 (argparse); numeric precondition violations exit 1
with the violated condition named. Every output file embeds the artifact
version, the full run configuration, and the seed, so re-running the
printed config reproduces the file byte-for-byte.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import dp, experiments, pde
from .core import check_gap
from .env import play_episode
from .experiments import (
    ARTIFACT_VERSION,
    CONVERGENCE_COLUMNS,
    ERROR_SCALING_COLUMNS,
    FIGURE_COLUMNS,
    MC_COLUMNS,
    SweepSpec,
    write_csv,
)
from .strategy import (
    MyopicStrategy,
    TabularStrategy,
    UniformStrategy,
    brute_force_minimax,
    minimax_pair_solve,
)


@dataclass
class RunConfig:
    """Resolved run parameters; canonical string goes into output metadata."""

    subcommand: str
    params: dict = field(default_factory=dict)

    def meta(self) -> dict:
        canon = " ".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        out = {"config": f"{self.subcommand} {canon}".strip()}
        if "seed" in self.params:
            out["seed"] = str(self.params["seed"])
        return out


def _fmt(x: float, round3: bool) -> str:
    return f"{x:.3f}" if round3 else f"{x:.12g}"


def _resolve_eps(args, T: int) -> float:
    given = (args.eps is not None) + (args.gamma is not None)
    if given != 1:
        raise ValueError("exactly one of --eps or --gamma must be provided")
    eps = args.eps if args.eps is not None else args.gamma / math.sqrt(T)
    return check_gap(eps)


def _cmd_dp(args) -> int:
    T = args.T
    eps = _resolve_eps(args, T)
    v = dp.regret_value(T, eps, safe_arm=args.safe_arm)
    vbar = dp.pseudoregret_value(T, eps, safe_arm=args.safe_arm)
    print(f"v = {_fmt(v, args.round3)}")
    print(f"vbar = {_fmt(vbar, args.round3)}")
    if args.trace:
        rows = [
            {"t": t, "v": val, "vbar": vbar_val}
            for t, val, vbar_val in dp.value_trace(T, eps, safe_arm=args.safe_arm)
        ]
        cfg = RunConfig("dp", {"T": T, "eps": repr(eps), "safe_arm": args.safe_arm})
        write_csv(args.trace, ["t", "v", "vbar"], rows, cfg.meta())
        print(f"trace written to {args.trace}")
    return 0


def _cmd_pde(args) -> int:
    T = args.T
    eps = _resolve_eps(args, T)
    if eps <= 0.0:
        raise ValueError("closed-form branches need eps > 0; pass --eps or --gamma > 0")
    cf = pde.ClosedForm.make(args.branch, eps)
    t = -float(T)
    u_h = pde.u_h(args.eta, args.xi_h, args.xi_r, t, cf)
    phi = pde.phi_fn(args.xi_r, cf)
    phi_hat = pde.phi_hat(args.xi_r, t, cf)
    u = u_h + phi - phi_hat
    print(f"u = {_fmt(u, args.round3)}")
    print(f"u_h = {_fmt(u_h, args.round3)}")
    print(f"phi = {_fmt(phi, args.round3)}")
    print(f"phi_hat = {_fmt(phi_hat, args.round3)}")
    print(f"u_n = {_fmt(phi - phi_hat, args.round3)}")
    ubar = pde.bar_u_total(args.xi_r, args.s2, t, cf)
    print(f"ubar = {_fmt(ubar, args.round3)}")
    print(f"bar_phi = {_fmt(pde.bar_phi(args.xi_r, cf), args.round3)}")
    print(f"bar_phi_hat = {_fmt(pde.bar_phi_hat(args.xi_r, t, cf), args.round3)}")
    return 0


def _cmd_prefactor(args) -> int:
    if args.gamma is not None:
        f = pde.prefactor_c if args.which == "c" else pde.prefactor_c_bar
        print(f"{args.which}({_fmt(args.gamma, args.round3)}) = {_fmt(f(args.gamma), args.round3)}")
        return 0
    gstar, val = pde.maximize_prefactor(args.which)
    print(f"gamma_star = {_fmt(gstar, args.round3)}")
    print(f"{args.which}(gamma_star) = {_fmt(val, args.round3)}")
    return 0


def _make_strategy(name: str):
    if name == "myopic":
        return MyopicStrategy()
    if name == "uniform":
        return UniformStrategy()
    if name.startswith("table:"):
        with open(name[len("table:"):]) as fh:
            return TabularStrategy.from_text(fh.read())
    raise ValueError(f"unknown strategy {name!r}; use myopic, uniform or table:PATH")


def _cmd_simulate(args) -> int:
    T = args.T
    eps = _resolve_eps(args, T)
    strategy = _make_strategy(args.strategy)
    res = experiments.mc_estimate(
        strategy, T, eps, args.episodes, seed=args.seed,
        workers=args.workers, safe_arm=args.safe_arm,
    )
    if args.json:
        payload = {
            "version": ARTIFACT_VERSION,
            "config": RunConfig("simulate", {
                "T": T, "eps": repr(eps), "episodes": args.episodes,
                "seed": args.seed, "strategy": args.strategy,
                "safe_arm": args.safe_arm,
            }).meta()["config"],
            "seed": args.seed,
            "regret_mean": res.regret_mean,
            "regret_se": res.regret_se,
            "pseudo_mean": res.pseudo_mean,
            "pseudo_se": res.pseudo_se,
            "episodes": res.episodes,
        }
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"regret_mean = {_fmt(res.regret_mean, args.round3)} "
              f"(se {_fmt(res.regret_se, args.round3)})")
        print(f"pseudo_mean = {_fmt(res.pseudo_mean, args.round3)} "
              f"(se {_fmt(res.pseudo_se, args.round3)})")
    if args.audit:
        with open(args.audit, "w") as fh:
            for i in range(args.audit_episodes):
                ss = np.random.SeedSequence(args.seed, spawn_key=(9999, i))
                log = play_episode(T, eps, strategy, ss, safe_arm=args.safe_arm)
                log.seed = args.seed
                fh.write(log.to_line() + "\n")
        print(f"audit log written to {args.audit}")
    return 0


def _parse_sweep_config(path: str) -> SweepSpec:
    """Key = value file -> SweepSpec; '#' starts a comment."""
    raw: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            k, v = body.split("=", 1)
            raw[k.strip()] = v.strip()
    def ints(s):
        return [int(x) for x in s.split(",") if x.strip()]
    def floats(s):
        return [float(x) for x in s.split(",") if x.strip()]
    kwargs = {}
    if "regime" in raw:
        kwargs["regime"] = raw["regime"]
    if "T_list" in raw:
        kwargs["T_list"] = ints(raw["T_list"])
    for key in ("gamma", "power"):
        if key in raw:
            kwargs[key] = float(raw[key])
    if "eps_list" in raw:
        kwargs["eps_list"] = floats(raw["eps_list"])
    if "branch" in raw:
        kwargs["branch"] = raw["branch"]
    for key in ("seed", "replications", "episodes"):
        if key in raw:
            kwargs[key] = int(raw[key])
    missing = {"regime", "T_list"} - set(kwargs)
    if missing:
        raise ValueError(f"sweep config is missing keys: {sorted(missing)}")
    return SweepSpec(**kwargs)


def _spec_params(spec: SweepSpec) -> dict:
    return {
        "regime": spec.regime,
        "T_list": ",".join(map(str, spec.T_list)),
        "gamma": spec.gamma,
        "power": spec.power,
        "eps_list": None if spec.eps_list is None else ",".join(map(repr, spec.eps_list)),
        "branch": spec.branch,
        "seed": spec.seed,
        "replications": spec.replications,
        "episodes": spec.episodes,
    }


def _cmd_sweep(args) -> int:
    spec = _parse_sweep_config(args.config)
    cfg = RunConfig(f"sweep:{args.kind}", _spec_params(spec))
    if args.kind == "convergence":
        rows = experiments.convergence_sweep(spec)
        cols = list(CONVERGENCE_COLUMNS)
        if rows and "mc_regret_mean" in rows[0]:
            cols += MC_COLUMNS
        write_csv(args.out, cols, rows, cfg.meta())
    else:
        fit = experiments.error_scaling_fit(spec)
        rows = experiments.error_scaling_rows(spec)
        meta = cfg.meta()
        meta["fit_slope"] = repr(fit.slope)
        meta["fit_intercept"] = repr(fit.intercept)
        meta["fit_r2"] = repr(fit.r2)
        meta["fit_x_axis"] = fit.x_axis
        write_csv(args.out, ERROR_SCALING_COLUMNS, rows, meta)
        print(f"slope = {fit.slope:.6g} (x axis: {fit.x_axis}, r2 = {fit.r2:.6g})")
    print(f"{len(rows)} rows written to {args.out}")
    return 0


def _parse_grid(text: str) -> list[float]:
    try:
        a, b, s = (float(x) for x in text.split(":"))
    except Exception:
        raise ValueError(f"grid must be start:stop:step, got {text!r}")
    if s <= 0 or b < a:
        raise ValueError(f"grid must satisfy start <= stop, step > 0, got {text!r}")
    n = int(round((b - a) / s)) + 1
    return [round(a + i * s, 12) for i in range(n) if a + i * s <= b + 1e-12]


def _cmd_figure(args) -> int:
    grid = _parse_grid(args.grid)
    rows = experiments.figure_data(grid)
    cfg = RunConfig("figure", {"grid": args.grid})
    write_csv(args.out, FIGURE_COLUMNS, rows, cfg.meta())
    print(f"{len(rows)} rows written to {args.out}")
    return 0


def _verify_checks():
    """(name, ok, detail) triples for the invariant suite."""
    checks = []

    def add(name, ok, detail=""):
        checks.append((name, bool(ok), detail))

    for eps in (0.0, 0.3, 0.7):
        v1 = dp.regret_value(1, eps)
        add(f"one-round regret eps={eps}", abs(v1 - (1 + eps * eps) / 2) < 1e-14,
            f"v={v1!r}")
    vb = dp.pseudoregret_value(1, 0.4)
    add("one-round pseudoregret eps=0.4", abs(vb - 0.4) < 1e-14, f"vbar={vb!r}")

    for T in (4, 8):
        for eps in (0.0, 0.3, 0.7):
            d = abs(dp.regret_value(T, eps) - dp.regret_value_full(T, eps))
            add(f"reduced==full T={T} eps={eps}", d <= 1e-12, f"|diff|={d:.2e}")

    d = abs(dp.regret_value(10, 0.25, safe_arm=1) - dp.regret_value(10, 0.25, safe_arm=2))
    add("indifference under safe-arm swap", d <= 1e-12, f"|diff|={d:.2e}")
    d = abs(dp.bayesian_pseudoregret_check(12, 0.2) - dp.pseudoregret_value(12, 0.2))
    add("uniform-prior pseudoregret equals minimax", d <= 1e-12, f"|diff|={d:.2e}")

    for T in (1, 2):
        cert = brute_force_minimax(T, 0.3, grid=51)
        add(f"brute-force certificate T={T}",
            cert.achieved_by_myopic,
            f"grid min {cert.value:.6f}, myopic {cert.myopic_value:.6f}, "
            f"tol {cert.tolerance:.4f}")

    rng = np.random.default_rng(7)
    ok = True
    for _ in range(20):
        a = rng.random(4)
        b = rng.random(4)
        x, y, _ = minimax_pair_solve(a, b)
        lhs = float(np.dot(x, a) + np.dot(y, b))
        rhs = float(-np.dot(x, b) - np.dot(y, a))
        ok = ok and abs(lhs - rhs) <= 1e-12
    add("minimax pair: objective branches equal at optimum", ok)

    for eps in (0.1, 0.3):
        cf1 = pde.ClosedForm.c1(eps)
        jump1 = pde.phi_deriv(0.0, cf1, 1, +1) - pde.phi_deriv(0.0, cf1, 1, -1)
        add(f"C1 slope jump vanishes eps={eps}", abs(jump1) <= 1e-12, f"jump={jump1:.2e}")
        cf0 = pde.ClosedForm.c0(eps)
        combo = (0.5 * (pde.phi_deriv(0.0, cf0, 1, +1) - pde.phi_deriv(0.0, cf0, 1, -1))
                 + 0.25 * eps * (pde.phi_deriv(0.0, cf0, 2, +1)
                                 - pde.phi_deriv(0.0, cf0, 2, -1)))
        add(f"C0 jump combination vanishes eps={eps}", abs(combo) <= 1e-13,
            f"combo={combo:.2e}")

    cf = pde.ClosedForm.c1(0.2)
    ok = True
    for x in (-3.0, -0.5, 0.7, 4.0):
        lhs = cf.eps * pde.phi_deriv(x, cf, 1) + 0.5 * pde.phi_deriv(x, cf, 2)
        ok = ok and abs(lhs - pde.regret_source(x, cf)) <= 1e-13
    add("steady layer solves its ODE on both sides", ok)

    r = abs(pde.pde_residual(0.0, 0.5, 2.0, -3.0, pde.ClosedForm.c1(0.1), h=1e-3))
    add("regret equation residual at smooth point", r <= 1e-5, f"|res|={r:.2e}")
    rb = abs(pde.bar_pde_residual(-2.0, 3.0, -5.0, pde.ClosedForm.c1(0.2), h=1e-3))
    add("pseudoregret equation residual at smooth point", rb <= 1e-5, f"|res|={rb:.2e}")

    c_small = pde.prefactor_c(1e-6)
    add("small-gap limit of c", abs(c_small - pde.SMALL_GAP_LIMIT_C) <= 1e-5,
        f"c(1e-6)={c_small!r}")
    add("large-gap limit of gamma*c", abs(50 * pde.prefactor_c(50.0) - 1) <= 1e-6)
    add("large-gap limit of gamma*cbar", abs(50 * pde.prefactor_c_bar(50.0) - 1) <= 1e-6)
    return checks


def _cmd_verify(args) -> int:
    failures = 0
    for name, ok, detail in _verify_checks():
        tag = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        print(f"{tag} {name}{suffix}")
        if not ok:
            failures += 1
    print(f"{failures} failures")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symbandit",
                                description="Symmetric two-armed Bernoulli bandit: "
                                            "exact values, closed forms, experiments")
    sub = p.add_subparsers(dest="cmd", required=True)

    def add_common(sp, gamma_first=True):
        sp.add_argument("--T", type=int, required=True, help="horizon (rounds)")
        sp.add_argument("--gamma", type=float, default=None,
                        help="gap scale; eps = gamma / sqrt(T)")
        sp.add_argument("--eps", type=float, default=None, help="gap parameter in [0, 1)")
        sp.add_argument("--round3", action="store_true", help="print values rounded to 3 decimals")

    sp = sub.add_parser("dp", help="exact values v, vbar at the origin")
    add_common(sp)
    sp.add_argument("--safe-arm", type=int, default=1, choices=(1, 2))
    sp.add_argument("--trace", default=None, help="write (t, v, vbar) CSV here")
    sp.set_defaults(func=_cmd_dp)

    sp = sub.add_parser("pde", help="closed forms u, ubar and components")
    add_common(sp)
    sp.add_argument("--branch", default="C1", choices=("C1", "C0"))
    sp.add_argument("--eta", type=float, default=0.0)
    sp.add_argument("--xi-h", dest="xi_h", type=float, default=0.0)
    sp.add_argument("--xi-r", dest="xi_r", type=float, default=0.0)
    sp.add_argument("--s2", type=float, default=0.0)
    sp.set_defaults(func=_cmd_pde)

    sp = sub.add_parser("prefactor", help="prefactors c, cbar and their maximizers")
    sp.add_argument("--which", required=True, choices=("c", "c_bar"))
    sp.add_argument("--gamma", type=float, default=None,
                    help="evaluate at gamma instead of maximizing")
    sp.add_argument("--round3", action="store_true")
    sp.set_defaults(func=_cmd_prefactor)

    sp = sub.add_parser("simulate", help="Monte Carlo estimate of regret/pseudoregret")
    add_common(sp)
    sp.add_argument("--episodes", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--strategy", default="myopic",
                    help="myopic | uniform | table:PATH")
    sp.add_argument("--safe-arm", type=int, default=1, choices=(1, 2))
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--audit", default=None, help="write per-episode logs here")
    sp.add_argument("--audit-episodes", type=int, default=10)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("sweep", help="run a sweep from a key=value config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--kind", default="convergence",
                    choices=("convergence", "error-scaling"))
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("figure", help="prefactor curves over a gamma grid")
    sp.add_argument("--grid", required=True, help="start:stop:step")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_figure)

    sp = sub.add_parser("verify", help="brute-force certificates and invariant suite")
    sp.set_defaults(func=_cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse signals usage errors with code 2
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
