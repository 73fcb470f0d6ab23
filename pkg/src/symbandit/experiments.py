"""Monte Carlo estimation, convergence sweeps, scaling fits, figure data.

Reproducibility rule used everywhere: the master seed feeds
``numpy.random.SeedSequence(seed, spawn_key=(...))``; Monte Carlo chunk i
of replication r uses spawn_key (r, i). Results are assembled in fixed
chunk order, so output is bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dp, pde
from .core import check_gap
from .env import simulate_batch

ARTIFACT_VERSION = "0.1.0"

CONVERGENCE_COLUMNS = [
    "T", "eps", "gamma", "branch", "v", "vbar", "u", "ubar",
    "u_minus_v", "ubar_minus_vbar", "v_norm", "vbar_norm", "u_norm", "ubar_norm",
]
MC_COLUMNS = ["mc_regret_mean", "mc_regret_se", "mc_pseudo_mean", "mc_pseudo_se"]
FIGURE_COLUMNS = ["gamma", "c", "c_bar", "is_max_c", "is_max_c_bar"]
ERROR_SCALING_COLUMNS = ["T", "eps", "branch", "v", "u", "abs_diff", "predictor"]


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MCResult:
    regret_mean: float
    regret_se: float
    pseudo_mean: float
    pseudo_se: float
    episodes: int
    seed: int


def _mc_chunk(args) -> tuple[int, float, float, float, float]:
    strategy, T, eps, n, safe_arm, seed, spawn_key = args
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=spawn_key))
    mu, s2 = simulate_batch(T, eps, strategy, n, rng, safe_arm=safe_arm)
    pseudo = 2.0 * eps * s2
    return (n, float(mu.sum()), float((mu * mu).sum()),
            float(pseudo.sum()), float((pseudo * pseudo).sum()))


def mc_estimate(
    strategy,
    T: int,
    eps: float,
    episodes: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = 1 << 16,
    safe_arm: int = 1,
    replication: int = 0,
) -> MCResult:
    """Unbiased sample means of the final payoff and of 2*eps*s2.

    Deterministic in (seed, episodes, chunk_size, replication) no matter
    how many workers run the chunks.
    """
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}")
    check_gap(eps)
    n_chunks = (episodes + chunk_size - 1) // chunk_size
    jobs = [
        (strategy, T, eps,
         min(chunk_size, episodes - i * chunk_size), safe_arm, seed,
         (replication, i))
        for i in range(n_chunks)
    ]
    if workers > 1 and n_chunks > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_mc_chunk, jobs))
    else:
        parts = [_mc_chunk(j) for j in jobs]

    n = sum(p[0] for p in parts)
    s_mu = sum(p[1] for p in parts)
    s_mu2 = sum(p[2] for p in parts)
    s_ps = sum(p[3] for p in parts)
    s_ps2 = sum(p[4] for p in parts)
    mean_mu = s_mu / n
    mean_ps = s_ps / n

    def se(total, total_sq, mean):
        if n < 2:
            return float("nan")
        var = max(0.0, (total_sq - n * mean * mean) / (n - 1))
        return math.sqrt(var / n)

    return MCResult(
        regret_mean=mean_mu,
        regret_se=se(s_mu, s_mu2, mean_mu),
        pseudo_mean=mean_ps,
        pseudo_se=se(s_ps, s_ps2, mean_ps),
        episodes=n,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Sweep specification
# ---------------------------------------------------------------------------

@dataclass
class SweepSpec:
    """One sweep: horizons plus exactly one gap rule.

    * ``gamma``    -- eps = gamma / sqrt(T)   (medium regime)
    * ``power``    -- eps = T ** -power       (small / large regimes)
    * ``eps_list`` -- explicit grid, requires a single T (branch fits)
    """

    regime: str
    T_list: list[int]
    gamma: float | None = None
    power: float | None = None
    eps_list: list[float] | None = None
    branch: str = "C1"
    seed: int = 0
    replications: int = 0
    episodes: int = 0

    def __post_init__(self) -> None:
        if self.regime not in ("small", "medium", "large"):
            raise ValueError(f"regime must be small/medium/large, got {self.regime!r}")
        if self.branch not in ("C1", "C0"):
            raise ValueError(f"branch must be C1 or C0, got {self.branch!r}")
        if not self.T_list or sorted(self.T_list) != list(self.T_list):
            raise ValueError("T_list must be nonempty and ascending")
        rules = sum(x is not None for x in (self.gamma, self.power, self.eps_list))
        if rules != 1:
            raise ValueError("exactly one of gamma, power, eps_list must be set")
        if self.eps_list is not None and len(self.T_list) != 1:
            raise ValueError("eps_list mode requires a single horizon in T_list")
        for T, eps in self.cells():
            check_gap(eps)  # the rule must keep every cell feasible

    def cells(self) -> list[tuple[int, float]]:
        if self.gamma is not None:
            return [(T, self.gamma / math.sqrt(T)) for T in self.T_list]
        if self.power is not None:
            return [(T, T ** -self.power) for T in self.T_list]
        return [(self.T_list[0], e) for e in self.eps_list]


# ---------------------------------------------------------------------------
# Convergence sweep (exact DP vs closed form)
# ---------------------------------------------------------------------------

def convergence_sweep(spec: SweepSpec, strategy=None) -> list[dict]:
    """Rows of exact values v, vbar and closed forms u, ubar per cell.

    With spec.episodes > 0 and spec.replications > 0, appends Monte Carlo
    columns estimated with the myopic player (or `strategy`).
    """
    rows = []
    for idx, (T, eps) in enumerate(spec.cells()):
        sqT = math.sqrt(T)
        v = dp.regret_value(T, eps)
        vbar = dp.pseudoregret_value(T, eps)
        if eps > 0.0:
            cf = pde.ClosedForm.make(spec.branch, eps)
            u = pde.u_total(0.0, 0.0, 0.0, -float(T), cf)
            ubar = pde.bar_u_total(0.0, 0.0, -float(T), cf)
        else:
            # zero gap: the source vanishes and the smooth part is the
            # whole solution; pseudoregret is identically zero
            cf = pde.ClosedForm(eps=0.0, b=0.0)
            u = pde.u_h(0.0, 0.0, 0.0, -float(T), cf)
            ubar = 0.0
        row = {
            "T": T,
            "eps": eps,
            "gamma": eps * sqT,
            "branch": spec.branch,
            "v": v,
            "vbar": vbar,
            "u": u,
            "ubar": ubar,
            "u_minus_v": u - v,
            "ubar_minus_vbar": ubar - vbar,
            "v_norm": v / sqT,
            "vbar_norm": vbar / sqT,
            "u_norm": u / sqT,
            "ubar_norm": ubar / sqT,
        }
        if spec.episodes > 0 and spec.replications > 0:
            if strategy is None:
                from .strategy import MyopicStrategy

                strategy = MyopicStrategy()
            means_r, means_p = [], []
            for r in range(spec.replications):
                res = mc_estimate(strategy, T, eps, spec.episodes,
                                  seed=spec.seed, replication=1000 * idx + r)
                means_r.append(res.regret_mean)
                means_p.append(res.pseudo_mean)
            row["mc_regret_mean"] = float(np.mean(means_r))
            row["mc_pseudo_mean"] = float(np.mean(means_p))
            if spec.replications > 1:
                row["mc_regret_se"] = float(np.std(means_r, ddof=1) / math.sqrt(len(means_r)))
                row["mc_pseudo_se"] = float(np.std(means_p, ddof=1) / math.sqrt(len(means_p)))
            else:
                row["mc_regret_se"] = res.regret_se
                row["mc_pseudo_se"] = res.pseudo_se
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Error-scaling fits
# ---------------------------------------------------------------------------

@dataclass
class ScalingFit:
    """Least-squares line through log-log points, with dominance metadata."""

    points: list[tuple[float, float]]
    slope: float
    intercept: float
    r2: float
    x_axis: str
    branch: str
    predictor_power: int
    dominance_margin: float = field(default=float("nan"))


def _dominant_and_rest(T: int, eps: float, branch: str) -> tuple[float, float]:
    """Envelope terms with unit constants: dominant vs the lower-order sum."""
    if branch == "C1":
        return eps**2 * T, eps * math.log(T) + 1.0
    return eps**3 * T, eps**2 * math.sqrt(T) + eps * math.log(T) + 1.0


def error_scaling_fit(spec: SweepSpec) -> ScalingFit:
    """Fit log|u - v| against the varying scale of the sweep.

    Refuses to fit when the branch's dominant envelope term, evaluated
    with unit constants, does not exceed the remaining terms at the
    largest-gap cell (a fit there would measure the mixture, not the
    power).

    Fixed-T sweeps (eps_list) fit against log(eps); power-rule sweeps fit
    against log of the dominant predictor.
    """
    cells = spec.cells()
    dom, rest = _dominant_and_rest(*max(cells, key=lambda c: c[1]), spec.branch)
    if dom < rest:
        raise ValueError(
            "dominance precondition failed: "
            f"dominant envelope term {dom:.3g} < remaining terms {rest:.3g} "
            f"at the largest gap; slope fit would be meaningless"
        )
    power = 2 if spec.branch == "C1" else 3
    xs, ys = [], []
    for T, eps in cells:
        cf = pde.ClosedForm.make(spec.branch, eps)
        u = pde.u_total(0.0, 0.0, 0.0, -float(T), cf)
        v = dp.regret_value(T, eps)
        diff = abs(u - v)
        if diff == 0.0:
            diff = 5e-324  # log of true zero: clamp to the smallest subnormal
        if spec.eps_list is not None:
            xs.append(math.log(eps))
        else:
            xs.append(math.log(eps**power * T))
        ys.append(math.log(diff))
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = np.polyval([slope, intercept], xs)
    ss_res = float(np.sum((np.array(ys) - fitted) ** 2))
    ss_tot = float(np.sum((np.array(ys) - np.mean(ys)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    return ScalingFit(
        points=list(zip(xs, ys)),
        slope=float(slope),
        intercept=float(intercept),
        r2=r2,
        x_axis="log_eps" if spec.eps_list is not None else "log_predictor",
        branch=spec.branch,
        predictor_power=power,
        dominance_margin=dom / rest,
    )


def error_scaling_rows(spec: SweepSpec) -> list[dict]:
    """Per-cell |u - v| table backing the fit (CSV emission)."""
    power = 2 if spec.branch == "C1" else 3
    rows = []
    for T, eps in spec.cells():
        cf = pde.ClosedForm.make(spec.branch, eps)
        u = pde.u_total(0.0, 0.0, 0.0, -float(T), cf)
        v = dp.regret_value(T, eps)
        rows.append({
            "T": T, "eps": eps, "branch": spec.branch, "v": v, "u": u,
            "abs_diff": abs(u - v), "predictor": eps**power * T,
        })
    return rows


# ---------------------------------------------------------------------------
# Regime laws (direct ratio checks)
# ---------------------------------------------------------------------------

def small_gap_pseudoregret_ratio(T: int, power: float = 0.75) -> float:
    """vbar(0,0,-T) / (eps*T) with eps = T^-power; tends to 1."""
    eps = T ** -power
    return dp.pseudoregret_value(T, eps) / (eps * T)


def large_gap_regret_ratio(T: int, power: float = 0.3) -> float:
    """eps * v(0,0,-T) with eps = T^-power; tends to 1."""
    eps = T ** -power
    return eps * dp.regret_value(T, eps)


# ---------------------------------------------------------------------------
# Figure data
# ---------------------------------------------------------------------------

def figure_data(gamma_grid) -> list[dict]:
    """Rows (gamma, c, cbar) with the rows nearest each maximizer flagged."""
    grid = [float(g) for g in gamma_grid]
    if not grid:
        raise ValueError("gamma grid is empty")
    for g in grid:
        if not 0.0 < g <= 5.0:
            raise ValueError(f"gamma grid must lie in (0, 5], got {g}")
    gstar_c, _ = maximize_prefactor_cached("c")
    gstar_cb, _ = maximize_prefactor_cached("c_bar")
    i_c = min(range(len(grid)), key=lambda i: abs(grid[i] - gstar_c))
    i_cb = min(range(len(grid)), key=lambda i: abs(grid[i] - gstar_cb))
    return [
        {
            "gamma": g,
            "c": pde.prefactor_c(g),
            "c_bar": pde.prefactor_c_bar(g),
            "is_max_c": int(i == i_c),
            "is_max_c_bar": int(i == i_cb),
        }
        for i, g in enumerate(grid)
    ]


_MAXIMIZER_CACHE: dict[str, tuple[float, float]] = {}


def maximize_prefactor_cached(which: str) -> tuple[float, float]:
    if which not in _MAXIMIZER_CACHE:
        _MAXIMIZER_CACHE[which] = pde.maximize_prefactor(which)
    return _MAXIMIZER_CACHE[which]


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def write_csv(path, columns: list[str], rows: list[dict], meta: dict) -> None:
    """Versioned CSV: '# key=value' comment lines, then header, then rows.

    No timestamps, so identical configs reproduce identical bytes.
    """
    lines = [f"# symbandit_version={ARTIFACT_VERSION}"]
    for key in sorted(meta):
        lines.append(f"# {key}={meta[key]}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt_cell(row.get(col)) for col in columns))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_csv(path) -> tuple[dict, list[dict]]:
    """Inverse of write_csv: (meta, rows with string values)."""
    meta: dict[str, str] = {}
    rows: list[dict] = []
    header: list[str] | None = None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k] = v
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append(dict(zip(header, line.split(","))))
    return meta, rows
