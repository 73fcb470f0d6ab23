"""Player strategies and the small-horizon brute-force minimax oracle.

The myopic player picks the arm with the larger revealed cumulative
reward difference xi_r (a maximum-likelihood guess of the safe arm) and
splits 1/2 - 1/2 on a tie. The brute-force search certifies, at tiny
horizons, that no strategy on a probability grid beats it by more than a
grid-resolution bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import check_gap, terminal_payoff


@dataclass(frozen=True)
class Decision:
    """Probability of choosing arm 1."""

    p1: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p1 <= 1.0:
            raise ValueError(f"p1 must lie in [0, 1], got {self.p1}")


def myopic_decision(xi_r: int) -> Decision:
    """Arm 1 iff xi_r > 0, arm 2 iff xi_r < 0, fair coin at xi_r = 0."""
    if xi_r > 0:
        return Decision(1.0)
    if xi_r < 0:
        return Decision(0.0)
    return Decision(0.5)


def likelihood_ratio(xi_r: int, eps: float) -> float:
    """Odds that arm 1 is safe given the revealed difference xi_r.

    ((1 + eps) / (1 - eps)) ** xi_r; > 1 exactly when xi_r > 0.
    """
    check_gap(eps)
    return ((1.0 + eps) / (1.0 - eps)) ** xi_r


class Strategy:
    """Interface: decisions depend on the observable pair (t, xi_r)."""

    def p1(self, t: int, xi_r: int) -> float:
        raise NotImplementedError

    def p1_batch(self, t: int, xi_r: np.ndarray) -> np.ndarray:
        return np.array([self.p1(t, int(x)) for x in xi_r], dtype=float)


class MyopicStrategy(Strategy):
    def p1(self, t: int, xi_r: int) -> float:
        return myopic_decision(xi_r).p1

    def p1_batch(self, t: int, xi_r: np.ndarray) -> np.ndarray:
        return np.where(xi_r > 0, 1.0, np.where(xi_r < 0, 0.0, 0.5))


class UniformStrategy(Strategy):
    """Baseline that ignores the history entirely."""

    def __init__(self, p: float = 0.5):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {p}")
        self.p = p

    def p1(self, t: int, xi_r: int) -> float:
        return self.p

    def p1_batch(self, t: int, xi_r: np.ndarray) -> np.ndarray:
        return np.full(xi_r.shape, self.p)


class TabularStrategy(Strategy):
    """Explicit (t, xi_r) -> p1 table, loadable from a plain-text file.

    File format: one `t xi_r p1` triple per line, '#' starts a comment.
    """

    def __init__(self, table: dict[tuple[int, int], float]):
        for (t, x), p in table.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p1 must lie in [0, 1], got {p} at ({t}, {x})")
        self.table = dict(table)

    def p1(self, t: int, xi_r: int) -> float:
        try:
            return self.table[(t, xi_r)]
        except KeyError:
            raise ValueError(f"strategy table has no entry for (t={t}, xi_r={xi_r})")

    @classmethod
    def from_text(cls, text: str) -> "TabularStrategy":
        table = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 't xi_r p1', got {line!r}")
            table[(int(parts[0]), int(parts[1]))] = float(parts[2])
        return cls(table)

    def to_text(self) -> str:
        lines = ["# t xi_r p1"]
        for (t, x), p in sorted(self.table.items()):
            lines.append(f"{t} {x} {p!r}")
        return "\n".join(lines) + "\n"


def minimax_pair_solve(
    a, b
) -> tuple[np.ndarray, np.ndarray, float]:
    """Solve min over x, y in [-1/2, 1/2]^d of max(<x,a>+<y,b>, -<x,b>-<y,a>).

    Case rule per coordinate: (x, y) = (-1/2, +1/2) if a_i > b_i, the
    antisymmetric pair x_i + y_i = 0 (we return zeros) if a_i = b_i, and
    (+1/2, -1/2) if a_i < b_i. Both max branches are equal at the optimum
    and the value is -(1/2) * sum |a_i - b_i|.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"a and b must be 1-d of equal length, got {a.shape} vs {b.shape}")
    x = np.where(a > b, -0.5, np.where(a < b, 0.5, 0.0))
    y = -x
    value = 0.5 * float(np.dot(x - y, a - b))
    return x, y, value


@dataclass(frozen=True)
class BruteForceCertificate:
    """Result of the exhaustive grid search over tabular strategies."""

    value: float                # min over the strategy grid of worst-case regret
    myopic_value: float         # worst-case regret of the myopic player
    achieved_by_myopic: bool    # myopic within `tolerance` of the grid minimum
    tolerance: float            # conservative grid-resolution (Lipschitz) bound
    n_decision_classes: int
    grid: int


def _decision_classes_xi_r(T: int) -> list[tuple[int, int]]:
    classes = []
    for t in range(-T, 0):
        k = T + t  # rounds elapsed when the decision is made
        for x in range(-k, k + 1, 2):
            classes.append((t, x))
    return classes


def _decision_classes_history(T: int) -> list[tuple]:
    """Observable histories: tuples of (choice, revealed reward) pairs."""
    classes: list[tuple] = []
    for rounds in range(T):
        for hist in itertools.product([(1, 1), (1, -1), (2, 1), (2, -1)], repeat=rounds):
            classes.append(hist)
    return classes


def _reward_outcomes(eps: float, safe_arm: int) -> list[tuple[int, int, float]]:
    p1 = (1.0 + eps) / 2.0 if safe_arm == 1 else (1.0 - eps) / 2.0
    p2 = (1.0 - eps) / 2.0 if safe_arm == 1 else (1.0 + eps) / 2.0
    return [
        (g1, g2, (p1 if g1 == 1 else 1.0 - p1) * (p2 if g2 == 1 else 1.0 - p2))
        for g1 in (1, -1)
        for g2 in (1, -1)
    ]


def tree_expected_regret(T: int, eps: float, strategy, safe_arm: int = 1) -> float:
    """Exact expected final regret by full outcome-tree enumeration.

    Exponential in T; independent desk oracle for the dynamic program and
    the Monte Carlo estimator at tiny horizons.
    """
    if T > 8:
        raise ValueError(f"outcome-tree enumeration is limited to T <= 8, got {T}")
    check_gap(eps)
    outcomes = _reward_outcomes(eps, safe_arm)

    def walk(t, eta, xi_h, xi_r, prob):
        if t == 0:
            return prob * terminal_payoff(eta, xi_h, xi_r)
        p1 = strategy.p1(t, xi_r)
        total = 0.0
        for g1, g2, pr in outcomes:
            if p1 > 0.0:
                total += walk(t + 1, eta + g1 + g2 - 2 * g1, xi_h - g2, xi_r + g1,
                              prob * pr * p1)
            if p1 < 1.0:
                total += walk(t + 1, eta + g1 + g2 - 2 * g2, xi_h + g1, xi_r - g2,
                              prob * pr * (1.0 - p1))
        return total

    return walk(-T, 0, 0, 0, 1.0)


def _grid_tree_values(T, eps, safe_arm, class_index, mesh, full_shape, observable):
    """Expected regret of every grid strategy at once, by outcome-tree walk.

    `mesh[k]` broadcasts the k-th decision probability along its own axis;
    partial factor products stay small until the leaf accumulation.
    """
    outcomes = _reward_outcomes(eps, safe_arm)
    acc = np.zeros(full_shape)

    def walk(t, eta, xi_h, xi_r, hist, prob, factor):
        nonlocal acc
        if t == 0:
            acc += (prob * terminal_payoff(eta, xi_h, xi_r)) * factor
            return
        key = (t, xi_r) if observable == "xi_r" else hist
        p1 = mesh[class_index[key]]
        for g1, g2, pr in outcomes:
            walk(t + 1, eta + g1 + g2 - 2 * g1, xi_h - g2, xi_r + g1,
                 hist + ((1, g1),), prob * pr, factor * p1)
            walk(t + 1, eta + g1 + g2 - 2 * g2, xi_h + g1, xi_r - g2,
                 hist + ((2, g2),), prob * pr, factor * (1.0 - p1))

    walk(-T, 0, 0, 0, (), 1.0, np.ones(()))
    return acc


def brute_force_minimax(
    T: int, eps: float, grid: int, observable: str = "xi_r"
) -> BruteForceCertificate:
    """Exhaustive minimax search over tabular strategies on a probability grid.

    Enumerates every strategy assigning one of `grid` evenly spaced
    probabilities to each observable decision class, evaluates its exact
    worst-case expected regret over the two safe-arm labels by outcome-tree
    enumeration, and reports whether the myopic player attains the grid
    minimum within one conservative Lipschitz bound (2 * classes / grid).
    """
    if T > 3:
        raise ValueError(f"brute force search is limited to T <= 3, got {T}")
    if grid < 2:
        raise ValueError(f"grid must have at least 2 levels, got {grid}")
    if observable not in ("xi_r", "history"):
        raise ValueError(f"observable must be 'xi_r' or 'history', got {observable!r}")
    check_gap(eps)

    if observable == "xi_r":
        classes = _decision_classes_xi_r(T)
    else:
        classes = _decision_classes_history(T)
    n = len(classes)
    if grid**n > 4e6:
        raise ValueError(
            f"strategy grid too large: {grid}^{n} points; lower `grid` or T"
        )
    class_index = {c: k for k, c in enumerate(classes)}
    levels = np.linspace(0.0, 1.0, grid)
    mesh = [
        levels.reshape((1,) * k + (grid,) + (1,) * (n - 1 - k)) for k in range(n)
    ]
    full_shape = (grid,) * n

    worst = None
    for safe_arm in (1, 2):
        ev = _grid_tree_values(T, eps, safe_arm, class_index, mesh, full_shape, observable)
        worst = ev if worst is None else np.maximum(worst, ev)
    value = float(worst.min())

    myopic = MyopicStrategy()
    myopic_value = max(
        tree_expected_regret(T, eps, myopic, safe_arm=1),
        tree_expected_regret(T, eps, myopic, safe_arm=2),
    )
    tolerance = 2.0 * n / grid
    achieved = myopic_value <= value + tolerance + 1e-12
    return BruteForceCertificate(
        value=value,
        myopic_value=myopic_value,
        achieved_by_myopic=achieved,
        tolerance=tolerance,
        n_decision_classes=n,
        grid=grid,
    )
