"""Exact backward induction for the myopic player's value functions.

Three routes compute the same regret value at three scales, and the
cheaper ones are proven against the dearer ones in the tests:

* ``regret_value_full``  -- the raw (eta, xi_h, xi_r) lattice, T <= 12.
  Transparent oracle, dict-based.
* ``regret_value_reduced`` -- the (xi_r, zeta = xi_r + xi_h) lattice with
  the eta drift accumulated as a scalar source, T <= 512.
* ``regret_value`` -- production route, O(T^2) work and O(T) memory.

The production route rests on two exact facts. First, the terminal
payoff is (eta + |zeta|)/2 and eta enters all values linearly, so the
value at the origin splits into E[|zeta_0|]/2 plus the accumulated
E[d eta]/2 source. Second, the joint law of the per-round increments
(d xi_r, d zeta) is the same whichever arm is chosen (the revealed
difference moves up with probability (1 + eps)/2 either way), so each
piece is an expectation over a one-dimensional uncontrolled random walk:

* zeta/2 walks with steps +1, 0, -1 w.p. (1+eps)^2/4, (1-eps^2)/2,
  (1-eps)^2/4 and terminal score |zeta/2|;
* xi_r walks with steps +-1 (up w.p. (1+eps)/2) and per-round source
  -eps*sign(xi_r) (the eta drift of the myopic choice), the two choice
  branches averaging exactly to zero at xi_r = 0.

Pseudoregret reduces the same way: the value is linear in s2 with slope
2*eps, leaving a single xi_r walk with source 2*eps*P(pull risky arm).
Both reductions flip sign with the safe-arm label, which makes the
indifference check under label swap a real two-route test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import check_gap, terminal_payoff

FULL_TABLE_MAX_T = 12
REDUCED_2D_MAX_T = 512


@dataclass
class ValueTable:
    """One time slice of a value function over a tagged state reduction."""

    t: int
    values: dict
    reduction: str  # "full" (eta, xi_h, xi_r) | "reduced" (xi_r, zeta) | "pseudo" (xi_r, s2)


def _validate(T: int, eps: float, safe_arm: int) -> None:
    if not isinstance(T, (int, np.integer)) or T < 1:
        raise ValueError(f"horizon must be a positive integer, got {T}")
    check_gap(eps)
    if safe_arm not in (1, 2):
        raise ValueError(f"safe_arm must be 1 or 2, got {safe_arm}")


def _reward_probs(eps: float, safe_arm: int) -> list[tuple[int, int, float]]:
    p1 = (1.0 + eps) / 2.0 if safe_arm == 1 else (1.0 - eps) / 2.0
    p2 = (1.0 - eps) / 2.0 if safe_arm == 1 else (1.0 + eps) / 2.0
    return [
        (g1, g2, (p1 if g1 == 1 else 1.0 - p1) * (p2 if g2 == 1 else 1.0 - p2))
        for g1 in (1, -1)
        for g2 in (1, -1)
    ]


# ---------------------------------------------------------------------------
# Full-state oracles (desk scale)
# ---------------------------------------------------------------------------

def regret_tables_full(T: int, eps: float, safe_arm: int = 1) -> list[ValueTable]:
    """All slices of the raw-lattice regret recursion, terminal first.

    Reachable states only; the recursion is exact on the finite lattice.
    """
    _validate(T, eps, safe_arm)
    if T > FULL_TABLE_MAX_T:
        raise ValueError(f"full-state table is limited to T <= {FULL_TABLE_MAX_T}, got {T}")
    outcomes = _reward_probs(eps, safe_arm)

    def successors(state):
        eta, xi_h, xi_r = state
        for g1, g2, pr in outcomes:
            one = (eta + g1 + g2 - 2 * g1, xi_h - g2, xi_r + g1)
            two = (eta + g1 + g2 - 2 * g2, xi_h + g1, xi_r - g2)
            if xi_r > 0:
                yield one, pr
            elif xi_r < 0:
                yield two, pr
            else:
                yield one, 0.5 * pr
                yield two, 0.5 * pr

    layers = [{(0, 0, 0)}]
    for _ in range(T):
        nxt = set()
        for state in layers[-1]:
            for succ, _ in successors(state):
                nxt.add(succ)
        layers.append(nxt)

    tables = [ValueTable(t=0, values={s: terminal_payoff(*s) for s in layers[T]},
                         reduction="full")]
    for back in range(1, T + 1):
        prev = tables[-1].values
        vals = {}
        for state in layers[T - back]:
            vals[state] = sum(pr * prev[succ] for succ, pr in successors(state))
        tables.append(ValueTable(t=-back, values=vals, reduction="full"))
    return tables


def regret_value_full(T: int, eps: float, safe_arm: int = 1) -> float:
    """v(0, 0, -T) on the raw (eta, xi_h, xi_r) lattice; oracle scale."""
    return regret_tables_full(T, eps, safe_arm)[-1].values[(0, 0, 0)]


def pseudoregret_tables_full(T: int, eps: float, safe_arm: int = 1) -> list[ValueTable]:
    """All slices of the unreduced (xi_r, s2) pseudoregret recursion."""
    _validate(T, eps, safe_arm)
    if T > FULL_TABLE_MAX_T:
        raise ValueError(f"full-state table is limited to T <= {FULL_TABLE_MAX_T}, got {T}")
    outcomes = _reward_probs(eps, safe_arm)
    risky_choice = 2 if safe_arm == 1 else 1

    def successors(state):
        xi_r, s2 = state
        for g1, g2, pr in outcomes:
            one = (xi_r + g1, s2 + (1 if risky_choice == 1 else 0))
            two = (xi_r - g2, s2 + (1 if risky_choice == 2 else 0))
            if xi_r > 0:
                yield one, pr
            elif xi_r < 0:
                yield two, pr
            else:
                yield one, 0.5 * pr
                yield two, 0.5 * pr

    layers = [{(0, 0)}]
    for _ in range(T):
        nxt = set()
        for state in layers[-1]:
            for succ, _ in successors(state):
                nxt.add(succ)
        layers.append(nxt)

    gap2 = 2.0 * eps
    tables = [ValueTable(t=0, values={s: gap2 * s[1] for s in layers[T]},
                         reduction="pseudo")]
    for back in range(1, T + 1):
        prev = tables[-1].values
        vals = {}
        for state in layers[T - back]:
            vals[state] = sum(pr * prev[succ] for succ, pr in successors(state))
        tables.append(ValueTable(t=-back, values=vals, reduction="pseudo"))
    return tables


def pseudoregret_value_full(T: int, eps: float, safe_arm: int = 1) -> float:
    """vbar(0, 0, -T) on the unreduced (xi_r, s2) lattice; oracle scale."""
    return pseudoregret_tables_full(T, eps, safe_arm)[-1].values[(0, 0)]


# ---------------------------------------------------------------------------
# Mid-scale reduced recursion on (xi_r, zeta)
# ---------------------------------------------------------------------------

def regret_value_reduced(T: int, eps: float, safe_arm: int = 1) -> float:
    """v(0, 0, -T) on the (xi_r, zeta) lattice with scalar eta source.

    O(T^2) states per slice, O(T^3) work; cross-checks the production
    decomposition at horizons the full table cannot reach.
    """
    _validate(T, eps, safe_arm)
    if T > REDUCED_2D_MAX_T:
        raise ValueError(f"reduced 2-d recursion is limited to T <= {REDUCED_2D_MAX_T}, got {T}")
    sign = 1.0 if safe_arm == 1 else -1.0
    outcomes = _reward_probs(eps, safe_arm)

    # w[x_idx, m_idx]: x = xi_r in [-T, T], m = zeta/2 in [-T, T]
    n = 2 * T + 1
    off = T
    x = np.arange(-T, T + 1).reshape(-1, 1)
    m = np.arange(-T, T + 1).reshape(1, -1)
    w = np.broadcast_to(np.abs(m).astype(float), (n, n)).copy()

    def shifted(arr, dx, dm):
        out = np.zeros_like(arr)
        xs = slice(max(0, -dx), n - max(0, dx))
        ms = slice(max(0, -dm), n - max(0, dm))
        xd = slice(max(0, dx), n - max(0, -dx))
        md = slice(max(0, dm), n - max(0, -dm))
        out[xs, ms] = arr[xd, md]
        return out

    for _ in range(T):
        pick1 = np.zeros_like(w)
        pick2 = np.zeros_like(w)
        for g1, g2, pr in outcomes:
            dm = (g1 - g2) // 2
            pick1 += pr * shifted(w, g1, dm)
            pick2 += pr * shifted(w, -g2, dm)
        pick1 -= sign * eps
        pick2 += sign * eps
        w = np.where(x > 0, pick1, np.where(x < 0, pick2, 0.5 * (pick1 + pick2)))
    return float(w[off, off])


# ---------------------------------------------------------------------------
# Production route: exact one-dimensional walk decomposition
# ---------------------------------------------------------------------------

def _walk_source_sum(T: int, up: float, source: Callable[[np.ndarray], np.ndarray]) -> float:
    """Backward induction of sum_t E[source(W_t)] for the +-1 walk from 0.

    Parity-packed slices: at k rounds elapsed the walk sits on
    xi_r = -k + 2j, j = 0..k, and entry j feeds from entries j (down step)
    and j+1 (up step) of the next slice. The source over the widest slice
    is precomputed once; radius-k slices are strided views into it.
    """
    down = 1.0 - up
    src_all = np.ascontiguousarray(source(np.arange(-T, T + 1, dtype=np.float64)))
    w = np.zeros(T + 1)
    for k in range(T - 1, -1, -1):
        w = src_all[T - k : T + k + 1 : 2] + up * w[1 : k + 2] + down * w[0 : k + 1]
    return float(w[0])


def _abs_walk_terminal(T: int, p_up: float, p_down: float) -> float:
    """Backward induction of E[|M_T|] for the lazy +-1 walk M (= zeta/2)."""
    w = np.abs(np.arange(-T, T + 1)).astype(float)
    p_stay = 1.0 - p_up - p_down
    for k in range(T - 1, -1, -1):
        w = p_up * w[2 : 2 * k + 3] + p_stay * w[1 : 2 * k + 2] + p_down * w[0 : 2 * k + 1]
    return float(w[0])


def regret_value(T: int, eps: float, safe_arm: int = 1) -> float:
    """Exact v(0, 0, -T) under the myopic player, O(T^2) time, O(T) memory.

    E[|zeta_0|]/2 over the drifted lazy walk plus the accumulated
    -eps*sign(xi_r) source over the revealed-difference walk; see the
    module docstring for why this equals the lattice recursion exactly.
    """
    _validate(T, eps, safe_arm)
    drift = eps if safe_arm == 1 else -eps
    up = (1.0 + drift) / 2.0
    src_scale = -eps if safe_arm == 1 else eps

    w_n = _walk_source_sum(T, up, lambda xi: src_scale * np.sign(xi))
    p_up = (1.0 + drift) ** 2 / 4.0
    p_down = (1.0 - drift) ** 2 / 4.0
    w_h = _abs_walk_terminal(T, p_up, p_down)
    return w_h + w_n


def pseudoregret_value(T: int, eps: float, safe_arm: int = 1) -> float:
    """Exact vbar(0, 0, -T): accumulated 2*eps*P(pull risky) over the walk."""
    _validate(T, eps, safe_arm)
    drift = eps if safe_arm == 1 else -eps
    up = (1.0 + drift) / 2.0
    if safe_arm == 1:
        src = lambda xi: 2.0 * eps * ((xi < 0) + 0.5 * (xi == 0))
    else:
        src = lambda xi: 2.0 * eps * ((xi > 0) + 0.5 * (xi == 0))
    return _walk_source_sum(T, up, src)


def bayesian_pseudoregret_check(T: int, eps: float) -> float:
    """Pseudoregret under a uniform prior on the safe-arm label.

    (vbar(safe=1) + vbar(safe=2)) / 2; equals the minimax value because
    the myopic player is indifferent to the label.
    """
    return 0.5 * (pseudoregret_value(T, eps, safe_arm=1)
                  + pseudoregret_value(T, eps, safe_arm=2))


# ---------------------------------------------------------------------------
# Value-at-origin traces (for convergence plots / CSV dumps)
# ---------------------------------------------------------------------------

def value_trace(T: int, eps: float, safe_arm: int = 1) -> list[tuple[int, float, float]]:
    """Rows (t, v(0,0,t), vbar(0,0,t)) for t = -T..0 from single passes.

    The recursions are time homogeneous, so the slice values at the
    origin are the values of the shorter games; computed on unpacked
    integer windows so every t has an origin entry.
    """
    _validate(T, eps, safe_arm)
    drift = eps if safe_arm == 1 else -eps
    up = (1.0 + drift) / 2.0
    down = 1.0 - up
    src_scale = -eps if safe_arm == 1 else eps

    n = 2 * T + 1
    xi = np.arange(-T, T + 1).astype(float)

    # regret source walk, full window: entry x feeds from x-1 and x+1
    w = np.zeros(n)
    wn_origin = [0.0]
    src_n = src_scale * np.sign(xi)
    for _ in range(T):
        nxt = np.empty(n)
        nxt[1:-1] = up * w[2:] + down * w[:-2]
        nxt[0] = up * w[1]      # boundary rows never reach the origin cone
        nxt[-1] = down * w[-2]
        w = src_n + nxt
        wn_origin.append(w[T])

    p_up = (1.0 + drift) ** 2 / 4.0
    p_down = (1.0 - drift) ** 2 / 4.0
    p_stay = 1.0 - p_up - p_down
    h = np.abs(np.arange(-T, T + 1)).astype(float)
    wh_origin = [0.0]
    for _ in range(T):
        nxt = np.empty(n)
        nxt[1:-1] = p_up * h[2:] + p_stay * h[1:-1] + p_down * h[:-2]
        nxt[0] = p_up * h[1] + p_stay * h[0]
        nxt[-1] = p_down * h[-2] + p_stay * h[-1]
        h = nxt
        wh_origin.append(h[T])

    if safe_arm == 1:
        src_b = 2.0 * eps * ((xi < 0) + 0.5 * (xi == 0))
    else:
        src_b = 2.0 * eps * ((xi > 0) + 0.5 * (xi == 0))
    b = np.zeros(n)
    vbar_origin = [0.0]
    for _ in range(T):
        nxt = np.empty(n)
        nxt[1:-1] = up * b[2:] + down * b[:-2]
        nxt[0] = up * b[1]
        nxt[-1] = down * b[-2]
        b = src_b + nxt
        vbar_origin.append(b[T])

    return [
        (-k, wh_origin[k] + wn_origin[k], vbar_origin[k]) for k in range(T, -1, -1)
    ]
