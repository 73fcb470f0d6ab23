"""Centered symmetric two-armed Bernoulli environment.

Rewards live on the +-1 scale: the safe arm pays +1 with probability
(1 + eps)/2, the risky arm with probability (1 - eps)/2, independently.
A raw 0/1 reward converts via g = 2*raw - 1 and nothing else in the
package ever touches the raw scale.

Randomness convention: every public sampling entry point takes either an
integer seed or a numpy Generator. Batches split work into fixed-size
chunks whose generators are spawned from SeedSequence(seed), so results
are bit-identical regardless of how many workers process the chunks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import RegretState, check_gap, terminal_payoff


def centered_from_raw(raw: int) -> int:
    """Map a raw 0/1 reward to the centered +-1 scale."""
    if raw not in (0, 1):
        raise ValueError(f"raw reward must be 0 or 1, got {raw}")
    return 2 * raw - 1


def raw_from_centered(g: int) -> int:
    if g not in (-1, 1):
        raise ValueError(f"centered reward must be -1 or +1, got {g}")
    return (g + 1) // 2


@dataclass(frozen=True)
class RewardPair:
    """One round's rewards for both arms, centered scale."""

    g1: int
    g2: int

    def __post_init__(self) -> None:
        if self.g1 not in (-1, 1) or self.g2 not in (-1, 1):
            raise ValueError(f"rewards must be +-1, got ({self.g1}, {self.g2})")


def _check_safe_arm(safe_arm: int) -> None:
    if safe_arm not in (1, 2):
        raise ValueError(f"safe_arm must be 1 or 2, got {safe_arm}")


def sample_rewards(rng: np.random.Generator, eps: float, safe_arm: int = 1) -> RewardPair:
    """Draw one independent reward pair; safe component is +1 w.p. (1+eps)/2."""
    check_gap(eps)
    _check_safe_arm(safe_arm)
    p1 = (1.0 + eps) / 2.0 if safe_arm == 1 else (1.0 - eps) / 2.0
    p2 = (1.0 - eps) / 2.0 if safe_arm == 1 else (1.0 + eps) / 2.0
    g1 = 1 if rng.random() < p1 else -1
    g2 = 1 if rng.random() < p2 else -1
    return RewardPair(g1, g2)


def step(state: RegretState, choice: int, rewards: RewardPair) -> RegretState:
    """Advance the state one round given the player's choice and rewards.

    eta += g1 + g2 - 2*g_choice; arm 1 reveals g1 (xi_r += g1, xi_h -= g2),
    arm 2 reveals g2 (xi_r -= g2, xi_h += g1). xi_r + xi_h always moves by
    g1 - g2, so the information revealed per round is choice-independent.
    """
    if state.t >= 0:
        raise ValueError(f"cannot step a finished game (t={state.t})")
    if choice not in (1, 2):
        raise ValueError(f"choice must be 1 or 2, got {choice}")
    g1, g2 = rewards.g1, rewards.g2
    g_i = g1 if choice == 1 else g2
    eta = state.eta + g1 + g2 - 2 * g_i
    if choice == 1:
        xi_r, xi_h = state.xi_r + g1, state.xi_h - g2
    else:
        xi_r, xi_h = state.xi_r - g2, state.xi_h + g1
    return RegretState(eta=eta, xi_h=xi_h, xi_r=xi_r, t=state.t + 1)


@dataclass
class EpisodeLog:
    """One simulated play-through, serializable one-per-line for audit."""

    seed: int
    safe_arm: int
    eps: float
    choices: list[int] = field(default_factory=list)
    rewards: list[RewardPair] = field(default_factory=list)
    trajectory: list[RegretState] = field(default_factory=list)
    final_regret: float = 0.0
    risky_pulls: int = 0

    def to_line(self) -> str:
        rec = {
            "seed": self.seed,
            "safe_arm": self.safe_arm,
            "eps": self.eps,
            "choices": self.choices,
            "rewards": [[r.g1, r.g2] for r in self.rewards],
            "final_regret": self.final_regret,
            "s2": self.risky_pulls,
        }
        return json.dumps(rec, separators=(",", ":"))

    @classmethod
    def from_line(cls, line: str) -> "EpisodeLog":
        rec = json.loads(line)
        log = cls(seed=rec["seed"], safe_arm=rec["safe_arm"], eps=rec["eps"])
        log.choices = list(rec["choices"])
        log.rewards = [RewardPair(g1, g2) for g1, g2 in rec["rewards"]]
        log.final_regret = rec["final_regret"]
        log.risky_pulls = rec["s2"]
        T = len(log.choices)
        state = RegretState(0, 0, 0, -T)
        log.trajectory = [state]
        for choice, rp in zip(log.choices, log.rewards):
            state = step(state, choice, rp)
            log.trajectory.append(state)
        return log


def play_episode(T: int, eps: float, strategy, seed, safe_arm: int = 1) -> EpisodeLog:
    """Play one full episode with per-round draws (choice coin, g1, g2).

    `seed` may be an int or a SeedSequence; `strategy` needs a
    p1(t, xi_r) -> float method.
    """
    if T < 1:
        raise ValueError(f"horizon must be >= 1, got {T}")
    check_gap(eps)
    _check_safe_arm(safe_arm)
    rng = np.random.default_rng(seed)
    seed_label = seed if isinstance(seed, int) else -1
    log = EpisodeLog(seed=seed_label, safe_arm=safe_arm, eps=eps)
    state = RegretState(0, 0, 0, -T)
    log.trajectory.append(state)
    for _ in range(T):
        p1 = strategy.p1(state.t, state.xi_r)
        choice = 1 if rng.random() < p1 else 2
        rp = sample_rewards(rng, eps, safe_arm)
        state = step(state, choice, rp)
        log.choices.append(choice)
        log.rewards.append(rp)
        log.trajectory.append(state)
    log.final_regret = terminal_payoff(state.eta, state.xi_h, state.xi_r)
    log.risky_pulls = sum(1 for c in log.choices if c == (2 if safe_arm == 1 else 1))
    return log


def simulate_batch(
    T: int,
    eps: float,
    strategy,
    n: int,
    rng: np.random.Generator,
    safe_arm: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate n episodes vectorized; returns (final payoff mu, risky pulls).

    Per round the draw order is: choice coins (n,), then g1 uniforms (n,),
    then g2 uniforms (n,). `strategy` needs p1_batch(t, xi_r array).
    """
    if T < 1:
        raise ValueError(f"horizon must be >= 1, got {T}")
    check_gap(eps)
    _check_safe_arm(safe_arm)
    p_g1 = (1.0 + eps) / 2.0 if safe_arm == 1 else (1.0 - eps) / 2.0
    p_g2 = (1.0 - eps) / 2.0 if safe_arm == 1 else (1.0 + eps) / 2.0
    eta = np.zeros(n, dtype=np.int64)
    xi_r = np.zeros(n, dtype=np.int64)
    zeta = np.zeros(n, dtype=np.int64)
    risky = np.zeros(n, dtype=np.int64)
    risky_choice = 2 if safe_arm == 1 else 1
    for t in range(-T, 0):
        p1 = strategy.p1_batch(t, xi_r)
        pick1 = rng.random(n) < p1
        g1 = np.where(rng.random(n) < p_g1, 1, -1)
        g2 = np.where(rng.random(n) < p_g2, 1, -1)
        g_i = np.where(pick1, g1, g2)
        eta += g1 + g2 - 2 * g_i
        xi_r += np.where(pick1, g1, -g2)
        zeta += g1 - g2
        picked_risky = ~pick1 if risky_choice == 2 else pick1
        risky += picked_risky.astype(np.int64)
    mu = 0.5 * (eta + np.abs(zeta))
    return mu, risky
