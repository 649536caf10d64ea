"""Batch policies: C2B, C2B with KL elimination, and an all-pairs baseline.

Every policy runs the same loop (``run_policy``): plan a batch from the
statistics gathered through the previous round, execute it, update the
statistics, then apply the elimination rule to the new statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env import (
    DEFAULT_GRID_SIZE,
    BatchPlan,
    BudgetState,
    RegretLedger,
    checkpoint_grid,
    execute_batch,
    play_filler,
)
from .errors import ConfigError
from .prefmat import PreferenceMatrix, reference_gaps
from .stats import PairStats, RoundContext, batch_size, c_radius, gamma_radius, i_score, phat

__all__ = [
    "BatchPlan",
    "DefeatRecord",
    "PolicyState",
    "RoundRecord",
    "RunResult",
    "Policy",
    "C2B",
    "C2BKL",
    "AllPairs",
    "POLICIES",
    "make_policy",
    "defeat_record",
    "c2b_plan",
    "c2b_eliminate",
    "c2bkl_eliminate",
    "allpairs_plan",
    "allpairs_eliminate",
    "f_default",
    "run_policy",
]


@dataclass
class PolicyState:
    K: int
    T: int
    B: int
    active: list[int]
    stats: PairStats
    r: int = 1
    eliminated_log: list[tuple[int, int, str]] = field(default_factory=list)

    @classmethod
    def initial(cls, K: int, T: int, B: int) -> "PolicyState":
        return cls(K=K, T=T, B=B, active=list(range(K)), stats=PairStats(K))

    @property
    def ctx(self) -> RoundContext:
        return RoundContext.at(self.r, self.T, self.B)

    def remove(self, arms, reason: str) -> list[int]:
        arms = sorted(set(arms))
        for a in arms:
            self.active.remove(a)
            self.eliminated_log.append((self.r, a, reason))
        return arms


@dataclass(frozen=True)
class DefeatRecord:
    defeated: dict[int, frozenset[int]]
    candidate: int
    champion: bool


def defeat_record(state: PolicyState) -> DefeatRecord:
    """Defeated sets for round ``state.r`` from the statistics through round ``r - 1``.

    Ties in ``argmax |D(i)|`` go to the lowest arm index.
    """
    prev_q = batch_size(state.T, state.B, state.r - 1)
    stats = state.stats
    defeated = {}
    for i in state.active:
        beaten = set()
        for j in state.active:
            if j == i or stats.n[i, j] == 0:
                continue
            if phat(stats, i, j) > 0.5 + c_radius(int(stats.n[i, j]), state.K, prev_q):
                beaten.add(j)
        defeated[i] = frozenset(beaten)
    candidate = min(state.active, key=lambda i: (-len(defeated[i]), i))
    champion = len(defeated[candidate]) == len(state.active) - 1
    return DefeatRecord(defeated, candidate, champion)


def c2b_plan(state: PolicyState, record: DefeatRecord | None = None) -> BatchPlan:
    if record is None:
        record = defeat_record(state)
    top = record.candidate
    beaten = record.defeated[top]
    pairs = []
    for i in state.active:
        if i == top:
            continue
        if i in beaten:
            pairs.append((top, i))
        else:
            pairs.extend((i, j) for j in state.active if j != i)
    return BatchPlan.from_pairs(state.r, pairs, state.ctx.q_r)


def allpairs_plan(state: PolicyState) -> BatchPlan:
    a = state.active
    pairs = [(a[x], a[y]) for x in range(len(a)) for y in range(x + 1, len(a))]
    return BatchPlan.from_pairs(state.r, pairs, state.ctx.q_r)


def _apply(state: PolicyState, doomed: set[int], reason: str) -> list[int]:
    # a snapshot rule can condemn every arm at once (only possible without a
    # Condorcet winner); the round's eliminations are then skipped
    if not doomed or len(doomed) >= len(state.active):
        return []
    return state.remove(doomed, reason)


def gamma_doomed(state: PolicyState) -> set[int]:
    stats = state.stats
    doomed = set()
    for j in state.active:
        for i in state.active:
            n = int(stats.n[i, j])
            if i == j or n == 0:
                continue
            if phat(stats, i, j) > 0.5 + gamma_radius(n, state.K, state.B, state.T):
                doomed.add(j)
                break
    return doomed


def kl_doomed(state: PolicyState, f_of_K: float) -> set[int]:
    scores = {j: i_score(state.stats, j, state.active) for j in state.active}
    floor = min(scores.values())
    threshold = math.log(state.T) + f_of_K
    return {j for j, s in scores.items() if s - floor > threshold}


def c2b_eliminate(state: PolicyState) -> list[int]:
    return _apply(state, gamma_doomed(state), "gamma")


def c2bkl_eliminate(state: PolicyState, f_of_K: float) -> list[int]:
    return _apply(state, kl_doomed(state, f_of_K), "kl")


allpairs_eliminate = c2b_eliminate


def f_default(K: int) -> float:
    return 0.3 * K**1.01


class Policy:
    name = "policy"
    uses_candidate = True

    def plan(self, state: PolicyState) -> tuple[BatchPlan, DefeatRecord]:
        record = defeat_record(state)
        return c2b_plan(state, record), record

    def eliminate(self, state: PolicyState) -> list[int]:
        raise NotImplementedError


class C2B(Policy):
    name = "c2b"

    def eliminate(self, state):
        return c2b_eliminate(state)


class C2BKL(Policy):
    name = "c2b-kl"

    def __init__(self, f_of_K: float | None = None):
        self.f_of_K = f_of_K

    def eliminate(self, state):
        f = f_default(state.K) if self.f_of_K is None else self.f_of_K
        return c2bkl_eliminate(state, f)


class AllPairs(Policy):
    name = "allpairs"
    uses_candidate = False

    def plan(self, state):
        return allpairs_plan(state), defeat_record(state)

    def eliminate(self, state):
        return allpairs_eliminate(state)


POLICIES = {"c2b": C2B, "c2b-kl": C2BKL, "allpairs": AllPairs}


def make_policy(name: str, f_of_K: float | None = None) -> Policy:
    if name not in POLICIES:
        raise ConfigError(f"unknown algorithm {name!r}; choose from {sorted(POLICIES)}")
    if name == "c2b-kl":
        return C2BKL(f_of_K)
    return POLICIES[name]()


@dataclass(frozen=True)
class RoundRecord:
    r: int
    q_r: int
    active: tuple[int, ...]
    candidate: int | None
    champion: bool | None
    plan: tuple[tuple[int, int], ...]
    comparisons: int
    truncated: bool
    eliminated: tuple[int, ...]


@dataclass
class RunResult:
    algorithm: str
    K: int
    T: int
    B: int
    seed: int
    reference_arm: int
    grid: np.ndarray
    trace: np.ndarray
    boundaries: list[tuple[int, float]]
    rounds: list[RoundRecord]
    eliminations: list[tuple[int, int, str]]
    final_active: tuple[int, ...]
    declared_champion: int
    comparisons: int
    filler_steps: int
    arm_counts: np.ndarray
    final_regret: float
    tally_regret: float

    @property
    def rounds_used(self) -> int:
        return len(self.rounds)


def run_policy(
    policy: Policy,
    matrix: PreferenceMatrix,
    T: int,
    B: int,
    seed: int,
    *,
    grid_size: int = DEFAULT_GRID_SIZE,
    eliminate: bool = True,
) -> RunResult:
    """Play one trial of ``policy`` with budget ``T`` and round budget ``B``.

    ``eliminate=False`` switches the elimination step off (diagnostics only).
    """
    K = matrix.K
    if not isinstance(T, (int, np.integer)) or T < 1:
        raise ConfigError(f"T must be a positive integer, got {T!r}")
    if not isinstance(B, (int, np.integer)) or B < 1:
        raise ConfigError(f"B must be a positive integer, got {B!r}")
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")
    T, B, seed = int(T), int(B), int(seed)

    ref, gaps = reference_gaps(matrix)
    ledger = RegretLedger(gaps, checkpoint_grid(T, grid_size))
    budget = BudgetState(T)
    state = PolicyState.initial(K, T, B)
    rounds: list[RoundRecord] = []
    filler = 0

    while budget.remaining > 0:
        if len(state.active) == 1:
            filler = play_filler(state.active[0], budget, ledger)
            break
        plan, record = policy.plan(state)
        active_before = tuple(state.active)
        outcomes = execute_batch(plan, matrix, budget, ledger, seed)
        for out in outcomes:
            state.stats.record(out.pair[0], out.pair[1], out.wins_i, out.total)
        performed = sum(o.total for o in outcomes)
        truncated = performed < plan.size
        removed: list[int] = []
        if not truncated and eliminate:
            removed = policy.eliminate(state)
        rounds.append(
            RoundRecord(
                r=state.r,
                q_r=state.ctx.q_r,
                active=active_before,
                candidate=record.candidate if policy.uses_candidate else None,
                champion=record.champion if policy.uses_candidate else None,
                plan=tuple(plan.pairs),
                comparisons=performed,
                truncated=truncated,
                eliminated=tuple(removed),
            )
        )
        if truncated:
            break
        state.r += 1

    if len(state.active) == 1:
        declared = state.active[0]
    else:
        declared = defeat_record(state).candidate
    return RunResult(
        algorithm=policy.name,
        K=K,
        T=T,
        B=B,
        seed=seed,
        reference_arm=ref,
        grid=ledger.grid,
        trace=ledger.grid_values,
        boundaries=list(ledger.boundaries),
        rounds=rounds,
        eliminations=list(state.eliminated_log),
        final_active=tuple(state.active),
        declared_champion=declared,
        comparisons=budget.used,
        filler_steps=filler,
        arm_counts=ledger.arm_counts.copy(),
        final_regret=ledger.cumulative,
        tally_regret=ledger.tally_regret(),
    )
