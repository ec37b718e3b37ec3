"""Discrete-round game loop and the deterministic parallel replication runner.

One simulation is strictly sequential; replications are embarrassingly
parallel, each owning a counter-derived RNG stream so results never depend on
worker count or scheduling.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .model import (
    AuthorParams,
    AuthorState,
    DiscountParams,
    UltimatumProposal,
    apply_ultimatum,
    best_ultimatum,
    discounted_completion_utility,
    issuance_worthwhile,
    position_utility,
)

# Rounds are hard-capped at this multiple of the nominal horizon as a runaway
# guard; with normalized contribution means the cap is unreachable in practice.
HARD_CAP_FACTOR = 4

# Completion compares against the threshold with this slack so that exact-mean
# accrual (w_std = 0) finishes on the nominal round despite float summation.
_THRESHOLD_EPS = 1e-9


@dataclass(frozen=True)
class ProjectConfig:
    """One fully sampled game instance."""

    n_authors: int
    horizon_rounds: int
    start_progress: float
    authors: tuple[AuthorParams, ...]
    discount: DiscountParams
    threshold: float = 1.0

    def __post_init__(self) -> None:
        if self.n_authors < 1:
            raise ValueError(f"need at least one author, got {self.n_authors}")
        if self.horizon_rounds < 1:
            raise ValueError(f"horizon must be >= 1 round, got {self.horizon_rounds}")
        if not (0.0 <= self.start_progress <= 1.0):
            raise ValueError(f"start_progress must lie in [0, 1], got {self.start_progress}")
        if len(self.authors) != self.n_authors:
            raise ValueError(
                f"author list length {len(self.authors)} != n_authors {self.n_authors}"
            )
        total = sum(a.w_mean for a in self.authors) * self.horizon_rounds
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"contribution means must normalize to 1 over the project, got {total}")


class EventOutcome(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED_WITHDRAWN = "rejected-withdrawn"
    REJECTED_HELD = "rejected-held"


@dataclass(frozen=True)
class UltimatumEvent:
    round: int
    issuer: int
    from_position: int
    to_position: int
    outcome: EventOutcome

    def __post_init__(self) -> None:
        if self.outcome is EventOutcome.ACCEPTED and self.from_position <= self.to_position:
            raise ValueError("an accepted demand must improve the issuer's position")


@dataclass
class SimulationState:
    round: int
    authors: list[AuthorState]
    order: list[int]
    initial_order: list[int]
    total_contributed: float
    event_log: list[UltimatumEvent] = field(default_factory=list)


@dataclass(frozen=True)
class SimulationOutcome:
    completed: bool
    rounds_elapsed: int
    events: tuple[UltimatumEvent, ...]
    initial_order: tuple[int, ...]
    final_order: tuple[int, ...]
    payoffs: tuple[float, ...]

    @property
    def had_ultimatum(self) -> bool:
        return len(self.events) > 0


@dataclass(frozen=True)
class SeedPolicy:
    """Names one replication's RNG stream as a pure function of (seed, index)."""

    master_seed: int
    replication_index: int = 0

    def stream(self) -> np.random.Generator:
        return stream(self.master_seed, self.replication_index)


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Counter-derived generator for (master_seed, *path); no coordination needed."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))


def init_project(config: ProjectConfig, rng: Optional[np.random.Generator] = None) -> SimulationState:
    """Set up mid-project state deterministically from the configured start point.

    Authors are ordered by contribution mean (descending, ties by id) and each
    starts with the expected accrual start_progress * T * w_mean. `rng` is
    accepted for signature symmetry; initialization draws nothing.
    """
    ranked = sorted(config.authors, key=lambda a: (-a.w_mean, a.id))
    t0 = int(round(config.start_progress * config.horizon_rounds))
    authors: list[AuthorState] = [AuthorState(params=a) for a in config.authors]
    order: list[int] = []
    for pos, params in enumerate(ranked, start=1):
        state = authors[params.id]
        state.position = pos
        state.contributed = config.start_progress * config.horizon_rounds * params.w_mean
        order.append(params.id)
    total = sum(a.contributed for a in authors)
    return SimulationState(
        round=t0, authors=authors, order=order, initial_order=list(order),
        total_contributed=total,
    )


def sample_contribution(author: AuthorParams, rng: np.random.Generator) -> float:
    """One round's contribution: Normal(w_mean, w_std) clamped below at zero."""
    return max(0.0, float(rng.normal(author.w_mean, author.w_std)))


def is_complete(state: SimulationState, config: ProjectConfig) -> bool:
    if state.total_contributed >= config.threshold - _THRESHOLD_EPS:
        return True
    return state.round >= HARD_CAP_FACTOR * config.horizon_rounds


def step_round(
    state: SimulationState, config: ProjectConfig, rng: np.random.Generator
) -> SimulationState:
    """Advance one round: everyone contributes, then demands are resolved.

    Contributions for the round all land before any author weighs an
    ultimatum, so the trace of a noise-free game does not depend on the
    shuffle; the shuffled order then decides who gets to move first. A demand
    is issued when one exists that every co-author accepts and the issuer's
    discounted gain still exceeds their own sunk stake; once the threshold is
    crossed the manuscript is out of hostage range and no demands are raised.
    """
    n = config.n_authors
    turn_order = rng.permutation(n)
    this_round = state.round + 1

    means = np.array([a.params.w_mean for a in state.authors])
    stds = np.array([a.params.w_std for a in state.authors])
    draws = np.clip(rng.normal(means, stds), 0.0, None)
    for i in turn_order:
        state.authors[i].contributed += float(draws[i])
    state.total_contributed += float(draws.sum())

    if state.total_contributed < config.threshold - _THRESHOLD_EPS:
        lead_author = state.initial_order[0]
        for i in turn_order:
            author = state.authors[i]
            if author.has_issued or author.position == 1:
                continue
            # The author the contribution ordering already placed first has no
            # credit claim to press, even after being displaced by a demand.
            if author.params.id == lead_author:
                continue
            others = [a for a in state.authors if a.params.id != author.params.id]
            proposal = best_ultimatum(
                author, others, round=this_round, horizon=config.horizon_rounds, d=config.discount
            )
            if proposal is None:
                continue
            if not issuance_worthwhile(author, proposal, config.discount):
                continue
            state.order = apply_ultimatum(state.order, proposal)
            for pos, author_id in enumerate(state.order, start=1):
                state.authors[author_id].position = pos
            author.has_issued = True
            state.event_log.append(
                UltimatumEvent(
                    round=this_round,
                    issuer=author.params.id,
                    from_position=proposal.from_position,
                    to_position=proposal.to_position,
                    outcome=EventOutcome.ACCEPTED,
                )
            )

    state.round = this_round
    return state


def run_simulation(config: ProjectConfig, seed: SeedPolicy) -> SimulationOutcome:
    """Play one project to completion; (config, seed) fully determine the outcome."""
    rng = seed.stream()
    state = init_project(config, rng)
    initial_order = tuple(state.initial_order)
    while not is_complete(state, config):
        step_round(state, config, rng)
    completed = state.total_contributed >= config.threshold - _THRESHOLD_EPS
    if completed:
        payoffs = tuple(
            discounted_completion_utility(a.params.u0, config.discount, 0)
            * position_utility(a.params.u1, a.position)
            for a in state.authors
        )
    else:
        payoffs = tuple(0.0 for _ in state.authors)
    return SimulationOutcome(
        completed=completed,
        rounds_elapsed=state.round,
        events=tuple(state.event_log),
        initial_order=initial_order,
        final_order=tuple(state.order),
        payoffs=payoffs,
    )


ConfigSampler = Callable[[np.random.Generator], ProjectConfig]


@dataclass(frozen=True)
class RepRecord:
    """Compact per-replication summary used for deterministic aggregation."""

    n_authors: int
    had_ultimatum: bool
    issued_by_position: tuple[bool, ...]
    payoffs_by_position: tuple[float, ...]
    rounds_elapsed: int
    completed: bool
    events: tuple[UltimatumEvent, ...] = ()


@dataclass(frozen=True)
class ReplicationStats:
    """Aggregates over a replication batch.

    Per-position entries are indexed by initial byline position (entry 0 is
    position 1); for mixed author counts each position is averaged over the
    replications that actually have it.
    """

    n: int
    iau_rate: float
    rate_std: float
    per_position_rates: tuple[float, ...]
    mean_payoffs: tuple[float, ...]


def summarize_outcome(outcome: SimulationOutcome, keep_events: bool = False) -> RepRecord:
    n = len(outcome.initial_order)
    issued = [False] * n
    for event in outcome.events:
        initial_pos = outcome.initial_order.index(event.issuer) + 1
        issued[initial_pos - 1] = True
    payoffs = tuple(outcome.payoffs[author_id] for author_id in outcome.initial_order)
    return RepRecord(
        n_authors=n,
        had_ultimatum=outcome.had_ultimatum,
        issued_by_position=tuple(issued),
        payoffs_by_position=payoffs,
        rounds_elapsed=outcome.rounds_elapsed,
        completed=outcome.completed,
        events=outcome.events if keep_events else (),
    )


def run_one_replication(
    sampler: ConfigSampler, master_seed: int, rep_index: int, path: tuple[int, ...] = (),
    keep_events: bool = False,
) -> RepRecord:
    """Sample a config and play it, both from the replication's own stream."""
    rng = stream(master_seed, *path, rep_index)
    config = sampler(rng)
    state = init_project(config, rng)
    initial_order = tuple(state.initial_order)
    while not is_complete(state, config):
        step_round(state, config, rng)
    completed = state.total_contributed >= config.threshold - _THRESHOLD_EPS
    if completed:
        payoffs = tuple(
            discounted_completion_utility(a.params.u0, config.discount, 0)
            * position_utility(a.params.u1, a.position)
            for a in state.authors
        )
    else:
        payoffs = tuple(0.0 for _ in state.authors)
    outcome = SimulationOutcome(
        completed=completed,
        rounds_elapsed=state.round,
        events=tuple(state.event_log),
        initial_order=initial_order,
        final_order=tuple(state.order),
        payoffs=payoffs,
    )
    return summarize_outcome(outcome, keep_events=keep_events)


def _run_chunk(args: tuple) -> list[RepRecord]:
    sampler, master_seed, start, stop, path, keep_events = args
    return [
        run_one_replication(sampler, master_seed, r, path, keep_events)
        for r in range(start, stop)
    ]


def aggregate_records(records: Sequence[RepRecord]) -> ReplicationStats:
    """Reduce records in replication order; independent of how they were produced."""
    n = len(records)
    if n == 0:
        raise ValueError("cannot aggregate an empty batch")
    indicators = [1.0 if r.had_ultimatum else 0.0 for r in records]
    rate = sum(indicators) / n
    if n > 1:
        var = sum((x - rate) ** 2 for x in indicators) / (n - 1)
        rate_std = var**0.5
    else:
        rate_std = 0.0
    max_n = max(r.n_authors for r in records)
    pos_counts = [0] * max_n
    pos_hits = [0] * max_n
    pos_payoffs = [0.0] * max_n
    for r in records:
        for p in range(r.n_authors):
            pos_counts[p] += 1
            if r.issued_by_position[p]:
                pos_hits[p] += 1
            pos_payoffs[p] += r.payoffs_by_position[p]
    rates = tuple(pos_hits[p] / pos_counts[p] for p in range(max_n))
    payoffs = tuple(pos_payoffs[p] / pos_counts[p] for p in range(max_n))
    return ReplicationStats(
        n=n, iau_rate=rate, rate_std=rate_std, per_position_rates=rates, mean_payoffs=payoffs
    )


def run_replications(
    sampler: ConfigSampler,
    master_seed: int,
    n_reps: int,
    workers: int = 1,
    path: tuple[int, ...] = (),
    keep_events: bool = False,
) -> tuple[ReplicationStats, list[RepRecord]]:
    """Run n_reps independent replications and aggregate them.

    Replication r always uses stream (master_seed, *path, r), and aggregation
    reduces in replication order, so the result is identical for any worker
    count.
    """
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps}")
    if workers <= 1 or n_reps < 4:
        records = [
            run_one_replication(sampler, master_seed, r, path, keep_events)
            for r in range(n_reps)
        ]
    else:
        chunk = max(1, -(-n_reps // (workers * 4)))
        jobs = [
            (sampler, master_seed, start, min(start + chunk, n_reps), path, keep_events)
            for start in range(0, n_reps, chunk)
        ]
        records = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_chunk, jobs):
                records.extend(part)
    return aggregate_records(records), records
