"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one [PASS]/[FAIL] line (run with `pytest -s` to see them on
success). The heavy Monte Carlo criteria use the documented replication
counts, so the full module takes several minutes on one core.
"""

import math
import time

import numpy as np
import pytest
import scipy.stats

from bylinesim.cli import RunSpec, orchestrate
from bylinesim.engine import (
    EventOutcome,
    ProjectConfig,
    SeedPolicy,
    init_project,
    is_complete,
    run_replications,
    run_simulation,
    step_round,
    stream,
)
from bylinesim.model import (
    AuthorParams,
    DiscountParams,
    PositionUtilityParams,
    UltimatumProposal,
    apply_ultimatum,
    best_ultimatum,
    discounted_completion_utility,
    displacement,
    position_utility,
)
from bylinesim.scenarios import CASE_IDS, CaseSampler, TableDefaults
from bylinesim.stats import (
    log_fit,
    mean_std,
    ols_fit_planar,
    paired_t_test,
    r_squared,
)

from test_model import brute_force_best, make_author, random_instance

SEED = 74
TOL = 1e-9


def check(criterion: str, passed: bool, detail: str = "") -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {criterion}  {detail}")
    assert passed, f"{criterion}: {detail}"


def test_c01_determinism_and_runtime(tmp_path):
    """Same seed, worker counts 1 and 8: byte-identical CSVs; fig3@1000 < 60 s."""
    started = time.time()
    orchestrate(RunSpec(command="fig3", master_seed=SEED, reps=1000,
                        output_dir=str(tmp_path / "a"), workers=1))
    elapsed = time.time() - started
    orchestrate(RunSpec(command="fig3", master_seed=SEED, reps=1000,
                        output_dir=str(tmp_path / "b"), workers=1))
    orchestrate(RunSpec(command="fig3", master_seed=SEED, reps=1000,
                        output_dir=str(tmp_path / "c"), workers=8))
    a = (tmp_path / "a" / "fig3.csv").read_bytes()
    b = (tmp_path / "b" / "fig3.csv").read_bytes()
    c = (tmp_path / "c" / "fig3.csv").read_bytes()
    check(
        "C1 determinism+runtime",
        a == b and a == c and elapsed < 60.0,
        f"rerun identical: {a == b}; workers 1 vs 8 identical: {a == c}; "
        f"fig3@1000 took {elapsed:.1f}s (< 60s)",
    )


def test_c02_oracle_equivalence():
    """best_ultimatum vs exhaustive target enumeration: 1000 instances, N <= 5."""
    rng = np.random.default_rng(SEED)
    mismatches = 0
    for _ in range(1000):
        authors, round_, horizon, d = random_instance(rng)
        issuer = authors[int(rng.integers(0, len(authors)))]
        others = [a for a in authors if a.params.id != issuer.params.id]
        expected = brute_force_best(issuer, others, round_, horizon, d)
        got = best_ultimatum(issuer, others, round_, horizon, d)
        got_k = got.to_position if got is not None else None
        if got_k != expected:
            mismatches += 1
    check("C2 oracle equivalence", mismatches == 0, f"{mismatches} mismatches in 1000")


def _trace_config():
    curve = PositionUtilityParams(0.0, 0.0)
    authors = tuple(
        AuthorParams(id=i, u0=1.0, u1=curve, w_mean=w, w_std=0.0)
        for i, w in enumerate([0.075, 0.025])
    )
    return ProjectConfig(n_authors=2, horizon_rounds=10, start_progress=0.0,
                         authors=authors, discount=DiscountParams(0.0, 0.1))


def test_c03_hand_trace():
    """Noise-free 0.75/0.25 two-author game: first demand at exactly round 7."""
    config = _trace_config()
    rounds = set()
    for seed in range(25):
        outcome = run_simulation(config, SeedPolicy(seed, 0))
        rounds.update(e.round for e in outcome.events)
        assert len(outcome.events) == 1
        assert outcome.rounds_elapsed == 10
    check("C3 hand-trace", rounds == {7}, f"first-ultimatum rounds across 25 seeds: {sorted(rounds)}")


def test_c04_fig1_trend():
    """5x5 grid at five authors: contribution slope > 0, utility slope < 0,
    magnitudes within 0.07 of (0.09, -0.04); under 10 minutes."""
    started = time.time()
    cells = []
    for u in (1.0, 2.0, 3.0, 4.0, 5.0):
        for c in (1.0, 2.0, 3.0, 4.0, 5.0):
            stats, _ = run_replications(
                TableDefaults(n_authors=5, utility_width=u, contribution_width=c),
                SEED, 2000, path=(int(u * 10 + c),))
            cells.append((u, c, stats.iau_rate))
    fit = ols_fit_planar(cells)
    elapsed = time.time() - started
    c_slope = fit.coefficients["c_slope"]
    u_slope = fit.coefficients["u_slope"]
    ok = (
        c_slope > 0
        and u_slope < 0
        and abs(c_slope - 0.09) <= 0.07
        and abs(u_slope - (-0.04)) <= 0.07
        and elapsed < 600.0
    )
    check("C4 figure-1 trend", ok,
          f"c_slope={c_slope:.4f} (target 0.09±0.07), u_slope={u_slope:.4f} "
          f"(target -0.04±0.07), R2={fit.r_squared:.3f}, {elapsed:.0f}s")


def test_c05_author_count_trend():
    """Rate nondecreasing in author count (Spearman > 0.9 at 5000/bin); log slope > 0."""
    rates = []
    for n in range(2, 9):
        stats, _ = run_replications(TableDefaults(n_authors=n), SEED, 5000, path=(300 + n,))
        rates.append((n, stats.iau_rate))
    rho = scipy.stats.spearmanr([n for n, _ in rates], [r for _, r in rates]).statistic
    fit = log_fit([(float(n), r) for n, r in rates])
    slope = fit.coefficients["log_slope"]
    check("C5 author-count trend", rho > 0.9 and slope > 0,
          f"Spearman rho={rho:.3f} (> 0.9), log slope={slope:.3f} (> 0), "
          f"rates={[(n, round(r, 3)) for n, r in rates]}")


def test_c06_headline_rates():
    """Two-author rate 21% +/- 15pp, five-author 43% +/- 15pp, strict ordering."""
    rates = {}
    for n in (2, 5, 8):
        stats, _ = run_replications(TableDefaults(n_authors=n), SEED, 10_000, path=(400 + n,))
        rates[n] = stats.iau_rate
    ok = (
        abs(rates[2] - 0.21) <= 0.15
        and abs(rates[5] - 0.43) <= 0.15
        and rates[2] < rates[5] < rates[8]
    )
    check("C6 headline rates", ok,
          f"rate(2)={rates[2]:.3f} (0.21±0.15), rate(5)={rates[5]:.3f} (0.43±0.15), "
          f"rate(8)={rates[8]:.3f}, ordering strict: {rates[2] < rates[5] < rates[8]}")


def test_c07_scenario_orderings():
    """Named cases at 10,000 reps each (20 seeded batches of 500): P1 < P2,
    SA2 < SA3, SA6 < SA7, and each SA_k / SA_{k+4} pair differs at p < 0.005."""
    batches = 20
    per_batch = 500
    batch_rates: dict[str, list[float]] = {}
    for ci, case_id in enumerate(CASE_IDS):
        sampler = CaseSampler(case_id)
        batch_rates[case_id] = []
        for b in range(batches):
            stats, _ = run_replications(sampler, SEED, per_batch, path=(500 + ci, b))
            batch_rates[case_id].append(stats.iau_rate)
    pooled = {cid: sum(v) / len(v) for cid, v in batch_rates.items()}

    orderings = (
        pooled["P1"] < pooled["P2"]
        and pooled["SA2"] < pooled["SA3"]
        and pooled["SA6"] < pooled["SA7"]
    )
    p_values = {}
    for k in range(1, 5):
        result = paired_t_test(batch_rates[f"SA{k}"], batch_rates[f"SA{k + 4}"])
        p_values[f"SA{k}/SA{k + 4}"] = result.p_value
    pairs_differ = all(p < 0.005 for p in p_values.values())
    check("C7 scenario orderings", orderings and pairs_differ,
          f"P1={pooled['P1']:.3f} < P2={pooled['P2']:.3f}, "
          f"SA2={pooled['SA2']:.3f} < SA3={pooled['SA3']:.3f}, "
          f"SA6={pooled['SA6']:.3f} < SA7={pooled['SA7']:.3f}; "
          f"pair p-values={ {k: f'{v:.2e}' for k, v in p_values.items()} }")


def test_c08_statistics_hand_values():
    """Every hand-computed statistics example holds to 1e-9 absolute."""
    failures = []

    def expect(name, got, want):
        if abs(got - want) > TOL:
            failures.append(f"{name}: got {got!r}, want {want!r}")

    expect("u1(0.25,0.25)(2)", position_utility(PositionUtilityParams(0.25, 0.25), 2), 0.75 / 2.25)
    expect("u1(0,0)(4)", position_utility(PositionUtilityParams(0.0, 0.0), 4), 0.25)
    expect("discount(1,d=1,rem=2)", discounted_completion_utility(1.0, DiscountParams(1.0, 0.0), 2), 0.25)
    mean, std = mean_std([1.0, 3.0])
    expect("mean(1,3)", mean, 2.0)
    expect("std(1,3)", std, math.sqrt(2.0))
    expect("r2 hand", r_squared([1.0, 2.0, 4.0], [1.0, 2.0, 3.0]), 0.5)
    plane = ols_fit_planar([
        (u, c, 0.2 - 0.05 * u + 0.1 * c)
        for u in (1.0, 2.0, 3.0, 4.0, 5.0) for c in (1.0, 2.0, 3.0)
    ])
    expect("planar intercept", plane.coefficients["intercept"], 0.2)
    expect("planar u", plane.coefficients["u_slope"], -0.05)
    expect("planar c", plane.coefficients["c_slope"], 0.1)
    expect("planar r2", plane.r_squared, 1.0)
    curve = log_fit([(float(a), 0.18 * math.log(a) + 0.12) for a in range(2, 9)])
    expect("log slope", curve.coefficients["log_slope"], 0.18)
    expect("log intercept", curve.coefficients["intercept"], 0.12)
    expect("log r2", curve.r_squared, 1.0)
    t_result = paired_t_test([2.0, 4.0, 6.0], [1.0, 2.0, 3.0])
    expected_t = 2.0 * math.sqrt(3.0)
    expect("paired t", t_result.t_statistic, expected_t)
    expect("paired p", t_result.p_value, 1.0 - expected_t / math.sqrt(expected_t**2 + 2.0))
    check("C8 statistics hand values", not failures, "; ".join(failures) or "all at 1e-9")


def test_c09_property_suites():
    """Named invariants under at least 1e5 randomized trials each."""
    rng = np.random.default_rng(SEED)
    trials = {}

    # Position-utility curve strictly decreasing with its bounds.
    count = 0
    r1 = rng.uniform(0, 0.25, size=100_000)
    r2 = rng.uniform(0, 0.25, size=100_000)
    xs = np.arange(1, 9, dtype=float)
    values = (1.0 - r1[:, None]) / (xs[None, :] + r2[:, None])
    assert np.all(np.diff(values, axis=1) < 0)
    assert np.all(values[:, 0] <= 1.0 + 1e-12)
    assert np.all(values[:, -1] >= 0.75 / 8.25 - 1e-12)
    count = values.shape[0] * (values.shape[1] - 1)
    trials["u1 monotonicity"] = count

    # Reordering keeps a permutation, and agrees with per-responder displacement.
    count = 0
    for _ in range(100_000):
        n = int(rng.integers(2, 9))
        order = list(rng.permutation(n))
        j = int(rng.integers(2, n + 1))
        k = int(rng.integers(1, j))
        prop = UltimatumProposal(issuer=order[j - 1], from_position=j, to_position=k,
                                 round=0, horizon=10)
        new_order = apply_ultimatum(order, prop)
        assert sorted(new_order) == list(range(n))
        probe = int(rng.integers(1, n + 1))
        if probe != j:
            assert new_order.index(order[probe - 1]) + 1 == displacement(prop, probe)
        count += 1
    trials["permutation validity"] = count

    # Position 1 never finds a demand to make.
    count = 0
    for _ in range(100_000):
        issuer = make_author(0, u0=float(rng.uniform(0.5, 5)), contributed=float(rng.uniform(0, 1)),
                             position=1)
        assert best_ultimatum(issuer, [], int(rng.integers(0, 10)), 10,
                              DiscountParams(0.0, 0.1)) is None
        count += 1
    trials["position-1 never issues"] = count

    # Simulated rounds: conservation, permutation, monotone clock, closure,
    # and no event ever attributed to the leading author.
    sampler = TableDefaults()
    round_checks = 0
    sims = 0
    while round_checks < 100_000:
        sim_rng = stream(SEED, 900, sims)
        config = sampler(sim_rng)
        state = init_project(config, sim_rng)
        initial_order = list(state.order)
        last_round = state.round
        while not is_complete(state, config):
            step_round(state, config, sim_rng)
            assert state.round == last_round + 1
            last_round = state.round
            assert sorted(state.order) == list(range(config.n_authors))
            assert state.total_contributed == pytest.approx(
                sum(a.contributed for a in state.authors), abs=1e-9)
            round_checks += 1
        for event in state.event_log:
            assert event.outcome is EventOutcome.ACCEPTED
            assert initial_order.index(event.issuer) + 1 > 1
        sims += 1
    trials["conservation/closure rounds"] = round_checks

    check("C9 property suites", all(v >= 100_000 for v in trials.values()),
          f"trials={trials} across {sims} simulated projects")
