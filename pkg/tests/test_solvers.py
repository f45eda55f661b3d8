"""SDTGA, the greedy baselines and the brute-force optimum."""
import math

import pytest

from src.constraints import UniformMatroid, intersect, PartitionMatroid
from src.errors import CapacityError, ConfigError, SolverError
from src.ground import sample_subset, seeded_rng
from src.instances import GenSpec, generate_instance
from src.objectives import ModularObjective
from src.solvers import (
    SolverConfig,
    approximation_bound,
    brute_force_opt,
    default_p,
    expected_oracle_budget,
    greedy,
    threshold_ratio,
    loose_round_bound,
    replay_trace,
    round_bound,
    sample_greedy,
    sample_greedy_bound,
    sdtga,
)

from conftest import assert_round_bound

FULL = dict(p=1.0, epsilon=0.1, allow_large_p=True)


def small_instances():
    return [
        generate_instance(GenSpec("random-coverage", n=10, k=2, r=3, seed=1)),
        generate_instance(GenSpec("random-facility-location", n=9, k=2, r=3, seed=2)),
        generate_instance(GenSpec("random-cut", n=10, k=2, r=3, seed=3)),
        generate_instance(GenSpec("random-modular", n=12, k=1, r=4, seed=4)),
    ]


def test_hand_traced_threshold_schedule(modular_103):
    result = sdtga(modular_103, UniformMatroid(3, 2), SolverConfig(**FULL))
    assert result.solution == frozenset({0, 1})
    assert result.value == 17.0
    assert result.rounds == 5
    assert result.sample_size == 3
    assert result.trace.d == 10.0
    assert result.trace.theta_sequence == pytest.approx([10.0, 9.0, 8.1, 7.29, 6.561])
    assert result.trace.additions == [(0, 0, 10.0), (4, 1, 7.0)]
    assert (4, 2, "infeasible") in result.trace.removals
    # 3 singleton evaluations, then 3 + 2 + 2 + 2 + 1 incremental gains
    assert result.oracle_calls == 13


def test_empty_ground_set():
    result = sdtga(ModularObjective([]), UniformMatroid(0, 0), SolverConfig())
    assert (result.solution, result.value, result.rounds, result.sample_size) == (frozenset(), 0.0, 0, 0)


def test_empty_sample_returns_empty_solution(modular_103):
    seed = next(s for s in range(200) if not sample_subset(3, 0.01, seeded_rng(s, 0)))
    result = sdtga(modular_103, UniformMatroid(3, 2), SolverConfig(p=0.01, epsilon=0.005, seed=seed))
    assert result.solution == frozenset()
    assert result.value == 0.0
    assert result.rounds == 0
    assert result.oracle_calls == 0


def test_worthless_singletons_return_empty():
    result = sdtga(ModularObjective([0.0, 0.0]), UniformMatroid(2, 1), SolverConfig(**FULL))
    assert result.solution == frozenset()
    assert result.rounds == 0


@pytest.mark.parametrize(
    "cfg, message",
    [
        (SolverConfig(p=0.2, epsilon=0.3), "epsilon must be < p"),
        (SolverConfig(p=0.2, epsilon=0.0), "epsilon must be < p"),
        (SolverConfig(p=1.5, epsilon=0.1, allow_large_p=True), "p must lie in"),
        (SolverConfig(p=0.0, epsilon=0.1), "p must lie in"),
        (SolverConfig(p=0.9, epsilon=0.1), "exceeds 1/\\(1\\+k\\)"),
    ],
)
def test_config_errors(modular_103, cfg, message):
    with pytest.raises(ConfigError, match=message):
        sdtga(modular_103, UniformMatroid(3, 2), cfg)


def test_rank_is_resolved_from_the_constraint():
    sys = intersect([UniformMatroid(4, 3), PartitionMatroid(4, [([0, 1], 1), ([2, 3], 1)])])
    cfg = SolverConfig().resolve(sys)
    assert cfg.r == 2 and cfg.r_source == "constraint"
    assert cfg.p == pytest.approx(1.0 / 3.0)
    assert SolverConfig(r=7).resolve(sys).r_source == "override"
    assert SolverConfig().resolve(UniformMatroid(3, 0)).r == 1


def test_undersized_rank_override_is_caught(modular_103):
    with pytest.raises(SolverError):
        sdtga(modular_103, UniformMatroid(3, 3), SolverConfig(r=1, **FULL))


@pytest.mark.parametrize("spec", small_instances(), ids=lambda s: s.name)
@pytest.mark.parametrize("epsilon", [0.05, 0.2])
def test_run_invariants(spec, epsilon):
    f, sys = spec.build()
    p = default_p(sys.k)
    for seed in range(15):
        cfg = SolverConfig(p=p, epsilon=epsilon, seed=seed)
        result = sdtga(f.clone(), sys, cfg)
        r = max(1, sys.rank_upper_bound())
        assert sys.is_independent(result.solution)
        assert_round_bound(result, r, epsilon)
        assert result.rounds <= loose_round_bound(r, epsilon)
        assert result.oracle_calls <= result.sample_size + result.rounds * result.sample_size

        trace = result.trace
        thetas = trace.theta_sequence
        for a, b in zip(thetas, thetas[1:]):
            assert b == pytest.approx(a * (1.0 - epsilon))
            assert b < a
        if thetas:
            assert thetas[0] == trace.d
            assert thetas[-1] >= epsilon / r * trace.d - 1e-12
        running = 0.0
        for round_index, _, gain in trace.additions:
            assert gain >= thetas[round_index]
            assert gain > 0
            running += gain
        assert running == pytest.approx(result.value, abs=1e-9)

        solution, value = replay_trace(f.clone(), trace)
        assert solution == result.solution
        assert value == pytest.approx(result.value, abs=1e-9)


def test_replay_rejects_a_tampered_trace(modular_103):
    result = sdtga(modular_103, UniformMatroid(3, 2), SolverConfig(**FULL))
    trace = result.trace
    trace.additions[1] = (0, 1, 7.0)
    with pytest.raises(SolverError):
        replay_trace(modular_103.clone(), trace)


@pytest.mark.parametrize("spec", small_instances()[:3], ids=lambda s: s.name)
def test_full_sampling_is_seed_independent(spec):
    f, sys = spec.build()
    runs = [sdtga(f.clone(), sys, SolverConfig(seed=seed, **FULL)) for seed in range(5)]
    assert len({r.solution for r in runs}) == 1
    assert len({r.value for r in runs}) == 1
    assert len({r.oracle_calls for r in runs}) == 1


@pytest.mark.parametrize("seed", range(6))
def test_refining_the_threshold_grid_never_loses_value(seed):
    # (1 - coarse) = (1 - fine)^m, so every coarse threshold is also a fine one
    spec = generate_instance(GenSpec("random-modular", n=20, k=1, r=6, seed=seed))
    f, sys = spec.build()
    values = [
        sdtga(f.clone(), sys, SolverConfig(epsilon=1.0 - 0.9 ** m, seed=seed)).value for m in (4, 2, 1)
    ]
    assert values[0] <= values[1] + 1e-9 <= values[2] + 2e-9


def test_greedy_examples(modular_103, path_cut):
    result = greedy(modular_103, UniformMatroid(3, 2))
    assert result.solution == frozenset({0, 1}) and result.value == 17.0
    result = greedy(path_cut, UniformMatroid(3, 3))
    assert result.solution == frozenset({1}) and result.value == 9.0
    empty = greedy(ModularObjective([]), UniformMatroid(0, 0))
    assert empty.solution == frozenset() and empty.value == 0.0


def test_greedy_ties_go_to_smallest_id():
    result = greedy(ModularObjective([5.0, 5.0, 5.0]), UniformMatroid(3, 1))
    assert result.solution == frozenset({0})


def test_sample_greedy_at_full_probability_is_greedy():
    for spec in small_instances():
        f, sys = spec.build()
        assert sample_greedy(f.clone(), sys, 1.0, seeded_rng(3)).solution == greedy(f.clone(), sys).solution


def test_sample_greedy_with_empty_sample(modular_103):
    seed = next(s for s in range(200) if not sample_subset(3, 0.01, seeded_rng(s)))
    result = sample_greedy(modular_103, UniformMatroid(3, 2), 0.01, seeded_rng(seed))
    assert result.solution == frozenset() and result.value == 0.0


def test_brute_force_examples(modular_103, path_cut):
    assert brute_force_opt(modular_103, UniformMatroid(3, 2)).value == 17.0
    result = brute_force_opt(path_cut, UniformMatroid(3, 3))
    assert result.value == 9.0
    assert result.solution == frozenset({1})
    zero = brute_force_opt(ModularObjective([0.0, 0.0, 0.0]), UniformMatroid(3, 2))
    assert zero.value == 0.0 and zero.solution == frozenset()


def test_brute_force_refuses_large_ground_sets():
    with pytest.raises(CapacityError):
        brute_force_opt(ModularObjective([1.0] * 21), UniformMatroid(21, 2))


@pytest.mark.parametrize("spec", small_instances(), ids=lambda s: s.name)
def test_no_solver_beats_the_optimum(spec):
    f, sys = spec.build()
    opt = brute_force_opt(f.clone(), sys)
    assert sys.is_independent(opt.solution)
    for seed in range(5):
        cfg = SolverConfig(seed=seed)
        assert sdtga(f.clone(), sys, cfg).value <= opt.value + 1e-9
        assert sample_greedy(f.clone(), sys, rng=seeded_rng(seed)).value <= opt.value + 1e-9
    assert greedy(f.clone(), sys).value <= opt.value + 1e-9


def test_bound_helpers():
    assert round_bound(2, 0.1) == 29
    assert loose_round_bound(2, 0.1) == 30
    assert approximation_bound(1 / 3, 2, 0.05, True) == pytest.approx(1 / 3 - 0.05)
    assert approximation_bound(1 / 3, 2, 0.05, False) == pytest.approx(0.17222, abs=1e-5)
    assert approximation_bound(0.5, 2, 0.05, True) == pytest.approx(1 / 3 - 0.05)
    assert approximation_bound(0.5, 2, 0.05, False) == pytest.approx((1 / 3 - 0.05) * 0.5)
    assert threshold_ratio(1 / 3, 2, 0.0) == pytest.approx(1 / 3)
    assert sample_greedy_bound(2) == pytest.approx(2 / 9)
    assert expected_oracle_budget(100, 0.5, 10, 0.1) == pytest.approx(1000 * math.log(100))
    for r in (1, 5, 100):
        for eps in (0.01, 0.05, 0.3):
            assert round_bound(r, eps) <= loose_round_bound(r, eps)
