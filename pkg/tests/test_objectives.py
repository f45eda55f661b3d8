"""Value oracles: evaluation, marginals, call counting and property verifiers."""
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import ContractError, DomainError, ValidationError
from src.ground import seeded_rng
from src.instances import GenSpec, generate_instance
from src.objectives import (
    CoverageObjective,
    FacilityLocationObjective,
    GraphCutObjective,
    ModularObjective,
    build_objective,
    call_count,
    reset_count,
    shifted,
    verify_monotone,
    verify_nonneg_normalized,
    verify_submodularity,
)

from conftest import CountingOracle, NegativePlant, SupermodularPlant


def shipped_oracles():
    return [
        ModularObjective([10.0, 7.0, 3.0, 0.0, 1.5]),
        CoverageObjective([1.0, 2.0, 1.0, 0.5], [[0, 1], [1, 2], [3], [0, 3], [2]]),
        FacilityLocationObjective([[3, 1, 0, 2], [0, 2, 1, 1], [1, 1, 4, 0]]),
        GraphCutObjective(5, [[0, 1, 5.0], [1, 2, 4.0], [2, 3, 1.0], [3, 4, 2.5], [0, 4, 0.5]]),
    ]


def test_facility_location_eval():
    f = FacilityLocationObjective([[3, 1], [0, 2]])
    assert f.eval(frozenset({0})) == 3.0
    assert f.eval(frozenset({0, 1})) == 5.0


def test_coverage_eval_counts_union_once():
    # items a, b, c as 0, 1, 2
    f = CoverageObjective([1.0, 1.0, 1.0], [[0, 1], [1, 2]])
    assert f.eval(frozenset({0, 1})) == 3.0


@pytest.mark.parametrize("f", shipped_oracles(), ids=lambda f: f.kind)
def test_normalized(f):
    assert f.eval(frozenset()) == 0.0


def test_out_of_range_element_is_a_domain_error():
    with pytest.raises(DomainError):
        ModularObjective([1.0]).eval(frozenset({1}))


def test_cut_marginals_show_non_monotonicity(path_cut):
    assert path_cut.marginal_gain(1, frozenset()) == 9.0
    assert path_cut.marginal_gain(1, frozenset({0})) == -1.0


def test_modular_marginal(modular_103):
    assert modular_103.marginal_gain(2, frozenset({0, 1})) == 3.0


def test_marginal_of_a_member_is_a_contract_error(modular_103):
    with pytest.raises(ContractError):
        modular_103.marginal_gain(0, frozenset({0}))


def test_call_counting(modular_103):
    assert call_count(modular_103) == 0
    modular_103.eval(frozenset({0}))
    modular_103.eval(frozenset({1}))
    assert call_count(modular_103) == 2
    modular_103.marginal_gain(2, frozenset({0}))
    assert call_count(modular_103) == 4
    modular_103.tracker().gain(1)
    assert call_count(modular_103) == 5
    reset_count(modular_103)
    assert call_count(modular_103) == 0


def test_batched_gains_count_one_per_element(path_cut):
    tracker = path_cut.tracker()
    tracker.gains([0, 1, 2])
    assert path_cut.call_count() == 3


def test_clone_shares_payload_with_fresh_counter(modular_103):
    modular_103.eval(frozenset({0}))
    dup = modular_103.clone()
    assert dup.call_count() == 0
    assert dup.weights is modular_103.weights
    dup.eval(frozenset({1}))
    assert modular_103.call_count() == 1


def test_counter_matches_definitional_evaluations(modular_103):
    f = CountingOracle(modular_103)
    f.eval(frozenset({0}))
    f.marginal_gain(1, frozenset({0}))
    tracker = f.tracker()
    tracker.gain(0)
    tracker.gain(1)
    tracker.add(0)
    tracker.gain(2)
    # generic tracker: f(S) once per addition, then one per gain
    assert f.call_count() == f.definitional == 3 + 3 + 2


@pytest.mark.parametrize("f", shipped_oracles(), ids=lambda f: f.kind)
def test_incremental_gains_match_definition(f):
    rng = seeded_rng(5)
    for _ in range(20):
        order = rng.generator.permutation(f.n).tolist()
        tracker = f.tracker()
        members = set()
        for u in order:
            expected = f.marginal_gain(u, frozenset(members))
            assert tracker.gain(u) == pytest.approx(expected, abs=1e-9)
            batched = tracker.gains([u])
            assert batched[0] == pytest.approx(expected, abs=1e-9)
            if rng.generator.random() < 0.5:
                tracker.add(u)
                members.add(u)
        assert tracker.value == pytest.approx(f.eval(frozenset(members)), abs=1e-9)


@pytest.mark.parametrize("f", shipped_oracles(), ids=lambda f: f.kind)
def test_shipped_kinds_pass_exhaustive_verification(f):
    rng = seeded_rng(0)
    assert verify_submodularity(f, 1000, rng).passed
    assert verify_submodularity(f, 1, rng, form="lattice", exhaustive=True).passed
    assert verify_nonneg_normalized(f, 1000, rng).passed
    assert verify_monotone(f, 1000, rng).passed == f.monotone_hint


@pytest.mark.parametrize("family", ["random-coverage", "random-facility-location", "random-cut"])
def test_generated_oracles_pass_sampled_verification(family):
    f, _ = generate_instance(GenSpec(family, n=40, k=2, r=5, seed=9)).build()
    rng = seeded_rng(1)
    report = verify_submodularity(f, 1000, rng)
    assert report.passed and report.trials > 0
    assert verify_nonneg_normalized(f, 1000, rng).passed


def test_supermodular_plant_is_caught_with_first_witness():
    report = verify_submodularity(SupermodularPlant(4), 10, seeded_rng(0), exhaustive=True)
    assert not report.passed
    assert report.witness == ((), (0,), 1)
    assert report.worst_violation < 0


def test_supermodular_plant_fails_lattice_form():
    report = verify_submodularity(SupermodularPlant(3), 10, seeded_rng(0), form="lattice")
    assert not report.passed


def test_negative_plant_fails_non_negativity():
    report = verify_nonneg_normalized(NegativePlant(3), 10, seeded_rng(0))
    assert not report.passed
    assert report.witness == ((0,),)


def test_all_zero_modular_passes():
    f = ModularObjective([0.0, 0.0, 0.0])
    assert verify_nonneg_normalized(f, 10, seeded_rng(0)).passed
    assert f.eval(frozenset({0, 1, 2})) == 0.0


def test_cut_is_not_monotone(path_cut):
    report = verify_monotone(path_cut, 10, seeded_rng(0))
    assert not report.passed


def test_shifted_oracle_adds_the_fixed_set(path_cut):
    h = shifted(path_cut, frozenset({1}))
    assert h.eval(frozenset()) == 9.0
    assert h.eval(frozenset({0})) == 4.0


def test_build_objective_examples():
    assert build_objective({"kind": "modular", "weights": [10, 7, 3]}).eval(frozenset({0, 1, 2})) == 20.0
    empty_cut = build_objective({"kind": "graph_cut", "n": 4, "edges": []})
    assert all(empty_cut.eval(frozenset(c)) == 0.0 for size in range(5) for c in combinations(range(4), size))
    cov = build_objective({"kind": "coverage", "universe_weights": [2, 1], "covers": [[0], [0, 1]]})
    assert cov.eval(frozenset({1})) == 3.0


def test_monotone_hints():
    assert build_objective({"kind": "modular", "weights": [1]}).monotone_hint
    assert build_objective({"kind": "facility_location", "weights": [[1]]}).monotone_hint
    assert not build_objective({"kind": "graph_cut", "n": 2, "edges": [[0, 1, 1]]}).monotone_hint


def test_negative_weight_names_its_field():
    with pytest.raises(ValidationError) as info:
        build_objective({"kind": "modular", "weights": [-1]})
    assert info.value.field == "weights[0]"


@pytest.mark.parametrize(
    "spec, field",
    [
        ({"kind": "graph_cut", "n": 2, "edges": [[0, 0, 1.0]]}, "edges[0]"),
        ({"kind": "graph_cut", "n": 2, "edges": [[0, 2, 1.0]]}, "edges[0]"),
        ({"kind": "coverage", "universe_weights": [1], "covers": [[1]]}, "covers[0][0]"),
        ({"kind": "facility_location", "weights": [[1, 2], [3]]}, "weights[1]"),
        ({"kind": "spline"}, "kind"),
    ],
)
def test_build_objective_rejects(spec, field):
    with pytest.raises(ValidationError) as info:
        build_objective(spec)
    assert info.value.field == field


def test_to_dict_rebuilds_the_same_function():
    for f in shipped_oracles():
        g = build_objective(f.to_dict())
        for size in range(f.n + 1):
            for combo in combinations(range(f.n), size):
                assert g.eval(frozenset(combo)) == pytest.approx(f.eval(frozenset(combo)))


@pytest.mark.property_based
@given(
    st.lists(st.lists(st.integers(0, 5), max_size=4), min_size=1, max_size=6),
    st.lists(st.floats(0, 10, allow_nan=False), min_size=6, max_size=6),
)
@settings(max_examples=100, deadline=None)
def test_coverage_diminishing_returns(covers, weights):
    f = CoverageObjective(weights, covers)
    report = verify_submodularity(f, 1, seeded_rng(0), exhaustive=True)
    assert report.passed
    assert np.isclose(f.eval(frozenset()), 0.0)
