"""Built-in verification corpus driven by the `verify` verb."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .constraints import (
    IndependenceSystem,
    PartitionMatroid,
    UniformMatroid,
    intersect,
    verify_k_extendible,
    verify_matroid_axioms,
)
from .ground import seeded_rng
from .instances import GenSpec, generate_instance
from .objectives import (
    CoverageObjective,
    FacilityLocationObjective,
    GraphCutObjective,
    ModularObjective,
    ValueOracle,
    shifted,
    verify_monotone,
    verify_nonneg_normalized,
    verify_submodularity,
)
from .solvers import brute_force_opt
from .trials import claim1_check

logger = logging.getLogger(__name__)

CLAIM_PROBABILITIES = (0.25, 1.0 / 3.0, 0.5)


@dataclass
class ConstraintEntry:
    name: str
    system: IndependenceSystem
    claimed_k: int
    matroid: bool


@dataclass
class ObjectiveEntry:
    """An oracle to verify. With `claim_system`, the random-subset bound is
    also checked for h(X) = f(X | F), F the optimum under that system."""

    name: str
    oracle: ValueOracle
    claim_system: Optional[IndependenceSystem] = None


@dataclass
class Failure:
    check: str
    subject: str
    witness: object


def exchange_failure_pair() -> IndependenceSystem:
    """Two partition matroids on {0,1,2} whose intersection is 2- but not 1-extendible."""
    m1 = PartitionMatroid(3, [([0, 1], 1), ([2], 1)])
    m2 = PartitionMatroid(3, [([0, 2], 1), ([1], 1)])
    return intersect([m1, m2])


def path_cut() -> GraphCutObjective:
    return GraphCutObjective(3, [[0, 1, 5.0], [1, 2, 4.0]])


def default_corpus() -> List[object]:
    entries: List[object] = [
        ConstraintEntry("uniform(n=6,r=3)", UniformMatroid(6, 3), 1, True),
        ConstraintEntry(
            "partition(n=6)", PartitionMatroid(6, [([0, 1, 2], 2), ([3, 4], 1), ([5], 1)]), 1, True
        ),
        ConstraintEntry("exchange-pair", exchange_failure_pair(), 2, False),
        ConstraintEntry(
            "intersection(3 x uniform)",
            intersect([UniformMatroid(6, 2), UniformMatroid(6, 3), UniformMatroid(6, 4)]),
            3,
            False,
        ),
    ]
    generated = generate_instance(GenSpec("random-coverage", n=8, k=2, r=3, seed=11))
    entries.append(ConstraintEntry("random 2-partition intersection", generated.build()[1], 2, False))

    entries += [
        ObjectiveEntry("modular", ModularObjective([10.0, 7.0, 3.0, 0.0, 1.5])),
        ObjectiveEntry(
            "coverage",
            CoverageObjective([1.0, 2.0, 1.0, 0.5], [[0, 1], [1, 2], [3], [0, 3], [2]]),
        ),
        ObjectiveEntry("facility-location", FacilityLocationObjective([[3, 1, 0], [0, 2, 1], [1, 1, 4]])),
        ObjectiveEntry("path-cut", path_cut()),
    ]
    for family, seed in (("random-cut", 3), ("random-facility-location", 5)):
        spec = generate_instance(GenSpec(family, n=8, k=2, r=3, seed=seed))
        f, sys = spec.build()
        entries.append(ObjectiveEntry(spec.name, f, claim_system=sys if family == "random-cut" else None))
    return entries


def verify_corpus(
    entries: Sequence[object], exhaustive: bool = True, trials: int = 1000, seed: int = 0, claim_trials: int = 10_000
) -> List[Failure]:
    failures: List[Failure] = []
    for i, entry in enumerate(entries):
        if isinstance(entry, ConstraintEntry):
            if entry.matroid:
                report = verify_matroid_axioms(entry.system)
                if not report.passed:
                    failures.append(Failure("matroid axioms", entry.name, report.counterexample))
            report = verify_k_extendible(entry.system, entry.claimed_k)
            if not report.passed:
                failures.append(Failure(f"{entry.claimed_k}-extendible", entry.name, report.counterexample))
            logger.info(f"constraint {entry.name}: checked")
            continue

        f = entry.oracle
        rng = seeded_rng(seed, i)
        mode = None if exhaustive else False
        checks = [
            ("submodularity", verify_submodularity(f, trials, rng, exhaustive=mode)),
            ("normalized non-negative", verify_nonneg_normalized(f, trials, rng, exhaustive=mode)),
        ]
        if f.monotone_hint:
            checks.append(("monotone", verify_monotone(f, trials, rng, exhaustive=mode)))
        for name, report in checks:
            if not report.passed:
                failures.append(Failure(name, entry.name, report.witness))
        if entry.claim_system is not None and all(report.passed for _, report in checks):
            failures.extend(_claim_failures(entry, rng, claim_trials))
        logger.info(f"objective {entry.name}: checked")
    return failures


def _claim_failures(entry: ObjectiveEntry, rng, claim_trials: int) -> List[Failure]:
    f = entry.oracle
    best = brute_force_opt(f.clone(), entry.claim_system).solution
    out = []
    for p in CLAIM_PROBABILITIES:
        report = claim1_check(shifted(f, best), p, claim_trials, rng)
        if not report.passed:
            out.append(Failure(f"random-subset bound p={p:.4g}", entry.name, (report.mean, report.bound)))
    return out
