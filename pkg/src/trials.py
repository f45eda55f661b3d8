"""Seeded repeated trials, expectation estimates and the random-subset check."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import BRUTE_FORCE_MAX_N, THREADS, TOLERANCE
from .constraints import IndependenceSystem
from .errors import ConfigError, ParameterError
from .ground import EMPTY, RngState, derive_seed, sample_subset, seeded_rng
from .instances import InstanceSpec
from .objectives import ValueOracle
from .report import ResultRow, ratio_of
from .solvers import (
    SolverConfig,
    SolverResult,
    approximation_bound,
    brute_force_opt,
    default_p,
    greedy,
    sample_greedy,
    sample_greedy_bound,
    sdtga,
)
from .storage import Storage, instance_fingerprint

logger = logging.getLogger(__name__)


@dataclass
class StatReport:
    trials: int
    mean: float
    std_error: float
    bound: float
    passed: bool


def stat_report(samples, bound: float) -> StatReport:
    x = np.asarray(samples, dtype=float)
    count = len(x)
    mean = float(x.mean()) if count else 0.0
    se = float(x.std(ddof=1) / math.sqrt(count)) if count > 1 else 0.0
    return StatReport(count, mean, se, bound, mean - 3.0 * se >= bound - TOLERANCE)


def claim1_check(h: ValueOracle, p: float, trials: int, rng: RngState) -> StatReport:
    """Monte-Carlo check of E[h(S)] >= (1 - p) h(empty) for S ~ Bernoulli(p)."""
    if trials < 100:
        raise ParameterError(f"claim check needs at least 100 trials, got {trials}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    bound = (1.0 - p) * h.eval(EMPTY)
    samples = [h.eval(sample_subset(h.n, p, rng)) for _ in range(trials)]
    return stat_report(samples, bound)


def _run_sdtga(f, sys, cfg: SolverConfig) -> SolverResult:
    return sdtga(f, sys, cfg)


def _run_greedy(f, sys, cfg: SolverConfig) -> SolverResult:
    result = greedy(f, sys)
    result.seed = cfg.seed
    return result


def _run_sample_greedy(f, sys, cfg: SolverConfig) -> SolverResult:
    return sample_greedy(f, sys, cfg.p, seeded_rng(cfg.seed, cfg.stream))


def _run_brute_force(f, sys, cfg: SolverConfig) -> SolverResult:
    result = brute_force_opt(f, sys)
    result.seed = cfg.seed
    return result


ALGORITHMS: Dict[str, Callable[[ValueOracle, IndependenceSystem, SolverConfig], SolverResult]] = {
    "sdtga": _run_sdtga,
    "greedy": _run_greedy,
    "sample_greedy": _run_sample_greedy,
    "brute_force": _run_brute_force,
}


def guarantee(algorithm: str, p: Optional[float], k: int, epsilon: float, monotone: bool) -> float:
    """Expected-ratio floor each algorithm is held to when OPT is known."""
    if algorithm == "sdtga":
        return approximation_bound(default_p(k) if p is None else p, k, epsilon, monotone)
    if algorithm == "sample_greedy":
        return sample_greedy_bound(k)
    if algorithm == "greedy":
        return 1.0 / (1.0 + k) if monotone else 0.0
    return 1.0


def resolve_opt(spec: InstanceSpec, store: Optional[Storage] = None) -> Optional[float]:
    """OPT for the instance: recorded value, cached value, or a fresh brute force when n allows."""
    if spec.opt_value is not None:
        return spec.opt_value
    if spec.n > BRUTE_FORCE_MAX_N:
        return None
    fingerprint = instance_fingerprint(spec)
    if store is not None:
        cached = store.get_opt(fingerprint)
        if cached is not None:
            logger.debug(f"OPT for {spec.name} from cache: {cached[0]}")
            spec.with_opt(cached[0])
            return spec.opt_value
    f, sys = spec.build()
    result = brute_force_opt(f.clone(), sys)
    logger.info(f"brute-force OPT for {spec.name}: {result.value:.6g} at {sorted(result.solution)}")
    if store is not None:
        store.put_opt(fingerprint, spec.name, spec.n, result.value, result.solution)
    spec.with_opt(result.value)
    return spec.opt_value


@dataclass
class TrialSummary:
    report: StatReport
    metrics: Dict[str, StatReport]
    rows: List[ResultRow]
    results: List[SolverResult] = field(default_factory=list, repr=False)


def run_trials(
    algorithm: str,
    instance: InstanceSpec,
    cfg: SolverConfig,
    trials: int,
    workers: Optional[int] = None,
) -> TrialSummary:
    """Run `trials` independent seeded runs and aggregate them by trial index.

    Trial i uses seed derive_seed(cfg.seed, i), recorded in its row. Each trial
    gets a cloned oracle, so counters are never shared between threads.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; expected one of {', '.join(ALGORITHMS)}")
    run = ALGORITHMS[algorithm]
    f, sys = instance.build()
    opt = instance.opt_value

    def one(index: int) -> Tuple[int, SolverResult]:
        trial_cfg = replace(cfg, seed=derive_seed(cfg.seed, index), stream=0)
        return index, run(f.clone(), sys, trial_cfg)

    workers = workers or THREADS
    if workers > 1 and trials > 1:
        with ThreadPoolExecutor(max_workers=min(workers, trials)) as pool:
            outcomes = list(pool.map(one, range(trials)))
    else:
        outcomes = [one(i) for i in range(trials)]
    outcomes.sort(key=lambda item: item[0])
    results = [r for _, r in outcomes]
    # record the p a sampling run actually used, so each row replays on its own
    p = cfg.p
    if p is None and algorithm in ("sdtga", "sample_greedy"):
        p = default_p(sys.k)

    rows = [
        ResultRow(
            instance=instance.name,
            algorithm=algorithm,
            p=p,
            epsilon=cfg.epsilon,
            seed=r.seed if r.seed is not None else cfg.seed,
            value=r.value,
            opt=opt,
            ratio=ratio_of(r.value, opt),
            oracle_calls=r.oracle_calls,
            rounds=r.rounds,
            sample_size=r.sample_size,
            elapsed_ms=r.elapsed * 1000.0,
        )
        for r in results
    ]
    metrics = {
        "value": stat_report([r.value for r in results], 0.0),
        "oracle_calls": stat_report([r.oracle_calls for r in results], 0.0),
        "rounds": stat_report([r.rounds for r in results], 0.0),
    }
    report = metrics["value"]
    if opt is not None and opt > 0:
        bound = guarantee(algorithm, cfg.p, sys.k, cfg.epsilon, f.monotone_hint)
        metrics["ratio"] = stat_report([r.value / opt for r in results], bound)
        report = metrics["ratio"]
    logger.debug(
        f"{algorithm} on {instance.name}: {trials} trials, mean={report.mean:.6g} se={report.std_error:.3g}"
    )
    return TrialSummary(report, metrics, rows, results)
