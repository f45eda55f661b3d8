"""Sample decreasing-threshold greedy and its baselines.

All solvers take a value oracle and an independence system over the same
ground set and report oracle calls measured on the oracle's counter.
"""
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import BRUTE_FORCE_MAX_N, TOLERANCE
from .constraints import IndependenceSystem
from .errors import CapacityError, ConfigError, DomainError, SolverError
from .ground import EMPTY, ElementSet, RngState, sample_subset, seeded_rng
from .objectives import ValueOracle

logger = logging.getLogger(__name__)


def default_p(k: int) -> float:
    return 1.0 / (1.0 + k)


def round_bound(r: int, epsilon: float) -> int:
    """Largest number of threshold rounds: ceil(ln(r/eps) / ln(1/(1-eps)))."""
    return math.ceil(math.log(r / epsilon) / math.log(1.0 / (1.0 - epsilon)))


def loose_round_bound(r: int, epsilon: float) -> int:
    return math.ceil(math.log(r / epsilon) / epsilon)


def expected_oracle_budget(n: int, p: float, r: int, epsilon: float) -> float:
    """Acceptance budget on oracle calls: 2 * (p*n/eps) * ln(r/eps)."""
    return 2.0 * (p * n / epsilon) * math.log(r / epsilon)


def threshold_ratio(p: float, k: int, epsilon: float) -> float:
    """Guaranteed E[f(S)] / E[f(S | OPT)] for the threshold schedule."""
    pr_max = max(p * k, 1.0 - p)
    return (1.0 - epsilon) * p / ((1.0 - epsilon ** 2) * p + pr_max)


def approximation_bound(p: float, k: int, epsilon: float, monotone: bool) -> float:
    """Expected approximation guarantee of SDTGA against OPT.

    For p <= 1/(1+k): p - eps (monotone), p(1-p) - eps (otherwise). Larger p
    falls back to 1/(1+k) - eps, times (1-p) for non-monotone objectives.
    """
    if p <= default_p(k) + TOLERANCE:
        return p - epsilon if monotone else p * (1.0 - p) - epsilon
    base = default_p(k) - epsilon
    return base if monotone else base * (1.0 - p)


def sample_greedy_bound(k: int) -> float:
    return k / (1.0 + k) ** 2


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters. `p=None` means 1/(1+k); `r=None` means the constraint's rank bound."""

    p: Optional[float] = None
    epsilon: float = 0.1
    r: Optional[int] = None
    seed: int = 0
    stream: int = 0
    r_source: str = "constraint"
    allow_large_p: bool = False

    def resolve(self, sys: IndependenceSystem) -> "SolverConfig":
        p = default_p(sys.k) if self.p is None else self.p
        if self.r is None:
            return replace(self, p=p, r=max(1, sys.rank_upper_bound()), r_source="constraint")
        return replace(self, p=p, r_source="override")

    def validate(self, k: int):
        if self.p is None or not 0.0 < self.p <= 1.0:
            raise ConfigError(f"p must lie in (0, 1], got {self.p}")
        if not 0.0 < self.epsilon < self.p:
            raise ConfigError(f"epsilon must be < p (and > 0), got epsilon={self.epsilon}, p={self.p}")
        if self.p > default_p(k) + TOLERANCE and not self.allow_large_p:
            raise ConfigError(
                f"p={self.p} exceeds 1/(1+k)={default_p(k):.6g}; pass allow_large_p for diagnostic runs"
            )
        if self.r is None or self.r < 1:
            raise ConfigError(f"r must be >= 1, got {self.r}")


@dataclass
class SolverTrace:
    d: float = 0.0
    theta_sequence: List[float] = field(default_factory=list)
    additions: List[Tuple[int, int, float]] = field(default_factory=list)
    removals: List[Tuple[int, int, str]] = field(default_factory=list)


@dataclass
class SolverResult:
    algorithm: str
    solution: ElementSet
    value: float
    oracle_calls: int
    rounds: int
    sample_size: int
    elapsed: float
    seed: Optional[int] = None
    trace: Optional[SolverTrace] = None


def _check_pair(f: ValueOracle, sys: IndependenceSystem):
    if f.n != sys.n:
        raise DomainError(f"objective has n={f.n} but constraint has n={sys.n}")


def _finish(name, f, sys, solution, calls, rounds, sample_size, start, seed=None, trace=None) -> SolverResult:
    solution = frozenset(solution)
    if not sys.is_independent(solution):
        raise SolverError(f"{name} returned a dependent set {sorted(solution)}")
    # post-hoc value check; not charged to the run
    value = f.eval(solution)
    elapsed = time.perf_counter() - start
    logger.debug(
        f"{name}: |S|={len(solution)} value={value:.6g} calls={calls} rounds={rounds} "
        f"|R|={sample_size} in {elapsed * 1000:.1f}ms"
    )
    return SolverResult(name, solution, value, calls, rounds, sample_size, elapsed, seed, trace)


def sdtga(f: ValueOracle, sys: IndependenceSystem, cfg: SolverConfig) -> SolverResult:
    """Sample decreasing-threshold greedy.

    Elements are sampled into R with probability p; thresholds run from
    d = max f({u}) over R down to (eps/r) d by factors of (1 - eps). Within a
    round, survivors are scanned in ascending id order: infeasible ones are
    dropped, ones clearing the threshold join S, and ones whose gain fell
    below (eps/r) d are dropped as negligible.
    """
    _check_pair(f, sys)
    cfg = cfg.resolve(sys)
    cfg.validate(sys.k)
    start = time.perf_counter()
    base_calls = f.call_count()
    rng = seeded_rng(cfg.seed, cfg.stream)
    sample = sample_subset(sys.n, cfg.p, rng)
    trace = SolverTrace()

    def done(solution, rounds):
        return _finish(
            "sdtga", f, sys, solution, f.call_count() - base_calls, rounds, len(sample), start, cfg.seed, trace
        )

    if not sample:
        return done(EMPTY, 0)
    d = max(f.eval(frozenset((u,))) for u in sorted(sample))
    trace.d = d
    if d <= 0:
        # every sampled singleton is worthless; by submodularity so is every extension
        return done(EMPTY, 0)

    floor = cfg.epsilon / cfg.r * d
    cap = round_bound(cfg.r, cfg.epsilon)
    feasible = sys.tracker()
    gains = f.tracker()
    alive = set(sample)
    solution: List[int] = []
    theta = d
    rounds = 0
    while alive and theta >= floor and rounds < cap:
        trace.theta_sequence.append(theta)
        for u in sorted(alive):
            if not feasible.can_add(u):
                alive.discard(u)
                trace.removals.append((rounds, u, "infeasible"))
                continue
            gain = gains.gain(u)
            if gain >= theta:
                solution.append(u)
                feasible.add(u)
                gains.add(u)
                alive.discard(u)
                trace.additions.append((rounds, u, gain))
                trace.removals.append((rounds, u, "added"))
            elif gain < floor:
                alive.discard(u)
                trace.removals.append((rounds, u, "negligible"))
        rounds += 1
        theta *= 1.0 - cfg.epsilon
    if len(solution) > cfg.r:
        raise SolverError(f"solution size {len(solution)} exceeds r={cfg.r}; r must bound the rank")
    return done(solution, rounds)


def greedy(f: ValueOracle, sys: IndependenceSystem, candidates: Optional[Sequence[int]] = None) -> SolverResult:
    """Repeatedly add the feasible candidate of largest positive gain (ties: smallest id)."""
    _check_pair(f, sys)
    start = time.perf_counter()
    base_calls = f.call_count()
    pool = sorted(set(candidates)) if candidates is not None else list(range(sys.n))
    feasible = sys.tracker()
    gains = f.tracker()
    alive = list(pool)
    solution: List[int] = []
    steps = 0
    while alive:
        # an element infeasible now stays infeasible as S grows
        alive = [u for u in alive if feasible.can_add(u)]
        if not alive:
            break
        steps += 1
        values = gains.gains(alive)
        best = int(np.argmax(values))
        if values[best] <= TOLERANCE:
            break
        u = alive.pop(best)
        solution.append(u)
        feasible.add(u)
        gains.add(u)
    return _finish("greedy", f, sys, solution, f.call_count() - base_calls, steps, len(pool), start)


def sample_greedy(
    f: ValueOracle, sys: IndependenceSystem, p: Optional[float] = None, rng: Optional[RngState] = None
) -> SolverResult:
    """Greedy restricted to a Bernoulli(p) sample of the ground set."""
    p = default_p(sys.k) if p is None else p
    if not 0.0 < p <= 1.0:
        raise ConfigError(f"p must lie in (0, 1], got {p}")
    rng = rng or seeded_rng(0)
    sample = sample_subset(sys.n, p, rng)
    result = greedy(f, sys, candidates=sample)
    result.algorithm = "sample_greedy"
    result.seed = rng.seed
    return result


def brute_force_opt(f: ValueOracle, sys: IndependenceSystem) -> SolverResult:
    """Exact maximum over all independent sets.

    Ties go to the smallest set, then the lexicographically smallest among
    sets of that size.
    """
    _check_pair(f, sys)
    n = sys.n
    if n > BRUTE_FORCE_MAX_N:
        raise CapacityError(f"brute force refuses n={n} > {BRUTE_FORCE_MAX_N}")
    start = time.perf_counter()
    base_calls = f.call_count()
    best = [f.eval(EMPTY), ()]
    visited = 1

    # depth-first in ascending ids visits sets in lexicographic order;
    # dependent sets are pruned with all their supersets
    def visit(current: Tuple[int, ...], first: int):
        nonlocal visited
        for u in range(first, n):
            candidate = current + (u,)
            members = frozenset(candidate)
            if not sys.is_independent(members):
                continue
            visited += 1
            value = f.eval(members)
            if value > best[0] + TOLERANCE or (
                value >= best[0] - TOLERANCE and len(candidate) < len(best[1])
            ):
                best[0], best[1] = value, candidate
            visit(candidate, u + 1)

    visit((), 0)
    logger.debug(f"brute force visited {visited} independent sets")
    return _finish("brute_force", f, sys, best[1], f.call_count() - base_calls, 0, n, start)


def replay_trace(f: ValueOracle, trace: SolverTrace) -> Tuple[ElementSet, float]:
    """Re-apply recorded additions, checking each gain against its round's threshold."""
    gains = f.tracker()
    members: List[int] = []
    for round_index, u, recorded in trace.additions:
        gain = gains.gain(u)
        theta = trace.theta_sequence[round_index]
        if abs(gain - recorded) > TOLERANCE * max(1.0, abs(recorded)):
            raise SolverError(f"replayed gain {gain} of {u} differs from recorded {recorded}")
        if gain < theta - TOLERANCE:
            raise SolverError(f"element {u} added with gain {gain} below threshold {theta}")
        gains.add(u)
        members.append(u)
    solution = frozenset(members)
    return solution, f.eval(solution)
