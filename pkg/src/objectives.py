"""Value oracles for normalized non-negative submodular set functions.

Every oracle counts the set-function evaluations it performs. `eval` counts 1,
the definitional `marginal_gain` counts 2, and each incremental gain served by
a tracker counts 1.
"""
import copy
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence

import numpy as np

from .config import EXHAUSTIVE_NONNEG_MAX_N, EXHAUSTIVE_SUBMODULAR_MAX_N, TOLERANCE
from .errors import ContractError, DomainError, ParameterError, ValidationError
from .ground import EMPTY, ElementSet, RngState

logger = logging.getLogger(__name__)


class ValueOracle:
    kind: str = ""
    monotone_hint: bool = False

    def __init__(self, n: int):
        self.n = n
        self._calls = 0

    def _check(self, S: ElementSet):
        for u in S:
            if u < 0 or u >= self.n:
                raise DomainError(f"element id {u} outside ground set [0, {self.n})")

    def _value(self, S: ElementSet) -> float:
        raise NotImplementedError

    def eval(self, S: ElementSet) -> float:
        self._check(S)
        self._calls += 1
        return float(self._value(S))

    def marginal_gain(self, u: int, S: ElementSet) -> float:
        if u in S:
            raise ContractError(f"element {u} already in S")
        self._check((u,))
        return self.eval(S | {u}) - self.eval(S)

    def call_count(self) -> int:
        return self._calls

    def reset_count(self):
        self._calls = 0

    def clone(self) -> "ValueOracle":
        """Shallow copy: payload arrays are shared, the counter starts at zero."""
        dup = copy.copy(self)
        dup._calls = 0
        return dup

    def tracker(self) -> "GainTracker":
        return GainTracker(self)

    def to_dict(self) -> dict:
        raise NotImplementedError


class GainTracker:
    """Marginal gains against a growing set S, one counted evaluation per gain.

    The generic form re-evaluates f(S + u) against a cached f(S); kinds with a
    closed-form update override it.
    """

    def __init__(self, oracle: ValueOracle):
        self.oracle = oracle
        self.members: set = set()
        self.value = 0.0
        self._base: Optional[float] = None

    def gain(self, u: int) -> float:
        if self._base is None:
            # f(S) itself is one more evaluation, paid once per addition
            self._base = self.oracle.eval(frozenset(self.members))
        return self.oracle.eval(frozenset(self.members | {u})) - self._base

    def gains(self, us: Sequence[int]) -> np.ndarray:
        return np.array([self.gain(u) for u in us], dtype=float)

    def add(self, u: int):
        self.members.add(u)
        self._base = None


class ModularObjective(ValueOracle):
    kind = "modular"
    monotone_hint = True

    def __init__(self, weights: Sequence[float]):
        w = np.asarray(weights, dtype=float)
        super().__init__(len(w))
        self.weights = w
        self.weights.setflags(write=False)

    def _value(self, S: ElementSet) -> float:
        if not S:
            return 0.0
        return self.weights[list(S)].sum()

    def tracker(self) -> GainTracker:
        return _ModularTracker(self)

    def to_dict(self) -> dict:
        return {"kind": "modular", "weights": self.weights.tolist()}


class _ModularTracker(GainTracker):
    def gain(self, u: int) -> float:
        self.oracle._calls += 1
        return float(self.oracle.weights[u])

    def gains(self, us: Sequence[int]) -> np.ndarray:
        self.oracle._calls += len(us)
        return self.oracle.weights[np.asarray(us, dtype=np.int64)].astype(float)

    def add(self, u: int):
        self.members.add(u)
        self.value += float(self.oracle.weights[u])


class CoverageObjective(ValueOracle):
    """Element u covers the universe items `covers[u]`; f(S) = weight of the union."""

    kind = "coverage"
    monotone_hint = True

    def __init__(self, universe_weights: Sequence[float], covers: Sequence[Sequence[int]]):
        super().__init__(len(covers))
        self.universe_weights = np.asarray(universe_weights, dtype=float)
        self.covers: List[np.ndarray] = [np.unique(np.asarray(c, dtype=np.int64)) for c in covers]
        # flat (owner, item) pairs for batched gains
        sizes = [len(c) for c in self.covers]
        self._owner = np.repeat(np.arange(self.n, dtype=np.int64), sizes)
        self._items = np.concatenate(self.covers) if self.covers else np.zeros(0, dtype=np.int64)

    def _value(self, S: ElementSet) -> float:
        if not S:
            return 0.0
        items = np.unique(np.concatenate([self.covers[u] for u in S]))
        return self.universe_weights[items].sum()

    def tracker(self) -> GainTracker:
        return _CoverageTracker(self)

    def to_dict(self) -> dict:
        return {
            "kind": "coverage",
            "universe_weights": self.universe_weights.tolist(),
            "covers": [c.tolist() for c in self.covers],
        }


class _CoverageTracker(GainTracker):
    def __init__(self, oracle: CoverageObjective):
        super().__init__(oracle)
        self.covered = np.zeros(len(oracle.universe_weights), dtype=bool)

    def gain(self, u: int) -> float:
        self.oracle._calls += 1
        items = self.oracle.covers[u]
        return float(self.oracle.universe_weights[items[~self.covered[items]]].sum())

    def gains(self, us: Sequence[int]) -> np.ndarray:
        f = self.oracle
        f._calls += len(us)
        fresh = f.universe_weights[f._items] * ~self.covered[f._items]
        totals = np.bincount(f._owner, weights=fresh, minlength=f.n)
        return totals[np.asarray(us, dtype=np.int64)]

    def add(self, u: int):
        items = self.oracle.covers[u]
        self.value += float(self.oracle.universe_weights[items[~self.covered[items]]].sum())
        self.covered[items] = True
        self.members.add(u)


class FacilityLocationObjective(ValueOracle):
    """Rows are clients, columns facilities (the ground set).

    f(S) = sum over clients of the best weight among open facilities S, and a
    client with nothing open contributes 0.
    """

    kind = "facility_location"
    monotone_hint = True

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 2:
            w = w.reshape(len(w), -1) if w.size else np.zeros((0, 0))
        super().__init__(w.shape[1])
        self.weights = w
        self.weights.setflags(write=False)

    def _value(self, S: ElementSet) -> float:
        if not S or self.weights.shape[0] == 0:
            return 0.0
        return self.weights[:, sorted(S)].max(axis=1).sum()

    def tracker(self) -> GainTracker:
        return _FacilityTracker(self)

    def to_dict(self) -> dict:
        return {"kind": "facility_location", "weights": self.weights.tolist()}


class _FacilityTracker(GainTracker):
    def __init__(self, oracle: FacilityLocationObjective):
        super().__init__(oracle)
        self.best = np.zeros(oracle.weights.shape[0])

    def gain(self, u: int) -> float:
        self.oracle._calls += 1
        return float(np.maximum(self.oracle.weights[:, u] - self.best, 0.0).sum())

    def gains(self, us: Sequence[int]) -> np.ndarray:
        self.oracle._calls += len(us)
        cols = self.oracle.weights[:, np.asarray(us, dtype=np.int64)]
        return np.maximum(cols - self.best[:, None], 0.0).sum(axis=0)

    def add(self, u: int):
        column = self.oracle.weights[:, u]
        self.value += float(np.maximum(column - self.best, 0.0).sum())
        self.best = np.maximum(self.best, column)
        self.members.add(u)


class GraphCutObjective(ValueOracle):
    """Weight of undirected edges with exactly one endpoint in S (non-monotone)."""

    kind = "graph_cut"
    monotone_hint = False

    def __init__(self, n: int, edges: Sequence[Sequence[float]]):
        super().__init__(n)
        e = np.asarray(edges, dtype=float).reshape(-1, 3)
        self.src = e[:, 0].astype(np.int64)
        self.dst = e[:, 1].astype(np.int64)
        self.w = e[:, 2].copy()
        for a, b in zip(self.src, self.dst):
            if not (0 <= a < n and 0 <= b < n):
                raise DomainError(f"edge ({a}, {b}) outside ground set [0, {n})")
            if a == b:
                raise DomainError(f"self-loop at {a}")
        # adjacency in CSR form, both directions
        heads = np.concatenate([self.src, self.dst])
        tails = np.concatenate([self.dst, self.src])
        weights = np.concatenate([self.w, self.w])
        order = np.argsort(heads, kind="stable")
        self._nbr = tails[order]
        self._nbr_w = weights[order]
        self._indptr = np.concatenate([[0], np.cumsum(np.bincount(heads, minlength=n))]).astype(np.int64)
        self.degree = np.bincount(heads, weights=weights, minlength=n).astype(float)

    def _value(self, S: ElementSet) -> float:
        if not S or len(self.w) == 0:
            return 0.0
        inside = np.zeros(self.n, dtype=bool)
        inside[list(S)] = True
        return self.w[inside[self.src] != inside[self.dst]].sum()

    def neighbours(self, u: int):
        lo, hi = self._indptr[u], self._indptr[u + 1]
        return self._nbr[lo:hi], self._nbr_w[lo:hi]

    def tracker(self) -> GainTracker:
        return _CutTracker(self)

    def to_dict(self) -> dict:
        return {
            "kind": "graph_cut",
            "n": self.n,
            "edges": [[int(a), int(b), float(w)] for a, b, w in zip(self.src, self.dst, self.w)],
        }


class _CutTracker(GainTracker):
    def __init__(self, oracle: GraphCutObjective):
        super().__init__(oracle)
        self.to_inside = np.zeros(oracle.n)

    def gain(self, u: int) -> float:
        self.oracle._calls += 1
        return float(self.oracle.degree[u] - 2.0 * self.to_inside[u])

    def gains(self, us: Sequence[int]) -> np.ndarray:
        self.oracle._calls += len(us)
        idx = np.asarray(us, dtype=np.int64)
        return self.oracle.degree[idx] - 2.0 * self.to_inside[idx]

    def add(self, u: int):
        self.value += float(self.oracle.degree[u] - 2.0 * self.to_inside[u])
        nbr, w = self.oracle.neighbours(u)
        np.add.at(self.to_inside, nbr, w)
        self.members.add(u)


class ShiftedObjective(ValueOracle):
    """h(X) = f(X | fixed). Not normalized unless f(fixed) = 0."""

    kind = "shifted"

    def __init__(self, base: ValueOracle, fixed: ElementSet):
        super().__init__(base.n)
        base._check(fixed)
        self.base = base
        self.fixed = frozenset(fixed)
        self.monotone_hint = base.monotone_hint

    def _value(self, S: ElementSet) -> float:
        return self.base._value(S | self.fixed)

    def to_dict(self) -> dict:
        return {"kind": "shifted", "base": self.base.to_dict(), "fixed": sorted(self.fixed)}


def shifted(f: ValueOracle, fixed: ElementSet) -> ShiftedObjective:
    return ShiftedObjective(f, fixed)


def call_count(f: ValueOracle) -> int:
    return f.call_count()


def reset_count(f: ValueOracle):
    f.reset_count()


# ---------------------------------------------------------------------------
# Schema


def _non_negative(values, field: str):
    for i, v in enumerate(values):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ValidationError(f"{field}[{i}]", f"expected a number, got {v!r}")
        if not math.isfinite(v):
            raise ValidationError(f"{field}[{i}]", f"weight must be finite, got {v}")
        if v < 0:
            raise ValidationError(f"{field}[{i}]", f"weight must be non-negative, got {v}")


def build_objective(spec: dict, n: Optional[int] = None, prefix: str = "") -> ValueOracle:
    """Construct an oracle from its JSON description, validating every weight."""
    kind = spec.get("kind")
    if kind == "modular":
        weights = spec.get("weights")
        if not isinstance(weights, list):
            raise ValidationError(f"{prefix}weights", "expected a list")
        _non_negative(weights, f"{prefix}weights")
        f = ModularObjective(weights)
    elif kind == "coverage":
        uw = spec.get("universe_weights")
        covers = spec.get("covers")
        if not isinstance(uw, list):
            raise ValidationError(f"{prefix}universe_weights", "expected a list")
        if not isinstance(covers, list):
            raise ValidationError(f"{prefix}covers", "expected a list")
        _non_negative(uw, f"{prefix}universe_weights")
        for u, items in enumerate(covers):
            if not isinstance(items, list):
                raise ValidationError(f"{prefix}covers[{u}]", "expected a list of item ids")
            for j, item in enumerate(items):
                if not isinstance(item, int) or not 0 <= item < len(uw):
                    raise ValidationError(f"{prefix}covers[{u}][{j}]", f"item {item!r} not in universe")
        f = CoverageObjective(uw, covers)
    elif kind == "facility_location":
        rows = spec.get("weights")
        if not isinstance(rows, list):
            raise ValidationError(f"{prefix}weights", "expected a list of rows")
        for i, row in enumerate(rows):
            if not isinstance(row, list):
                raise ValidationError(f"{prefix}weights[{i}]", f"expected a list of client weights, got {row!r}")
        width = len(rows[0]) if rows else (n or 0)
        for i, row in enumerate(rows):
            if len(row) != width:
                raise ValidationError(f"{prefix}weights[{i}]", f"expected {width} columns, got {len(row)}")
            _non_negative(row, f"{prefix}weights[{i}]")
        f = FacilityLocationObjective(rows if rows else np.zeros((0, width)))
    elif kind == "graph_cut":
        size = spec.get("n", n)
        if not isinstance(size, int) or size < 0:
            raise ValidationError(f"{prefix}n", f"expected a non-negative integer, got {size!r}")
        edges = spec.get("edges", [])
        if not isinstance(edges, list):
            raise ValidationError(f"{prefix}edges", "expected a list")
        for i, edge in enumerate(edges):
            if not isinstance(edge, list) or len(edge) != 3:
                raise ValidationError(f"{prefix}edges[{i}]", f"expected [u, v, w], got {edge!r}")
            a, b, w = edge
            for end in (a, b):
                if not isinstance(end, int) or not 0 <= end < size:
                    raise ValidationError(f"{prefix}edges[{i}]", f"endpoint {end!r} outside [0, {size})")
            if a == b:
                raise ValidationError(f"{prefix}edges[{i}]", f"self-loop at {a}")
            if not isinstance(w, (int, float)) or isinstance(w, bool) or not math.isfinite(w) or w < 0:
                raise ValidationError(f"{prefix}edges[{i}]", f"weight must be non-negative, got {w}")
        f = GraphCutObjective(size, edges)
    else:
        raise ValidationError(f"{prefix}kind", f"unknown objective kind {kind!r}")
    if n is not None and f.n != n:
        raise ValidationError(f"{prefix}kind", f"objective covers {f.n} elements, instance has n={n}")
    return f


# ---------------------------------------------------------------------------
# Property verifiers


@dataclass
class PropertyReport:
    passed: bool
    trials: int
    worst_violation: float
    witness: Optional[tuple] = None


def _as_tuple(mask: int) -> tuple:
    return tuple(u for u in range(mask.bit_length()) if mask >> u & 1)


def _value_table(f: ValueOracle) -> List[float]:
    return [f.eval(frozenset(_as_tuple(m))) for m in range(1 << f.n)]


def _masks_in_order(n: int) -> List[int]:
    out = []
    for size in range(n + 1):
        for combo in combinations(range(n), size):
            out.append(sum(1 << u for u in combo))
    return out


def _random_subset(rng: RngState, pool: np.ndarray, q: float = 0.5) -> frozenset:
    keep = rng.generator.random(len(pool)) < q
    return frozenset(int(u) for u in pool[keep])


def _report(checks: int, worst: float, witness) -> PropertyReport:
    return PropertyReport(passed=worst >= -TOLERANCE, trials=checks, worst_violation=worst, witness=witness)


def verify_submodularity(
    f: ValueOracle,
    trials: int,
    rng: RngState,
    exhaustive: Optional[bool] = None,
    form: str = "diminishing",
) -> PropertyReport:
    """Check diminishing returns on chains A <= B, u outside B (or the lattice
    inequality f(X) + f(Y) >= f(X & Y) + f(X | Y) with `form="lattice"`).

    `witness` is the first violation in enumeration order; `worst_violation`
    is the most negative gap seen.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if form not in ("diminishing", "lattice"):
        raise ParameterError(f"unknown submodularity form {form!r}")
    if exhaustive is None:
        exhaustive = f.n <= EXHAUSTIVE_SUBMODULAR_MAX_N
    worst = 0.0
    witness = None
    checks = 0

    def note(gap, w):
        nonlocal worst, witness
        if gap < -TOLERANCE and witness is None:
            witness = w
        worst = min(worst, gap)

    if exhaustive:
        n = f.n
        table = _value_table(f)
        order = _masks_in_order(n)
        if form == "lattice":
            for x in order:
                for y in order:
                    checks += 1
                    note(table[x] + table[y] - table[x & y] - table[x | y], (_as_tuple(x), _as_tuple(y)))
        else:
            for a in order:
                for b in order:
                    if b & a != a:
                        continue
                    for u in range(n):
                        bit = 1 << u
                        if b & bit:
                            continue
                        checks += 1
                        gap = (table[a | bit] - table[a]) - (table[b | bit] - table[b])
                        note(gap, (_as_tuple(a), _as_tuple(b), u))
        return _report(checks, worst, witness)

    pool = np.arange(f.n)
    for _ in range(trials):
        if form == "lattice":
            x = _random_subset(rng, pool)
            y = _random_subset(rng, pool)
            gap = f.eval(x) + f.eval(y) - f.eval(x & y) - f.eval(x | y)
            checks += 1
            note(gap, (tuple(sorted(x)), tuple(sorted(y))))
            continue
        b = _random_subset(rng, pool)
        outside = np.array(sorted(set(range(f.n)) - b), dtype=np.int64)
        if outside.size == 0:
            continue
        a = _random_subset(rng, np.array(sorted(b), dtype=np.int64))
        u = int(outside[rng.generator.integers(outside.size)])
        gap = f.marginal_gain(u, a) - f.marginal_gain(u, b)
        checks += 1
        note(gap, (tuple(sorted(a)), tuple(sorted(b)), u))
    return _report(checks, worst, witness)


def verify_nonneg_normalized(
    f: ValueOracle, trials: int, rng: RngState, exhaustive: Optional[bool] = None
) -> PropertyReport:
    """f(empty) must be 0 and every f(S) non-negative."""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if exhaustive is None:
        exhaustive = f.n <= EXHAUSTIVE_NONNEG_MAX_N
    at_empty = f.eval(EMPTY)
    worst = -abs(at_empty)
    witness = ((),) if abs(at_empty) > TOLERANCE else None
    checks = 1
    if exhaustive:
        subsets = (frozenset(_as_tuple(m)) for m in _masks_in_order(f.n))
    else:
        pool = np.arange(f.n)
        subsets = (_random_subset(rng, pool) for _ in range(trials))
    for S in subsets:
        value = f.eval(S)
        checks += 1
        if value < -TOLERANCE and witness is None:
            witness = (tuple(sorted(S)),)
        worst = min(worst, value)
    return _report(checks, worst, witness)


def verify_monotone(f: ValueOracle, trials: int, rng: RngState, exhaustive: Optional[bool] = None) -> PropertyReport:
    """f(A) <= f(B) for A <= B, checked through single-element steps."""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if exhaustive is None:
        exhaustive = f.n <= EXHAUSTIVE_SUBMODULAR_MAX_N
    worst = 0.0
    witness = None
    checks = 0
    if exhaustive:
        table = _value_table(f)
        for a in _masks_in_order(f.n):
            for u in range(f.n):
                bit = 1 << u
                if a & bit:
                    continue
                checks += 1
                gap = table[a | bit] - table[a]
                if gap < -TOLERANCE and witness is None:
                    witness = (_as_tuple(a), _as_tuple(a | bit))
                worst = min(worst, gap)
        return _report(checks, worst, witness)
    pool = np.arange(f.n)
    for _ in range(trials):
        b = _random_subset(rng, pool)
        a = _random_subset(rng, np.array(sorted(b), dtype=np.int64))
        gap = f.eval(b) - f.eval(a)
        checks += 1
        if gap < -TOLERANCE and witness is None:
            witness = (tuple(sorted(a)), tuple(sorted(b)))
        worst = min(worst, gap)
    return _report(checks, worst, witness)
