"""Independence systems: uniform and partition matroids, their intersections,
and exhaustive verifiers for the matroid and k-extendible axioms."""
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import EXTENDIBLE_VERIFY_MAX_N, MATROID_VERIFY_MAX_N
from .errors import CapacityError, ContractError, DomainError, ValidationError
from .ground import ElementSet

logger = logging.getLogger(__name__)


class IndependenceSystem:
    """Independence oracle over the ground set [0, n).

    Instances are immutable; per-run incremental state lives in the tracker
    returned by `tracker()`.
    """

    kind: str = ""

    def __init__(self, n: int):
        if n < 0:
            raise DomainError(f"ground-set size must be non-negative, got {n}")
        self.n = n

    @property
    def k(self) -> int:
        return self.extendibility()

    def _check(self, S: ElementSet):
        for u in S:
            if u < 0 or u >= self.n:
                raise DomainError(f"element id {u} outside ground set [0, {self.n})")

    def is_independent(self, S: ElementSet) -> bool:
        self._check(S)
        return self._independent(S)

    def can_extend(self, S: ElementSet, u: int) -> bool:
        self._check(S)
        self._check((u,))
        if u in S:
            raise ContractError(f"element {u} already in S")
        return self._independent(S | {u})

    def _independent(self, S: ElementSet) -> bool:
        raise NotImplementedError

    def rank_upper_bound(self) -> int:
        raise NotImplementedError

    def extendibility(self) -> int:
        return 1

    def tracker(self) -> "FeasibilityTracker":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class FeasibilityTracker:
    """Incremental feasibility state for one solver run."""

    def can_add(self, u: int) -> bool:
        raise NotImplementedError

    def add(self, u: int):
        raise NotImplementedError


class UniformMatroid(IndependenceSystem):
    kind = "uniform"

    def __init__(self, n: int, r: int):
        super().__init__(n)
        if r < 0:
            raise DomainError(f"uniform capacity must be non-negative, got {r}")
        self.r = r

    def _independent(self, S: ElementSet) -> bool:
        return len(S) <= self.r

    def rank_upper_bound(self) -> int:
        return self.r

    def tracker(self) -> FeasibilityTracker:
        return _UniformTracker(self.r)

    def to_dict(self) -> dict:
        return {"kind": "uniform", "r": self.r}

    def __repr__(self):
        return f"UniformMatroid(n={self.n}, r={self.r})"


class _UniformTracker(FeasibilityTracker):
    def __init__(self, r: int):
        self.r = r
        self.size = 0

    def can_add(self, u: int) -> bool:
        return self.size < self.r

    def add(self, u: int):
        self.size += 1


class PartitionMatroid(IndependenceSystem):
    """Blocks must be disjoint and cover [0, n); block i admits `capacities[i]` members."""

    kind = "partition"

    def __init__(self, n: int, blocks: Sequence[Tuple[Sequence[int], int]]):
        super().__init__(n)
        block_of = np.full(n, -1, dtype=np.int64)
        members: List[ElementSet] = []
        capacities: List[int] = []
        for i, (block, cap) in enumerate(blocks):
            block = frozenset(int(u) for u in block)
            if cap < 0:
                raise DomainError(f"block {i} capacity must be non-negative, got {cap}")
            for u in sorted(block):
                if u < 0 or u >= n:
                    raise DomainError(f"block {i} member {u} outside ground set [0, {n})")
                if block_of[u] >= 0:
                    raise DomainError(f"blocks overlap at {u}")
                block_of[u] = i
            members.append(block)
            capacities.append(int(cap))
        uncovered = np.flatnonzero(block_of < 0)
        if uncovered.size:
            raise DomainError(f"blocks do not cover element {int(uncovered[0])}")
        self.blocks: Tuple[ElementSet, ...] = tuple(members)
        self.capacities: Tuple[int, ...] = tuple(capacities)
        self.block_of = block_of
        self.block_of.setflags(write=False)

    def _independent(self, S: ElementSet) -> bool:
        counts: Dict[int, int] = {}
        for u in S:
            b = int(self.block_of[u])
            counts[b] = counts.get(b, 0) + 1
            if counts[b] > self.capacities[b]:
                return False
        return True

    def rank_upper_bound(self) -> int:
        return sum(self.capacities)

    def tracker(self) -> FeasibilityTracker:
        return _PartitionTracker(self)

    def to_dict(self) -> dict:
        return {
            "kind": "partition",
            "blocks": [
                {"members": sorted(b), "capacity": c} for b, c in zip(self.blocks, self.capacities)
            ],
        }

    def __repr__(self):
        return f"PartitionMatroid(n={self.n}, blocks={len(self.blocks)}, rank<={self.rank_upper_bound()})"


class _PartitionTracker(FeasibilityTracker):
    def __init__(self, sys: PartitionMatroid):
        self.block_of = sys.block_of.tolist()
        self.capacities = sys.capacities
        self.counts = [0] * len(sys.capacities)

    def can_add(self, u: int) -> bool:
        b = self.block_of[u]
        return self.counts[b] < self.capacities[b]

    def add(self, u: int):
        self.counts[self.block_of[u]] += 1


class Intersection(IndependenceSystem):
    """Conjunction of matroids over one ground set; k = number of matroids."""

    kind = "intersection"

    def __init__(self, members: Sequence[IndependenceSystem]):
        if not members:
            raise DomainError("intersection needs at least one member")
        n = members[0].n
        flat: List[IndependenceSystem] = []
        for i, m in enumerate(members):
            if m.n != n:
                raise DomainError(f"member {i} has ground-set size {m.n}, expected {n}")
            # nested intersections flatten into their matroids
            flat.extend(m.members if isinstance(m, Intersection) else [m])
        super().__init__(n)
        self.members: Tuple[IndependenceSystem, ...] = tuple(flat)

    def _independent(self, S: ElementSet) -> bool:
        return all(m._independent(S) for m in self.members)

    def rank_upper_bound(self) -> int:
        return min(m.rank_upper_bound() for m in self.members)

    def extendibility(self) -> int:
        return len(self.members)

    def tracker(self) -> FeasibilityTracker:
        return _IntersectionTracker([m.tracker() for m in self.members])

    def to_dict(self) -> dict:
        return {"kind": "intersection", "members": [m.to_dict() for m in self.members]}

    def __repr__(self):
        return f"Intersection(n={self.n}, k={self.k}, members={list(self.members)})"


class _IntersectionTracker(FeasibilityTracker):
    def __init__(self, trackers: List[FeasibilityTracker]):
        self.trackers = trackers

    def can_add(self, u: int) -> bool:
        return all(t.can_add(u) for t in self.trackers)

    def add(self, u: int):
        for t in self.trackers:
            t.add(u)


def intersect(members: Sequence[IndependenceSystem]) -> Intersection:
    return Intersection(members)


def build_constraint(spec: dict, n: int, prefix: str = "") -> IndependenceSystem:
    """Construct a system from its JSON description; errors name the offending field."""
    if not isinstance(spec, dict):
        raise ValidationError(prefix.rstrip(".") or "constraint", f"expected an object, got {spec!r}")
    kind = spec.get("kind")
    if kind == "uniform":
        r = spec.get("r")
        if not isinstance(r, int) or isinstance(r, bool) or r < 0:
            raise ValidationError(f"{prefix}r", f"expected a non-negative integer, got {r!r}")
        return UniformMatroid(n, r)
    if kind == "partition":
        blocks = spec.get("blocks")
        if not isinstance(blocks, list):
            raise ValidationError(f"{prefix}blocks", "expected a list")
        seen = set()
        parsed = []
        for i, block in enumerate(blocks):
            if not isinstance(block, dict):
                raise ValidationError(f"{prefix}blocks[{i}]", f"expected an object, got {block!r}")
            cap = block.get("capacity")
            if not isinstance(cap, int) or isinstance(cap, bool) or cap < 0:
                raise ValidationError(f"{prefix}blocks[{i}].capacity", f"expected a non-negative integer, got {cap!r}")
            members = block.get("members")
            if not isinstance(members, list):
                raise ValidationError(f"{prefix}blocks[{i}].members", "expected a list")
            for j, u in enumerate(members):
                if not isinstance(u, int) or not 0 <= u < n:
                    raise ValidationError(f"{prefix}blocks[{i}].members[{j}]", f"id {u!r} outside [0, {n})")
                if u in seen:
                    raise ValidationError(f"{prefix}blocks", f"blocks overlap at {u}")
                seen.add(u)
            parsed.append((members, cap))
        missing = sorted(set(range(n)) - seen)
        if missing:
            raise ValidationError(f"{prefix}blocks", f"blocks do not cover element {missing[0]}")
        return PartitionMatroid(n, parsed)
    if kind == "intersection":
        members = spec.get("members")
        if not isinstance(members, list) or not members:
            raise ValidationError(f"{prefix}members", "expected a non-empty list")
        return Intersection(
            [build_constraint(m, n, prefix=f"{prefix}members[{i}].") for i, m in enumerate(members)]
        )
    raise ValidationError(f"{prefix}kind", f"unknown constraint kind {kind!r}")


def is_independent(sys: IndependenceSystem, S: ElementSet) -> bool:
    return sys.is_independent(S)


def can_extend(sys: IndependenceSystem, S: ElementSet, u: int) -> bool:
    return sys.can_extend(S, u)


def rank_upper_bound(sys: IndependenceSystem) -> int:
    return sys.rank_upper_bound()


def extendibility(sys: IndependenceSystem) -> int:
    return sys.extendibility()


# ---------------------------------------------------------------------------
# Exhaustive verifiers. Subsets are bitmasks internally and are enumerated by
# size, then lexicographically, so the first counterexample is deterministic.


@dataclass
class AxiomReport:
    passed: bool
    counterexample: Optional[dict] = None
    checks_performed: int = 0
    notes: List[str] = field(default_factory=list)


def _bits(mask: int) -> Tuple[int, ...]:
    out = []
    u = 0
    while mask:
        if mask & 1:
            out.append(u)
        mask >>= 1
        u += 1
    return tuple(out)


def _masks_by_size(n: int) -> List[int]:
    order = []
    for size in range(n + 1):
        for combo in combinations(range(n), size):
            m = 0
            for u in combo:
                m |= 1 << u
            order.append(m)
    return order


def _independence_table(sys, order: List[int]) -> List[bool]:
    table = [False] * (1 << sys.n)
    for m in order:
        table[m] = bool(sys.is_independent(frozenset(_bits(m))))
    return table


def verify_matroid_axioms(sys) -> AxiomReport:
    """Check the three matroid axioms over every subset of the ground set.

    The exchange axiom is checked for |B| = |A| + 1, which is equivalent to the
    general form once downward closure holds (and closure is checked first).
    """
    n = sys.n
    if n > MATROID_VERIFY_MAX_N:
        raise CapacityError(f"matroid verification is exhaustive; n={n} exceeds {MATROID_VERIFY_MAX_N}")
    order = _masks_by_size(n)
    table = _independence_table(sys, order)
    checks = 1
    if not table[0]:
        return AxiomReport(False, {"axiom": "empty", "set": ()}, checks)

    independent_by_size: List[List[int]] = [[] for _ in range(n + 1)]
    for m in order:
        if table[m]:
            independent_by_size[bin(m).count("1")].append(m)

    for size in range(1, n + 1):
        for b in independent_by_size[size]:
            for u in _bits(b):
                checks += 1
                a = b & ~(1 << u)
                if not table[a]:
                    return AxiomReport(
                        False, {"axiom": "downward_closed", "A": _bits(a), "B": _bits(b)}, checks
                    )

    for size in range(n):
        for a in independent_by_size[size]:
            extendable = 0
            for u in range(n):
                bit = 1 << u
                if not a & bit and table[a | bit]:
                    extendable |= bit
            for b in independent_by_size[size + 1]:
                checks += 1
                if (b & ~a) & extendable == 0:
                    return AxiomReport(False, {"axiom": "exchange", "A": _bits(a), "B": _bits(b)}, checks)
    logger.debug(f"matroid axioms hold for {sys!r} ({checks} checks)")
    return AxiomReport(True, None, checks)


def verify_k_extendible(sys, k: int, skip_u_in_b: bool = True) -> AxiomReport:
    """Exhaustively check that `sys` is k-extendible.

    For every independent A, every independent B strictly containing A and
    every u outside A with A + u independent, some X inside B - A with
    |X| <= k must make (B - X) + u independent. With `skip_u_in_b`, triples
    where u already lies in B are skipped; otherwise they are checked too.
    """
    n = sys.n
    if n > EXTENDIBLE_VERIFY_MAX_N:
        raise CapacityError(f"k-extendibility verification is exhaustive; n={n} exceeds {EXTENDIBLE_VERIFY_MAX_N}")
    order = _masks_by_size(n)
    table = _independence_table(sys, order)
    independent = [m for m in order if table[m]]
    checks = 0
    for a in independent:
        candidates = [u for u in range(n) if not a >> u & 1 and table[a | 1 << u]]
        if not candidates:
            continue
        for b in independent:
            if b == a or b & a != a:
                continue
            diff = _bits(b & ~a)
            for u in candidates:
                bit = 1 << u
                if b & bit and skip_u_in_b:
                    continue
                checks += 1
                if not _exists_exchange(table, b, bit, diff, k):
                    witness = {"A": _bits(a), "B": _bits(b), "u": u}
                    logger.debug(f"{k}-extendibility fails for {sys!r} at {witness}")
                    return AxiomReport(False, witness, checks)
    return AxiomReport(True, None, checks)


def _exists_exchange(table: List[bool], b: int, bit: int, diff: Tuple[int, ...], k: int) -> bool:
    for size in range(min(k, len(diff)) + 1):
        for removed in combinations(diff, size):
            x = 0
            for u in removed:
                x |= 1 << u
            if table[(b & ~x) | bit]:
                return True
    return False
