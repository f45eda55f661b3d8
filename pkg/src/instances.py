"""Instance files (JSON) and synthetic instance families."""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .constraints import IndependenceSystem, build_constraint
from .errors import DomainError, InstanceParseError, ParameterError, ValidationError
from .ground import RngState, seeded_rng
from .objectives import ValueOracle, build_objective

logger = logging.getLogger(__name__)

OPT_PROVENANCE = "brute_force_opt"

FAMILIES = ("random-coverage", "random-facility-location", "random-cut", "random-modular")

# fixed sub-stream per family so (family, parameters, seed) alone fixes an instance
_FAMILY_STREAM = {name: i + 1 for i, name in enumerate(FAMILIES)}


@dataclass
class InstanceSpec:
    name: str
    n: int
    objective: Dict[str, Any]
    constraint: Dict[str, Any]
    opt_value: Optional[float] = None
    opt_provenance: Optional[str] = None
    labels: Optional[List[str]] = None
    _built: Optional[Tuple[ValueOracle, IndependenceSystem]] = field(
        default=None, repr=False, compare=False
    )

    def build(self) -> Tuple[ValueOracle, IndependenceSystem]:
        """Oracle and constraint for this instance (cached; clone the oracle per run)."""
        if self._built is None:
            try:
                f = build_objective(self.objective, n=self.n, prefix="objective.")
                sys = build_constraint(self.constraint, self.n, prefix="constraint.")
            except DomainError as e:
                raise ValidationError("instance", str(e)) from e
            self._built = (f, sys)
        return self._built

    def to_dict(self) -> dict:
        data = {
            "name": self.name,
            "n": self.n,
            "labels": self.labels,
            "objective": self.objective,
            "constraint": self.constraint,
            "opt_value": self.opt_value,
            "opt_provenance": self.opt_provenance,
        }
        return {k: v for k, v in data.items() if v is not None}

    def with_opt(self, value: float) -> "InstanceSpec":
        self.opt_value = float(value)
        self.opt_provenance = OPT_PROVENANCE
        return self


def _remap(spec: Any, labels: Dict[str, int], where: str) -> Any:
    """Replace string labels with dense ids in the fields that name elements."""
    def resolve(x, field_name):
        if isinstance(x, str):
            if x not in labels:
                raise ValidationError(field_name, f"unknown label {x!r}")
            return labels[x]
        return x

    # malformed shapes pass through untouched; build_* rejects them with a field path
    if not isinstance(spec, dict):
        return spec
    spec = dict(spec)
    kind = spec.get("kind")
    if kind == "partition" and isinstance(spec.get("blocks"), list):
        spec["blocks"] = [
            {**b, "members": [resolve(u, f"{where}blocks[{i}].members[{j}]") for j, u in enumerate(b["members"])]}
            if isinstance(b, dict) and isinstance(b.get("members"), list)
            else b
            for i, b in enumerate(spec["blocks"])
        ]
    elif kind == "intersection" and isinstance(spec.get("members"), list):
        spec["members"] = [_remap(m, labels, f"{where}members[{i}].") for i, m in enumerate(spec["members"])]
    elif kind == "graph_cut" and isinstance(spec.get("edges"), list):
        spec["edges"] = [
            [resolve(e[0], f"{where}edges[{i}]"), resolve(e[1], f"{where}edges[{i}]"), *e[2:]]
            if isinstance(e, list) and len(e) == 3
            else e
            for i, e in enumerate(spec["edges"])
        ]
    return spec


def instance_from_dict(data: dict, default_name: str = "instance") -> InstanceSpec:
    if not isinstance(data, dict):
        raise ValidationError("(root)", "expected a JSON object")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ValidationError("n", f"expected a non-negative integer, got {n!r}")
    for key in ("objective", "constraint"):
        if not isinstance(data.get(key), dict):
            raise ValidationError(key, "expected an object")
    objective, constraint = data["objective"], data["constraint"]
    labels = data.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or len(labels) != n or len(set(labels)) != n:
            raise ValidationError("labels", f"expected {n} distinct labels")
        index = {str(label): i for i, label in enumerate(labels)}
        objective = _remap(objective, index, "objective.")
        constraint = _remap(constraint, index, "constraint.")
    opt = data.get("opt_value")
    provenance = data.get("opt_provenance")
    if opt is not None:
        if not isinstance(opt, (int, float)) or isinstance(opt, bool) or not math.isfinite(opt) or opt < 0:
            raise ValidationError("opt_value", f"expected a non-negative number, got {opt!r}")
        if provenance != OPT_PROVENANCE:
            raise ValidationError("opt_provenance", f"opt_value must come from {OPT_PROVENANCE}")
    spec = InstanceSpec(
        name=str(data.get("name", default_name)),
        n=n,
        objective=objective,
        constraint=constraint,
        opt_value=None if opt is None else float(opt),
        opt_provenance=provenance if opt is not None else None,
        labels=labels,
    )
    spec.build()
    return spec


def load_instance(path: str) -> InstanceSpec:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except UnicodeDecodeError as e:
        raise InstanceParseError(f"{path}: not UTF-8 text at byte {e.start}") from e
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"{path}: malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    spec = instance_from_dict(data, default_name=p.stem)
    logger.debug(f"loaded instance {spec.name} (n={spec.n}) from {path}")
    return spec


def write_instance(spec: InstanceSpec, path: str):
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Synthetic families


@dataclass(frozen=True)
class GenSpec:
    family: str
    n: int
    k: int = 1
    r: Optional[int] = None
    density: Optional[float] = None
    universe: Optional[int] = None
    clients: Optional[int] = None
    seed: int = 0


def _weights(rng: RngState, size, low: float, high: float) -> np.ndarray:
    return np.round(rng.generator.uniform(low, high, size), 4)


def _random_constraint(n: int, k: int, r: int, rng: RngState) -> dict:
    """Uniform(r) for k = 1, otherwise k random partition matroids with r unit blocks each."""
    if k == 1:
        return {"kind": "uniform", "r": r}
    members = []
    for _ in range(k):
        owner = rng.generator.integers(0, r, n)
        blocks = [{"members": np.flatnonzero(owner == b).tolist(), "capacity": 1} for b in range(r)]
        members.append({"kind": "partition", "blocks": blocks})
    return {"kind": "intersection", "members": members}


def generate_instance(gen: GenSpec, rng: Optional[RngState] = None) -> InstanceSpec:
    if gen.family not in FAMILIES:
        raise ParameterError(f"unknown family {gen.family!r}; expected one of {', '.join(FAMILIES)}")
    if gen.n < 0 or gen.k < 1:
        raise ParameterError(f"need n >= 0 and k >= 1, got n={gen.n}, k={gen.k}")
    rng = rng or seeded_rng(gen.seed, _FAMILY_STREAM[gen.family])
    n = gen.n
    r = gen.r if gen.r is not None else max(1, n // 3)

    if gen.family == "random-modular":
        objective = {"kind": "modular", "weights": _weights(rng, n, 0.0, 10.0).tolist()}
    elif gen.family == "random-coverage":
        universe = gen.universe or max(30, 3 * n)
        density = gen.density if gen.density is not None else 0.1
        weights = _weights(rng, universe, 0.5, 1.5).tolist()
        covers = []
        sizes = np.maximum(rng.generator.binomial(universe, density, n), 1)
        for size in sizes:
            covers.append(sorted(rng.generator.choice(universe, int(size), replace=False).tolist()))
        objective = {"kind": "coverage", "universe_weights": weights, "covers": covers}
    elif gen.family == "random-facility-location":
        clients = gen.clients or 2 * n
        objective = {"kind": "facility_location", "weights": _weights(rng, (clients, n), 0.0, 1.0).tolist()}
    else:
        density = gen.density if gen.density is not None else 0.3
        edges = []
        for a in range(n):
            keep = rng.generator.random(n - a - 1) < density
            for b in np.flatnonzero(keep) + a + 1:
                edges.append([a, int(b), float(_weights(rng, None, 1.0, 10.0))])
        objective = {"kind": "graph_cut", "n": n, "edges": edges}

    name = f"{gen.family}-n{n}-k{gen.k}-s{gen.seed}"
    spec = InstanceSpec(name=name, n=n, objective=objective, constraint=_random_constraint(n, gen.k, r, rng))
    logger.debug(f"generated {name}")
    return spec
