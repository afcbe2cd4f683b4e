"""Balanced full-factorial plans and the long-format dataset model."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

__all__ = [
    "BASE_COLUMNS",
    "BalanceViolation",
    "Dataset",
    "ExperimentPlan",
    "FactorSpec",
    "PlanError",
    "build_plan",
    "dataset_columns",
    "load_plan",
    "paper_plan",
    "read_dataset_csv",
    "validate_balanced",
    "write_dataset_csv",
]

BASE_COLUMNS = ("algorithm", "cell_id")
TAIL_COLUMNS = (
    "replicate",
    "derived_seed",
    "time_seconds",
    "comparisons",
    "writes",
)
RESPONSE_COLUMNS = ("time_seconds", "comparisons", "writes")

UINT64_MAX = (1 << 64) - 1


class PlanError(ValueError):
    """Malformed plan or dataset."""


@dataclass(frozen=True)
class FactorSpec:
    name: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if not self.name or not self.name.isidentifier():
            raise PlanError(f"factor name {self.name!r} is not an identifier")
        if len(self.values) < 2:
            raise PlanError(f"factor {self.name!r} needs at least 2 levels")
        if len(set(self.values)) != len(self.values):
            raise PlanError(f"factor {self.name!r} has repeated level values")
        if not all(math.isfinite(v) for v in self.values):
            raise PlanError(f"factor {self.name!r} has non-finite level values")

    @property
    def levels(self) -> int:
        return len(self.values)

    @property
    def codes(self) -> range:
        return range(len(self.values))

    def value(self, code: int) -> float:
        return self.values[code]


@dataclass(frozen=True)
class ExperimentPlan:
    factors: tuple[FactorSpec, ...]
    replicates: int
    master_seed: int
    algorithms: tuple[str, ...]
    # Generator parameters held fixed when they are not varied as factors.
    constants: dict[str, float] = field(default_factory=dict)

    @property
    def factor_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.factors)

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(f.levels for f in self.factors)

    @property
    def n_cells(self) -> int:
        return math.prod(self.levels)

    @property
    def runs_per_algorithm(self) -> int:
        return self.n_cells * self.replicates

    def cells(self) -> list[tuple[int, tuple[int, ...]]]:
        """(cell_id, level codes) in lexicographic code order."""
        grid = itertools.product(*(f.codes for f in self.factors))
        return list(enumerate(grid))

    def cell_values(self, codes: Sequence[int]) -> dict[str, float]:
        return {f.name: f.value(c) for f, c in zip(self.factors, codes)}

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "factors": [{"name": f.name, "values": list(f.values)} for f in self.factors],
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "algorithms": list(self.algorithms),
        }
        if self.constants:
            out["constants"] = dict(self.constants)
        return out


def build_plan(
    factors: Iterable[FactorSpec | tuple[str, Sequence[float]]],
    replicates: int,
    master_seed: int,
    algorithms: Sequence[str],
    constants: Optional[dict[str, float]] = None,
) -> ExperimentPlan:
    specs = tuple(
        f if isinstance(f, FactorSpec) else FactorSpec(f[0], tuple(f[1]))
        for f in factors
    )
    if not specs:
        raise PlanError("a plan needs at least one factor")
    names = [f.name for f in specs]
    dup = [k for k, c in Counter(names).items() if c > 1]
    if dup:
        raise PlanError(f"duplicate factor names: {dup}")
    if int(replicates) != replicates or replicates < 1:
        raise PlanError(f"replicates must be a positive integer, got {replicates!r}")
    if int(master_seed) != master_seed or not 0 <= master_seed <= UINT64_MAX:
        raise PlanError("master_seed must be an unsigned 64-bit integer")
    algorithms = tuple(algorithms)
    if not algorithms or len(set(algorithms)) != len(algorithms):
        raise PlanError("algorithms must be a non-empty list without repeats")
    constants = dict(constants or {})
    clash = set(constants) & set(names)
    if clash:
        raise PlanError(f"constants shadow factors: {sorted(clash)}")
    return ExperimentPlan(specs, int(replicates), int(master_seed), algorithms, constants)


def paper_plan(
    n_values: Sequence[int] = (5000, 7000, 9000),
    replicates: int = 3,
    master_seed: int = 20100,
    algorithms: Sequence[str] = ("insertion", "shift_insertion"),
) -> ExperimentPlan:
    """The 3x3x3 normal-input layout: n, s (sigma) and m (mu) at three levels."""
    return build_plan(
        [("n", n_values), ("s", (800, 1200, 1600)), ("m", (500, 1000, 1500))],
        replicates,
        master_seed,
        algorithms,
    )


def load_plan(path: str | Path) -> ExperimentPlan:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PlanError(f"{path}: invalid JSON ({exc})") from None
    try:
        factors = [(f["name"], f["values"]) for f in raw["factors"]]
        return build_plan(
            factors,
            raw["replicates"],
            raw["master_seed"],
            raw["algorithms"],
            raw.get("constants"),
        )
    except (KeyError, TypeError) as exc:
        raise PlanError(f"{path}: missing or malformed field {exc}") from None


@dataclass
class Dataset:
    """Long-format observations of one algorithm over one plan."""

    plan: ExperimentPlan
    observations: list  # list[Observation]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def algorithm(self) -> Optional[str]:
        algs = {o.algorithm for o in self.observations}
        return algs.pop() if len(algs) == 1 else None

    def column(self, name: str) -> list[float]:
        return [o.response(name) for o in self.observations]


@dataclass(frozen=True)
class BalanceViolation:
    kind: str  # "missing", "duplicate" or "unknown"
    cell_id: int
    levels: tuple[int, ...]
    replicate: int

    def __str__(self) -> str:
        codes = ", ".join(str(c) for c in self.levels)
        return (
            f"{self.kind} observation for cell {self.cell_id} "
            f"(levels {codes}), replicate {self.replicate}"
        )


def validate_balanced(dataset: Dataset) -> Optional[BalanceViolation]:
    """None if every (cell, replicate) appears exactly once, else the first fault.

    Duplicates and out-of-plan rows are reported before missing ones, each in
    canonical (cell, replicate) order.
    """
    plan = dataset.plan
    cells = dict((codes, cid) for cid, codes in plan.cells())
    seen: Counter = Counter()
    for obs in dataset.observations:
        codes = tuple(obs.levels[name] for name in plan.factor_names)
        key = (codes, obs.replicate)
        if codes not in cells or not 1 <= obs.replicate <= plan.replicates:
            return BalanceViolation("unknown", obs.cell_id, codes, obs.replicate)
        if cells[codes] != obs.cell_id:
            return BalanceViolation("unknown", obs.cell_id, codes, obs.replicate)
        seen[key] += 1
    for cid, codes in plan.cells():
        for rep in range(1, plan.replicates + 1):
            if seen[(codes, rep)] > 1:
                return BalanceViolation("duplicate", cid, codes, rep)
    for cid, codes in plan.cells():
        for rep in range(1, plan.replicates + 1):
            if seen[(codes, rep)] == 0:
                return BalanceViolation("missing", cid, codes, rep)
    return None


def dataset_columns(plan: ExperimentPlan) -> list[str]:
    names = plan.factor_names
    return [
        *BASE_COLUMNS,
        *(f"level_{n}" for n in names),
        *names,
        *TAIL_COLUMNS,
    ]


def _fmt(x: float) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def write_dataset_csv(dataset: Dataset, fh: io.TextIOBase) -> None:
    """Write ``# key: json`` metadata lines followed by the CSV body."""
    header = {"plan": dataset.plan.to_json(), **dataset.metadata}
    for key in sorted(header):
        fh.write(f"# {key}: {json.dumps(header[key], sort_keys=True)}\n")
    names = dataset.plan.factor_names
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(dataset_columns(dataset.plan))
    for o in dataset.observations:
        writer.writerow(
            [
                o.algorithm,
                o.cell_id,
                *(o.levels[n] for n in names),
                *(_fmt(o.values[n]) for n in names),
                o.replicate,
                o.derived_seed,
                _fmt(o.time_seconds),
                o.comparisons,
                o.writes,
            ]
        )


def read_dataset_csv(source: str | Path | io.TextIOBase) -> Dataset:
    # Local import: runner depends on this module.
    from sortlab.runner import Observation

    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    meta: dict[str, Any] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            try:
                meta[key.strip()] = json.loads(value)
            except json.JSONDecodeError:
                raise PlanError(f"bad metadata line: {line!r}") from None
        elif line.strip():
            body.append(line)
    if "plan" not in meta:
        raise PlanError("dataset has no '# plan:' metadata line")
    raw = meta.pop("plan")
    plan = build_plan(
        [(f["name"], f["values"]) for f in raw["factors"]],
        raw["replicates"],
        raw["master_seed"],
        raw["algorithms"],
        raw.get("constants"),
    )
    reader = csv.DictReader(body)
    expected = dataset_columns(plan)
    if reader.fieldnames != expected:
        raise PlanError(f"dataset columns {reader.fieldnames} != {expected}")
    names = plan.factor_names
    observations = []
    for row in reader:
        observations.append(
            Observation(
                algorithm=row["algorithm"],
                cell_id=int(row["cell_id"]),
                levels={n: int(row[f"level_{n}"]) for n in names},
                values={n: float(row[n]) for n in names},
                replicate=int(row["replicate"]),
                derived_seed=int(row["derived_seed"]),
                time_seconds=float(row["time_seconds"]),
                comparisons=int(row["comparisons"]),
                writes=int(row["writes"]),
            )
        )
    return Dataset(plan, observations, meta)
