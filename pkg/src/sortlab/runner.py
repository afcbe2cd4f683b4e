"""Timed sort runs over an experiment plan.

Each run generates its input outside the timed region, sorts it once,
checks the result and records counters plus elapsed time. Input seeds are
derived from (master seed, cell, replicate) only, so every algorithm in a
plan sorts the same arrays cell for cell.
"""

from __future__ import annotations

import hashlib
import logging
import struct
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from sortlab.doe import Dataset, ExperimentPlan, PlanError
from sortlab.randgen import PRNG_ID, GenSpec, normal_sample
from sortlab.sortcore import ALGORITHMS, sort_array, verify_sorted

__all__ = [
    "CLOCK_IDS",
    "GENERATOR_FACTORS",
    "Observation",
    "SortFailure",
    "derive_seed",
    "run_cell",
    "run_experiment",
]

log = logging.getLogger(__name__)

CLOCK_IDS = {"thread": "time.thread_time", "wall": "time.perf_counter"}
GENERATOR_FACTORS = ("n", "s", "m")
DEFAULT_CONSTANTS = {"s": 1.0, "m": 0.0}


class SortFailure(RuntimeError):
    """A sort produced output that is not a sorted permutation of its input."""


@dataclass
class Observation:
    algorithm: str
    cell_id: int
    levels: dict[str, int]
    values: dict[str, float]
    replicate: int
    derived_seed: int
    time_seconds: float
    comparisons: int
    writes: int

    def response(self, name: str) -> float:
        if name not in ("time_seconds", "comparisons", "writes"):
            raise KeyError(f"unknown response column {name!r}")
        return getattr(self, name)

    def __getattr__(self, name: str):
        # level_n, n, level_s, ... as in the CSV columns.
        levels = self.__dict__.get("levels", {})
        values = self.__dict__.get("values", {})
        if name.startswith("level_") and name[6:] in levels:
            return levels[name[6:]]
        if name in values:
            return values[name]
        raise AttributeError(name)


def derive_seed(master_seed: int, cell_id: int, replicate: int) -> int:
    """Stable 64-bit seed for one (cell, replicate); algorithm-independent."""
    blob = struct.pack("<QQQ", master_seed, cell_id, replicate)
    return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "little")


def run_cell(
    algorithm: str,
    n: int,
    s: float,
    m: float,
    replicate: int,
    derived_seed: int,
    *,
    cell_id: int = 0,
    levels: Optional[dict[str, int]] = None,
    timed: bool = True,
    clock: str = "thread",
) -> Observation:
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    data = normal_sample(GenSpec(int(n), float(m), float(s), derived_seed))
    out, stats = sort_array(algorithm, data, timed=timed, clock=clock)
    if not verify_sorted(out.tolist(), data.tolist()):
        raise SortFailure(
            f"{algorithm} failed to sort n={n} s={s} m={m} "
            f"replicate={replicate} seed={derived_seed}"
        )
    return Observation(
        algorithm=algorithm,
        cell_id=cell_id,
        levels=dict(levels or {}),
        values={"n": int(n), "s": float(s), "m": float(m)},
        replicate=replicate,
        derived_seed=derived_seed,
        time_seconds=stats.wall_time,
        comparisons=stats.comparisons,
        writes=stats.writes,
    )


def _generator_params(plan: ExperimentPlan, codes) -> dict[str, float]:
    params = {**DEFAULT_CONSTANTS, **plan.constants, **plan.cell_values(codes)}
    if "n" not in params:
        raise PlanError("plan must vary n or fix it under 'constants'")
    return params


def check_runnable(plan: ExperimentPlan) -> None:
    unknown = set(plan.factor_names) - set(GENERATOR_FACTORS)
    if unknown:
        raise PlanError(f"the runner only understands factors n, s, m; got {sorted(unknown)}")
    bad = set(plan.algorithms) - set(ALGORITHMS)
    if bad:
        raise PlanError(f"unknown algorithms {sorted(bad)}; expected {ALGORITHMS}")
    for cid, codes in plan.cells():
        p = _generator_params(plan, codes)
        if int(p["n"]) != p["n"] or p["n"] < 1:
            raise PlanError(f"cell {cid}: n must be a positive integer, got {p['n']}")
        if p["s"] < 0:
            raise PlanError(f"cell {cid}: s must be non-negative, got {p['s']}")


def run_experiment(
    plan: ExperimentPlan,
    *,
    timed: bool = True,
    clock: str = "thread",
    progress: Optional[Callable[[int, int], None]] = None,
) -> dict[str, Dataset]:
    """Run every (algorithm, cell, replicate) once, in a seeded random order.

    Returns one Dataset per algorithm with observations in canonical
    (cell, replicate) order. The shuffled run order is stored in the
    metadata as indices into the canonical (algorithm, cell, replicate)
    enumeration.
    """
    check_runnable(plan)
    if clock not in CLOCK_IDS:
        raise ValueError(f"unknown clock {clock!r}; expected one of {tuple(CLOCK_IDS)}")
    cells = plan.cells()
    canonical = [
        (alg, cid, codes, rep)
        for alg in plan.algorithms
        for cid, codes in cells
        for rep in range(1, plan.replicates + 1)
    ]
    order = np.random.Generator(np.random.PCG64(plan.master_seed)).permutation(
        len(canonical)
    )
    results: dict[int, Observation] = {}
    warmed: set[tuple[str, int]] = set()
    for step, idx in enumerate(order):
        alg, cid, codes, rep = canonical[idx]
        params = _generator_params(plan, codes)
        if timed and (alg, cid) not in warmed:
            scratch = normal_sample(
                GenSpec(int(params["n"]), float(params["m"]), float(params["s"]), 0)
            )
            sort_array(alg, scratch, timed=False)
            warmed.add((alg, cid))
        results[int(idx)] = run_cell(
            alg,
            int(params["n"]),
            params["s"],
            params["m"],
            rep,
            derive_seed(plan.master_seed, cid, rep),
            cell_id=cid,
            levels=dict(zip(plan.factor_names, codes)),
            timed=timed,
            clock=clock,
        )
        if progress is not None:
            progress(step + 1, len(canonical))
    metadata = {
        "prng": PRNG_ID,
        "clock": CLOCK_IDS[clock] if timed else "disabled",
        "clock_resolution": time.get_clock_info(CLOCK_IDS[clock][5:]).resolution,
        "replicates": plan.replicates,
        "master_seed": plan.master_seed,
        "run_order": [int(i) for i in order],
    }
    datasets = {}
    for alg in plan.algorithms:
        obs = [results[i] for i, c in enumerate(canonical) if c[0] == alg]
        datasets[alg] = Dataset(plan, obs, dict(metadata, algorithm=alg))
    log.info("ran %d sorts over %d cells", len(canonical), len(cells))
    return datasets
