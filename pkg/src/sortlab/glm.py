"""Fixed-effects ANOVA for balanced full-factorial designs.

Every non-empty subset of factors is a source, listed mains first, then
two-way interactions, and so on up to the full interaction, each group in
factor declaration order. Two independent routes produce the sums of
squares:

* ``adj_ss`` -- direct cell-means formula: the interaction effect of a
  subset is the inclusion-exclusion sum of its marginal means;
* ``seq_ss`` -- a sequential sweep that fits each source's marginal means
  to the running residual and subtracts them.

On balanced data the two agree; the table asserts it and then reports the
cell-means value in both columns, so rounding noise never shows up as a
spurious Seq/Adj difference.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from sortlab.doe import Dataset, validate_balanced

__all__ = [
    "AnovaRow",
    "AnovaTable",
    "NumericalError",
    "UnbalancedDesignError",
    "anova",
    "anova_from_array",
    "assemble_table",
    "f_tail_prob",
    "footer_stats",
    "regularized_incomplete_beta",
    "subset_sources",
    "summary_stats",
]

BALANCE_RTOL = 1e-9
_SS_FLOOR = -1e-12

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAXITER = 20000


class UnbalancedDesignError(ValueError):
    pass


class NumericalError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# F distribution tail


def _beta_cf(x: float, a: float, b: float) -> float:
    # Modified Lentz evaluation of the incomplete beta continued fraction.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise NumericalError(
        f"incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})"
    )


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) for x in [0, 1], a > 0, b > 0."""
    if not (math.isfinite(a) and a > 0 and math.isfinite(b) and b > 0):
        raise ValueError(f"shape parameters must be positive and finite, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    # The fraction converges fast only left of the mode; use symmetry otherwise.
    if x < (a + 1.0) / (a + b + 2.0):
        value = math.exp(log_front) * _beta_cf(x, a, b) / a
    else:
        value = 1.0 - math.exp(log_front) * _beta_cf(1.0 - x, b, a) / b
    return min(1.0, max(0.0, value))


def f_tail_prob(f: float, d1: int, d2: int) -> float:
    """Upper-tail probability P(F(d1, d2) > f)."""
    if not math.isfinite(f) or f < 0:
        raise ValueError(f"F ratio must be finite and non-negative, got {f!r}")
    for name, d in (("d1", d1), ("d2", d2)):
        if int(d) != d or d < 1:
            raise ValueError(f"{name} must be a positive integer, got {d!r}")
    if f == 0.0:
        return 1.0
    x = d2 / (d2 + d1 * f)
    return regularized_incomplete_beta(x, d2 / 2.0, d1 / 2.0)


# ---------------------------------------------------------------------------
# Table model


@dataclass(frozen=True)
class AnovaRow:
    source: str
    df: int
    seq_ss: float
    adj_ss: float
    adj_ms: float
    f: Optional[float]
    p: Optional[float]
    f_undefined: bool = False


@dataclass
class AnovaTable:
    factors: list[dict[str, Any]]
    rows: list[AnovaRow]
    error_df: int
    error_ss: float
    error_ms: Optional[float]
    total_df: int
    total_ss: float
    s_root_mse: Optional[float]
    r_sq: float
    r_sq_adj: Optional[float]
    response: str = "y"
    flags: list[str] = field(default_factory=list)

    @property
    def sources(self) -> list[str]:
        return [r.source for r in self.rows]

    @property
    def has_error(self) -> bool:
        return self.error_df > 0

    def row(self, source: str) -> AnovaRow:
        for r in self.rows:
            if r.source == source:
                return r
        raise KeyError(source)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "response": self.response,
            "factors": self.factors,
            "rows": [asdict(r) for r in self.rows],
            "error": None
            if not self.has_error
            else {"df": self.error_df, "ss": self.error_ss, "ms": self.error_ms},
            "total": {"df": self.total_df, "ss": self.total_ss},
            "s_root_mse": self.s_root_mse,
            "r_sq": self.r_sq,
            "r_sq_adj": self.r_sq_adj,
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json_dict(cls, raw: dict[str, Any]) -> "AnovaTable":
        err = raw["error"] or {"df": 0, "ss": 0.0, "ms": None}
        return cls(
            factors=raw["factors"],
            rows=[AnovaRow(**r) for r in raw["rows"]],
            error_df=err["df"],
            error_ss=err["ss"],
            error_ms=err["ms"],
            total_df=raw["total"]["df"],
            total_ss=raw["total"]["ss"],
            s_root_mse=raw["s_root_mse"],
            r_sq=raw["r_sq"],
            r_sq_adj=raw["r_sq_adj"],
            response=raw["response"],
            flags=list(raw["flags"]),
        )


def footer_stats(
    error_ss: float, error_df: int, total_ss: float, total_df: int
) -> tuple[float, float, float]:
    """S (root MSE), R-Sq and R-Sq(adj) as fractions.

    A zero total sum of squares counts as a perfect fit; a negative
    adjusted R-Sq is reported as 0.
    """
    if error_df < 1:
        raise ValueError("footer statistics need at least one error degree of freedom")
    mse = error_ss / error_df
    s = math.sqrt(mse)
    if total_ss <= 0.0:
        return s, 1.0, 1.0
    r_sq = 1.0 - error_ss / total_ss
    r_sq_adj = 1.0 - mse / (total_ss / total_df)
    return s, min(1.0, max(0.0, r_sq)), min(1.0, max(0.0, r_sq_adj))


def summary_stats(table: AnovaTable) -> tuple[float, float, float]:
    if not table.has_error:
        raise ValueError("table has no error row")
    return footer_stats(table.error_ss, table.error_df, table.total_ss, table.total_df)


def assemble_table(
    factors: list[dict[str, Any]],
    sources: Sequence[tuple[str, int, float, float]],
    error_df: int,
    error_ss: float,
    total_ss: float,
    *,
    response: str = "y",
) -> AnovaTable:
    """Build a table from per-source (label, df, seq_ss, adj_ss) and error/total SS.

    Mean squares, F ratios, p-values and footer statistics are derived here.
    """
    flags: list[str] = []
    error_ms: Optional[float] = error_ss / error_df if error_df > 0 else None
    if error_df == 0:
        flags.append("no error degrees of freedom: F and P undefined")
    elif error_ms == 0.0:
        flags.append("zero error mean square: F undefined, P set to 0")
    rows = []
    for label, df, seq_ss, adj_ss in sources:
        seq_ss = _clamp_ss(seq_ss, label)
        adj_ss = _clamp_ss(adj_ss, label)
        adj_ms = adj_ss / df
        f: Optional[float] = None
        p: Optional[float] = None
        undefined = False
        if error_ms is None:
            undefined = True
        elif error_ms == 0.0:
            undefined = True
            p = 0.0
        else:
            f = adj_ms / error_ms
            p = f_tail_prob(f, df, error_df)
        rows.append(AnovaRow(label, df, seq_ss, adj_ss, adj_ms, f, p, undefined))
    total_df = sum(r.df for r in rows) + error_df
    if error_df > 0:
        s, r_sq, r_sq_adj = footer_stats(error_ss, error_df, total_ss, total_df)
    else:
        s, r_sq, r_sq_adj = None, 1.0, None
    return AnovaTable(
        factors=factors,
        rows=rows,
        error_df=error_df,
        error_ss=error_ss,
        error_ms=error_ms,
        total_df=total_df,
        total_ss=total_ss,
        s_root_mse=s,
        r_sq=r_sq,
        r_sq_adj=r_sq_adj,
        response=response,
        flags=flags,
    )


def _clamp_ss(ss: float, label: str) -> float:
    if ss < 0.0:
        if ss < _SS_FLOOR:
            raise NumericalError(f"negative sum of squares {ss} for source {label}")
        return 0.0
    return ss


# ---------------------------------------------------------------------------
# Sums of squares


def subset_sources(k: int) -> list[tuple[int, ...]]:
    """Factor-index subsets in table order: by size, then declaration order."""
    return [c for size in range(1, k + 1) for c in itertools.combinations(range(k), size)]


def _fsum_sq(a: np.ndarray) -> float:
    return math.fsum((a * a).ravel().tolist())


def _marginal_mean(y: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    drop = tuple(ax for ax in range(y.ndim) if ax not in keep)
    return y.mean(axis=drop, keepdims=True) if drop else y


def _cell_means_ss(y: np.ndarray, subset: tuple[int, ...]) -> float:
    # Interaction effect on the subset's marginal grid by inclusion-exclusion.
    effect = np.zeros([y.shape[ax] if ax in subset else 1 for ax in range(y.ndim)])
    for size in range(len(subset) + 1):
        sign = -1.0 if (len(subset) - size) % 2 else 1.0
        for sub in itertools.combinations(subset, size):
            effect = effect + sign * _marginal_mean(y, sub)
    weight = y.size // effect.size
    return weight * _fsum_sq(effect)


def _sequential_ss(y: np.ndarray, sources: list[tuple[int, ...]]) -> tuple[list[float], float]:
    resid = y - y.mean()
    out = []
    for subset in sources:
        eff = _marginal_mean(resid, subset)
        out.append(y.size // eff.size * _fsum_sq(eff))
        resid = resid - eff
    return out, _fsum_sq(resid)


def anova_from_array(
    y: np.ndarray,
    names: Sequence[str],
    *,
    response: str = "y",
) -> AnovaTable:
    """ANOVA for a response array shaped (levels_1, ..., levels_k, replicates)."""
    # C order fixes the summation order of every mean below.
    y = np.ascontiguousarray(y, dtype=np.float64)
    k = len(names)
    if y.ndim != k + 1:
        raise ValueError(f"expected {k + 1} axes (factors + replicate), got {y.ndim}")
    if any(dim < 1 for dim in y.shape) or any(dim < 2 for dim in y.shape[:k]):
        raise ValueError("each factor needs at least 2 levels and each cell a replicate")
    if not np.all(np.isfinite(y)):
        raise ValueError("response contains non-finite values")
    # Sums of squares are shift-invariant; centering on one observation keeps
    # constant responses exactly zero.
    y = np.ascontiguousarray(y - y.flat[0])
    r = y.shape[-1]
    sources = subset_sources(k)
    adj = [_cell_means_ss(y, s) for s in sources]
    seq, sweep_resid_ss = _sequential_ss(y, sources)

    cell_mean = y.mean(axis=-1, keepdims=True)
    error_ss = _fsum_sq(y - cell_mean)
    total_ss = _fsum_sq(y - math.fsum(y.ravel().tolist()) / y.size)
    scale = max(total_ss, np.finfo(float).tiny)
    for s, a, q in zip(sources, adj, seq):
        if abs(a - q) > BALANCE_RTOL * scale:
            raise NumericalError(
                f"sequential and cell-means SS disagree for {s}: {q} vs {a}"
            )
    if abs(sweep_resid_ss - error_ss) > BALANCE_RTOL * scale:
        raise NumericalError("sequential sweep residual does not match error SS")

    levels = y.shape[:k]
    labels = ["*".join(names[i] for i in s) for s in sources]
    dfs = [math.prod(levels[i] - 1 for i in s) for s in sources]
    factors = [
        {
            "name": names[i],
            "levels": levels[i],
            "values": list(range(levels[i])),
        }
        for i in range(k)
    ]
    error_df = math.prod(levels) * (r - 1)
    return assemble_table(
        factors,
        list(zip(labels, dfs, adj, adj)),
        error_df,
        error_ss,
        total_ss,
        response=response,
    )


def dataset_array(dataset: Dataset, response: str) -> np.ndarray:
    plan = dataset.plan
    shape = (*plan.levels, plan.replicates)
    y = np.empty(shape)
    for obs in dataset.observations:
        codes = tuple(obs.levels[n] for n in plan.factor_names)
        y[(*codes, obs.replicate - 1)] = float(obs.response(response))
    return y


def anova(dataset: Dataset, response: str = "time_seconds") -> AnovaTable:
    """Balanced fixed-effects ANOVA of one response column.

    The table sees factor codes 0..L-1; actual level values ride along in
    ``factors`` for display only.
    """
    violation = validate_balanced(dataset)
    if violation is not None:
        raise UnbalancedDesignError(str(violation))
    plan = dataset.plan
    y = dataset_array(dataset, response)
    table = anova_from_array(y, plan.factor_names, response=response)
    for spec, info in zip(plan.factors, table.factors):
        info["actual_values"] = list(spec.values)
    return table
