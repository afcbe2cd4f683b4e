"""Command-line entry point: ``sortlab {run,anova,compare,fprob,gen,selftest}``.

Exit codes: 0 success, 2 validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import asdict
from pathlib import Path
from typing import Callable, Optional, Sequence

from sortlab.doe import PlanError, build_plan, load_plan, read_dataset_csv, write_dataset_csv
from sortlab.glm import (
    NumericalError,
    UnbalancedDesignError,
    anova,
    f_tail_prob,
    footer_stats,
)
from sortlab.randgen import GenSpec, normal_sample
from sortlab.reference import PUBLISHED
from sortlab.report import (
    export_csv,
    render_anova,
    render_sensitivity,
    sensitivity_summary,
)
from sortlab.runner import SortFailure, run_experiment

log = logging.getLogger("sortlab")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION) -> None:
        super().__init__(message)
        self.code = code


def write_atomic(path: Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_atomic(Path(out), text)
    else:
        sys.stdout.write(text)


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"no such file: {path}")
    return p


def _load_dataset(path: str):
    try:
        return read_dataset_csv(_require_file(path))
    except PlanError as exc:
        raise CliError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args: argparse.Namespace) -> int:
    plan_path = _require_file(args.plan)
    try:
        plan = load_plan(plan_path)
        if args.seed is not None:
            plan = build_plan(
                plan.factors, plan.replicates, args.seed, plan.algorithms, plan.constants
            )
    except PlanError as exc:
        raise CliError(f"{plan_path}: {exc}") from None
    if plan.replicates == 1:
        print(
            "warning: replicates=1 leaves 0 error degrees of freedom; "
            "F and P will be undefined",
            file=sys.stderr,
        )
    try:
        datasets = run_experiment(plan, timed=not args.no_timing, clock=args.clock)
    except PlanError as exc:
        raise CliError(f"{plan_path}: {exc}") from None
    except SortFailure as exc:
        raise CliError(f"sort failure: {exc}", EXIT_NUMERICAL) from None

    out_dir = Path(args.out or ".")
    rendered = {}
    for alg, ds in datasets.items():
        buf = io.StringIO()
        write_dataset_csv(ds, buf)
        rendered[out_dir / f"{alg}.csv"] = buf.getvalue()
    for path, text in rendered.items():
        write_atomic(path, text)
        print(f"wrote {path} ({len(datasets[path.stem].observations)} rows)")
    return EXIT_OK


def _anova_or_fail(path: str, response: str):
    ds = _load_dataset(path)
    try:
        return anova(ds, response), ds
    except UnbalancedDesignError as exc:
        raise CliError(f"{path}: unbalanced dataset: {exc}") from None
    except KeyError as exc:
        raise CliError(f"{path}: {exc}") from None


def cmd_anova(args: argparse.Namespace) -> int:
    table, _ = _anova_or_fail(args.dataset, args.response)
    if args.format == "json":
        text = table.to_json()
    elif args.format == "csv":
        text = export_csv(table)
    else:
        text = render_anova(table)
    _emit(text, args.out)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    table_a, ds_a = _anova_or_fail(args.dataset_a, args.response)
    table_b, ds_b = _anova_or_fail(args.dataset_b, args.response)
    if ds_a.plan.factor_names != ds_b.plan.factor_names or ds_a.plan.levels != ds_b.plan.levels:
        raise CliError(
            f"datasets have different designs: {ds_a.plan.factor_names}{ds_a.plan.levels} "
            f"vs {ds_b.plan.factor_names}{ds_b.plan.levels}"
        )
    try:
        rows = sensitivity_summary(table_a, table_b, args.alpha)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    label_a = ds_a.algorithm or "A"
    label_b = ds_b.algorithm or "B"
    if args.format == "json":
        text = json.dumps(
            {"a": label_a, "b": label_b, "alpha": args.alpha,
             "response": args.response, "rows": [asdict(r) for r in rows]},
            indent=2,
            sort_keys=True,
        ) + "\n"
    elif args.format == "csv":
        text = export_csv(rows)
    else:
        text = render_sensitivity(rows, label_a, label_b, args.alpha)
    _emit(text, args.out)
    return EXIT_OK


def cmd_fprob(args: argparse.Namespace) -> int:
    try:
        p = f_tail_prob(args.f, args.d1, args.d2)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    print(repr(p))
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        spec = GenSpec(args.n, args.m, args.s, args.seed if args.seed is not None else 0)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    lines = ["value", *(repr(float(v)) for v in normal_sample(spec))]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def selftest_checks() -> list[tuple[str, bool, str]]:
    """Published-table checks that need no experiment run.

    A printed F has two decimals, so each printed P is checked against the
    tail probabilities over the F rounding interval, widened by half a unit
    in the third decimal.
    """
    checks = []
    for pub in PUBLISHED:
        for source, df, adj_ss, _, f, p in pub.rows:
            lo = f_tail_prob(f + 0.005, df, pub.error_df)
            hi = f_tail_prob(max(f - 0.005, 0.0), df, pub.error_df)
            ok = lo - 0.0005 <= p <= hi + 0.0005
            checks.append(
                (f"{pub.algorithm} {source}: P(F{df},{pub.error_df} > {f:.2f})",
                 ok, f"p in [{lo:.4f}, {hi:.4f}], printed {p:.3f}")
            )
        s, r_sq, r_sq_adj = footer_stats(pub.error_ss, pub.error_df, pub.total_ss, pub.total_df)
        checks.append(
            (f"{pub.algorithm} S", abs(s - pub.s) <= 1e-5, f"{s:.8f} vs {pub.s}")
        )
        checks.append(
            (f"{pub.algorithm} R-Sq", abs(100 * r_sq - pub.r_sq_pct) <= 0.01,
             f"{100 * r_sq:.3f}% vs {pub.r_sq_pct}%")
        )
        checks.append(
            (f"{pub.algorithm} R-Sq(adj)", abs(100 * r_sq_adj - pub.r_sq_adj_pct) <= 0.01,
             f"{100 * r_sq_adj:.3f}% vs {pub.r_sq_adj_pct}%")
        )
        src, df, ss, _, f_printed, _ = pub.rows[0]
        f_full = (ss / df) / (pub.error_ss / pub.error_df)
        checks.append(
            (f"{pub.algorithm} F({src})", abs(f_full - f_printed) <= 1e-3 * f_printed,
             f"{f_full:.2f} vs {f_printed}")
        )
    return checks


def cmd_selftest(args: argparse.Namespace) -> int:
    failed = 0
    for name, ok, detail in selftest_checks():
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    print(f"{'all checks passed' if not failed else f'{failed} check(s) failed'}")
    return EXIT_OK if not failed else EXIT_NUMERICAL


# ---------------------------------------------------------------------------


def _finite_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sortlab",
        description="Factorial timing experiments and ANOVA for insertion-sort variants.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a plan, write one dataset CSV per algorithm")
    p.add_argument("--plan", required=True, help="plan JSON file")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--seed", type=int, help="override the plan's master seed")
    p.add_argument("--no-timing", action="store_true", help="record counters only")
    p.add_argument("--clock", default="thread", choices=("thread", "wall"),
                   help="thread CPU clock (default) or wall clock for time_seconds")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("anova", help="ANOVA of one dataset CSV")
    p.add_argument("dataset")
    p.add_argument("--response", default="time_seconds",
                   choices=("time_seconds", "comparisons", "writes"))
    p.add_argument("--format", default="text", choices=("text", "csv", "json"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_anova)

    p = sub.add_parser("compare", help="compare factor sensitivity of two datasets")
    p.add_argument("dataset_a")
    p.add_argument("dataset_b")
    p.add_argument("--response", default="time_seconds",
                   choices=("time_seconds", "comparisons", "writes"))
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--format", default="text", choices=("text", "csv", "json"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("fprob", help="upper-tail probability of the F distribution")
    p.add_argument("f", type=_finite_float)
    p.add_argument("d1", type=int)
    p.add_argument("d2", type=int)
    p.set_defaults(func=cmd_fprob)

    p = sub.add_parser("gen", help="dump a normal sample as a one-column CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=_finite_float, default=0.0)
    p.add_argument("--s", type=_finite_float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("selftest", help="check F/P and footer arithmetic against published tables")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler: Callable[[argparse.Namespace], int] = args.func
    try:
        return handler(args)
    except CliError as exc:
        print(f"sortlab {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except NumericalError as exc:
        print(f"sortlab {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
