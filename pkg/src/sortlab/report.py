"""Text and CSV rendering of ANOVA tables, and the two-algorithm comparison."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Union

from sortlab.glm import AnovaTable

__all__ = [
    "ANOVA_CSV_COLUMNS",
    "SENSITIVITY_CSV_COLUMNS",
    "SensitivityRow",
    "export_csv",
    "format_p",
    "render_anova",
    "render_sensitivity",
    "sensitivity_summary",
]

TIE_RTOL = 1e-6

ANOVA_CSV_COLUMNS = ("source", "df", "seq_ss", "adj_ss", "adj_ms", "f", "f_undefined", "p")
SENSITIVITY_CSV_COLUMNS = (
    "source",
    "f_a",
    "f_b",
    "p_a",
    "p_b",
    "significant_a",
    "significant_b",
    "more_sensitive",
)


def format_sig(x: float, digits: int = 6) -> str:
    """Fixed-point with ``digits`` significant digits: 0.00288033, 3551.29."""
    if x == 0 or not math.isfinite(x):
        return f"{x:.{digits - 1}f}" if x == 0 else str(x)
    decimals = max(0, digits - 1 - math.floor(math.log10(abs(x))))
    return f"{x:.{decimals}f}"


def format_p(p: Optional[float]) -> str:
    # Three decimals; anything under 0.0005 rounds to "0.000".
    return "*" if p is None else f"{p:.3f}"


def _fmt_f(f: Optional[float]) -> str:
    return "*" if f is None else f"{f:.2f}"


def _fmt_ss(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.7f}"


def render_anova(table: AnovaTable) -> str:
    """MINITAB-style fixed-column text: factor block, ANOVA block, footer.

    Undefined F ratios print as ``*``, and so does their P.
    """
    names = [f["name"] for f in table.factors]
    out = io.StringIO()
    out.write(f"General Linear Model: {table.response} versus {', '.join(names)}\n\n")

    fw = max(6, *(len(n) for n in names))
    out.write(f"{'Factor':<{fw}}  Type   Levels  Values\n")
    for f in table.factors:
        values = ", ".join(str(v) for v in f["values"])
        out.write(f"{f['name']:<{fw}}  Fixed  {f['levels']:>6}  {values}\n")
    out.write(
        f"\nAnalysis of Variance for {table.response}, using Adjusted SS for Tests\n\n"
    )

    body: list[list[str]] = []
    for r in table.rows:
        f_txt = "*" if r.f_undefined else _fmt_f(r.f)
        p_txt = "*" if r.f_undefined else format_p(r.p)
        body.append(
            [r.source, str(r.df), _fmt_ss(r.seq_ss), _fmt_ss(r.adj_ss),
             _fmt_ss(r.adj_ms), f_txt, p_txt]
        )
    if table.has_error:
        body.append(
            ["Error", str(table.error_df), _fmt_ss(table.error_ss),
             _fmt_ss(table.error_ss), _fmt_ss(table.error_ms), "", ""]
        )
    body.append(["Total", str(table.total_df), _fmt_ss(table.total_ss), "", "", "", ""])

    header = ["Source", "DF", "Seq SS", "Adj SS", "Adj MS", "F", "P"]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = []
    for row in [header, *body]:
        cells = [row[0].ljust(widths[0])]
        cells += [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    out.write("\n".join(lines) + "\n\n")

    if table.has_error:
        s_txt = format_sig(table.s_root_mse)
        adj_txt = f"{100.0 * table.r_sq_adj:.2f}%"
    else:
        s_txt = adj_txt = "*"
    out.write(f"S = {s_txt} R-Sq = {100.0 * table.r_sq:.2f}% R-Sq(adj) = {adj_txt}\n")
    for flag in table.flags:
        out.write(f"Note: {flag}\n")
    return out.getvalue()


@dataclass(frozen=True)
class SensitivityRow:
    source: str
    f_a: Optional[float]
    f_b: Optional[float]
    p_a: Optional[float]
    p_b: Optional[float]
    significant_a: bool
    significant_b: bool
    more_sensitive: str  # "A", "B", "tie" or "neither-significant"


def _as_ratio(f: Optional[float]) -> float:
    # An undefined F comes from a zero error mean square: infinitely large.
    return math.inf if f is None else f


def _verdict(f_a: float, f_b: float, sig_a: bool, sig_b: bool) -> str:
    if f_a == f_b or (
        math.isfinite(f_a)
        and math.isfinite(f_b)
        and abs(f_a - f_b) <= TIE_RTOL * max(abs(f_a), abs(f_b))
    ):
        return "tie"
    if not sig_a and not sig_b:
        return "neither-significant"
    return "A" if f_a > f_b else "B"


def sensitivity_summary(
    table_a: AnovaTable, table_b: AnovaTable, alpha: float = 0.05
) -> list[SensitivityRow]:
    """Compare two algorithms' ANOVA tables source by source.

    The verdict names the table with the larger F; ratios within a relative
    1e-6 of each other are a tie, and a source significant in neither table
    is ``neither-significant``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if table_a.sources != table_b.sources:
        raise ValueError(
            f"source sets differ: {table_a.sources} vs {table_b.sources}"
        )
    rows = []
    for ra, rb in zip(table_a.rows, table_b.rows):
        sig_a = ra.p is not None and ra.p < alpha
        sig_b = rb.p is not None and rb.p < alpha
        if ra.p is None and rb.p is None:
            verdict = "tie" if ra.adj_ms == rb.adj_ms else "neither-significant"
        else:
            verdict = _verdict(_as_ratio(ra.f), _as_ratio(rb.f), sig_a, sig_b)
        rows.append(
            SensitivityRow(ra.source, ra.f, rb.f, ra.p, rb.p, sig_a, sig_b, verdict)
        )
    return rows


def render_sensitivity(
    rows: Sequence[SensitivityRow],
    label_a: str = "A",
    label_b: str = "B",
    alpha: float = 0.05,
) -> str:
    names = {"A": label_a, "B": label_b}
    header = ["Source", f"F {label_a}", f"F {label_b}", f"P {label_a}", f"P {label_b}",
              f"sig@{alpha:g} {label_a}", f"sig@{alpha:g} {label_b}", "More sensitive"]
    body = [
        [r.source, _fmt_f(r.f_a), _fmt_f(r.f_b), format_p(r.p_a), format_p(r.p_b),
         "yes" if r.significant_a else "no", "yes" if r.significant_b else "no",
         names.get(r.more_sensitive, r.more_sensitive)]
        for r in rows
    ]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = []
    for row in [header, *body]:
        cells = [row[0].ljust(widths[0])]
        cells += [c.rjust(w) for c, w in zip(row[1:-1], widths[1:-1])]
        cells.append(row[-1].ljust(widths[-1]))
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(x) if isinstance(x, float) else str(x)


def export_csv(obj: Union[AnovaTable, Sequence[SensitivityRow]]) -> str:
    """Full-precision CSV: one row per source (plus Error and Total for tables)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(obj, AnovaTable):
        writer.writerow(ANOVA_CSV_COLUMNS)
        for r in obj.rows:
            writer.writerow(
                [r.source, r.df, _num(r.seq_ss), _num(r.adj_ss), _num(r.adj_ms),
                 _num(r.f), _num(r.f_undefined), _num(r.p)]
            )
        if obj.has_error:
            writer.writerow(
                ["Error", obj.error_df, _num(obj.error_ss), _num(obj.error_ss),
                 _num(obj.error_ms), "", "", ""]
            )
        writer.writerow(["Total", obj.total_df, _num(obj.total_ss), "", "", "", "", ""])
    else:
        writer.writerow(SENSITIVITY_CSV_COLUMNS)
        for row in obj:
            d = asdict(row)
            writer.writerow([_num(d[c]) for c in SENSITIVITY_CSV_COLUMNS])
    return buf.getvalue()
