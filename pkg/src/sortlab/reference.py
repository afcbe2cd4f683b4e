"""Published MINITAB GLM output for the 3x3x3 normal-input timing study.

Values are copied as printed (seconds squared for SS, 3-decimal P). They
anchor the F-to-P and footer-statistic regressions in ``selftest``.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["PublishedTable", "INSERTION", "SHIFT_INSERTION", "PUBLISHED"]


@dataclass(frozen=True)
class PublishedTable:
    algorithm: str
    # (source, df, adj_ss, adj_ms, F, P) per printed row
    rows: tuple[tuple[str, int, float, float, float, float], ...]
    error_df: int
    error_ss: float
    total_df: int
    total_ss: float
    s: float
    r_sq_pct: float
    r_sq_adj_pct: float


INSERTION = PublishedTable(
    algorithm="insertion",
    rows=(
        ("n", 2, 0.1901147, 0.0950574, 11457.81, 0.000),
        ("s", 2, 0.0000734, 0.0000367, 4.42, 0.017),
        ("m", 2, 0.0000927, 0.0000463, 5.58, 0.006),
        ("n*s", 4, 0.0000210, 0.0000052, 0.63, 0.642),
        ("n*m", 4, 0.0000888, 0.0000222, 2.68, 0.041),
        ("s*m", 4, 0.0001779, 0.0000445, 5.36, 0.001),
        ("n*s*m", 8, 0.0002484, 0.0000310, 3.74, 0.002),
    ),
    error_df=54,
    error_ss=0.0004480,
    total_df=80,
    total_ss=0.1912649,
    s=0.00288033,
    r_sq_pct=99.77,
    r_sq_adj_pct=99.65,
)

SHIFT_INSERTION = PublishedTable(
    algorithm="shift_insertion",
    rows=(
        ("n", 2, 0.1523912, 0.0761956, 11868.93, 0.000),
        ("s", 2, 0.0001352, 0.0000676, 10.53, 0.000),
        ("m", 2, 0.0001962, 0.0000981, 15.28, 0.000),
        ("n*s", 4, 0.0002306, 0.0000576, 8.98, 0.000),
        ("n*m", 4, 0.0000618, 0.0000154, 2.40, 0.061),
        ("s*m", 4, 0.0001049, 0.0000262, 4.08, 0.006),
        ("n*s*m", 8, 0.0002109, 0.0000264, 4.11, 0.001),
    ),
    error_df=54,
    error_ss=0.0003467,
    total_df=80,
    total_ss=0.1536774,
    s=0.00253372,
    r_sq_pct=99.77,
    r_sq_adj_pct=99.67,
)

PUBLISHED = (INSERTION, SHIFT_INSERTION)
