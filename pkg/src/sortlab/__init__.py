"""Empirical complexity lab for insertion-sort variants on normal inputs."""

from sortlab.sortcore import (
    ALGORITHMS,
    SortStats,
    insertion_sort,
    shift_insertion_sort,
    verify_sorted,
)
from sortlab.randgen import GenSpec, UniformStream, box_muller_pair, normal_sample
from sortlab.doe import (
    BalanceViolation,
    Dataset,
    ExperimentPlan,
    FactorSpec,
    build_plan,
    validate_balanced,
)
from sortlab.runner import Observation, run_cell, run_experiment
from sortlab.glm import (
    AnovaRow,
    AnovaTable,
    anova,
    f_tail_prob,
    footer_stats,
    regularized_incomplete_beta,
    summary_stats,
)
from sortlab.report import SensitivityRow, export_csv, render_anova, sensitivity_summary

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "AnovaRow",
    "AnovaTable",
    "BalanceViolation",
    "Dataset",
    "ExperimentPlan",
    "FactorSpec",
    "GenSpec",
    "Observation",
    "SensitivityRow",
    "SortStats",
    "UniformStream",
    "anova",
    "box_muller_pair",
    "build_plan",
    "export_csv",
    "f_tail_prob",
    "footer_stats",
    "insertion_sort",
    "normal_sample",
    "regularized_incomplete_beta",
    "render_anova",
    "run_cell",
    "run_experiment",
    "sensitivity_summary",
    "shift_insertion_sort",
    "summary_stats",
    "validate_balanced",
]
