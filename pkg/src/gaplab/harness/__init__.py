"""Experiment orchestration: runs, sweeps, evaluation, stats, reports, CLI."""

from .evaluation import evaluate_policy, VAL_GEN_BASE
from .records import (RunRecord, RecordFormatError, save_run_record,
                      load_run_record, load_records_dir)
from .report import build_report, report_to_csv, write_report
from .stats import expected_max_ustat, bootstrap_band, expected_max_curve
from .sweep import run_sweep
from .training import run_training, load_policy_checkpoint

__all__ = [
    "evaluate_policy", "VAL_GEN_BASE",
    "RunRecord", "RecordFormatError", "save_run_record", "load_run_record",
    "load_records_dir",
    "build_report", "report_to_csv", "write_report",
    "expected_max_ustat", "bootstrap_band", "expected_max_curve",
    "run_sweep", "run_training", "load_policy_checkpoint",
]
