"""
Batch front-end: config validation, run manifests, experiment runners and reports.
"""
from src.cli.experiments import EXIT_CONFIG, EXIT_DIVERGED, EXIT_FAIL, EXIT_PASS, ExperimentOutcome, run
from src.cli.manifest import EXPERIMENT_KINDS, ExperimentConfig, RunManifest, build_manifest, validate_config
from src.cli.report import Report, parse_report

__all__ = [
    "EXIT_CONFIG",
    "EXIT_DIVERGED",
    "EXIT_FAIL",
    "EXIT_PASS",
    "EXPERIMENT_KINDS",
    "ExperimentConfig",
    "ExperimentOutcome",
    "Report",
    "RunManifest",
    "build_manifest",
    "parse_report",
    "run",
    "validate_config",
]
