from .analysis import Analysis, analyze, load_analysis
from .config import PipelineConfig, load_config
from .design import (
    ExperimentGrid,
    Plan,
    baseline_runs,
    build_plan,
    default_hyperparams,
    enumerate_runs,
    generate_vectors,
    load_plan,
    save_plan,
)
from .report import write_report
from .runner import execute, export_csv, load_results

__all__ = [
    "Analysis",
    "analyze",
    "load_analysis",
    "PipelineConfig",
    "load_config",
    "ExperimentGrid",
    "Plan",
    "baseline_runs",
    "build_plan",
    "default_hyperparams",
    "enumerate_runs",
    "generate_vectors",
    "load_plan",
    "save_plan",
    "write_report",
    "execute",
    "export_csv",
    "load_results",
]
