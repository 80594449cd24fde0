from .config import Config, GeneratorConfig, load_config, parse_config
from .data import EvaluationDraw, generate, read_sample_csv, true_risk, write_sample_csv
from .experiments import run_consistency, run_coverage
from .output import ConsistencyRow, CoverageRow, ExperimentResult, emit, load_result

__all__ = [
    "Config", "GeneratorConfig", "load_config", "parse_config",
    "EvaluationDraw", "generate", "read_sample_csv", "true_risk", "write_sample_csv",
    "run_consistency", "run_coverage",
    "ConsistencyRow", "CoverageRow", "ExperimentResult", "emit", "load_result",
]
