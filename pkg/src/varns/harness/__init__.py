"""Verification harness: corpus generation, falsification campaigns, I/O."""
from .campaigns import (
    CampaignConfig,
    CampaignElementError,
    InequalityReport,
    WorstCase,
    default_campaign_config,
    evaluate_element,
    replay_worst_case,
    run_campaign,
)
from .configs import build_campaign_config, build_solver_config
from .corpus import antisymmetric_tensor_field, generate_corpus
from .fieldfile import (
    FieldFileError,
    read_exponent,
    read_field,
    write_exponent,
    write_field,
)
from .reports import ReportIOError, emit_report, parse_report, report_to_record

__all__ = [
    "CampaignConfig",
    "CampaignElementError",
    "FieldFileError",
    "InequalityReport",
    "ReportIOError",
    "WorstCase",
    "antisymmetric_tensor_field",
    "build_campaign_config",
    "build_solver_config",
    "default_campaign_config",
    "emit_report",
    "evaluate_element",
    "generate_corpus",
    "parse_report",
    "read_exponent",
    "read_field",
    "replay_worst_case",
    "report_to_record",
    "run_campaign",
    "write_exponent",
    "write_field",
]
