"""Tools for validating automatic MT metrics against human judgments.

The package covers the full study pipeline: ingesting test sets and system
outputs, standardizing crowd-sourced adequacy judgments into DA scores,
scoring systems with BLEU and chrF, correlating metric and human scores,
testing correlation differences for significance, and mining diagnostics
such as score distributions by translation quality band and the largest
metric-human disagreements.
"""

from .analysis import (
    AgreementReport,
    BinAssignment,
    BinSummary,
    FailureCase,
    GroupCorrelation,
    conditional_distribution,
    failure_cases,
    grouped_correlation,
    kendall_agreement_report,
    tertile_bins,
)
from .corpus import (
    EvaluationCorpus,
    Segment,
    SystemMeta,
    SystemOutput,
    TestSet,
    ValidationPolicy,
    attach_system_metadata,
    build_corpus,
    load_output_dir,
    load_system_metadata,
    load_system_outputs,
    load_testset,
    validate_corpus,
)
from .correlation import (
    CorrelationResult,
    PairedSample,
    average_ranks,
    correlate,
    kendall_pair_counts,
    kendall_tau,
    pearson,
    segment_correlation,
    spearman,
    system_correlation,
)
from .errors import (
    AlignmentError,
    ConfigError,
    DataError,
    DegeneracyError,
    InsufficientDataError,
    StatsError,
    StudyError,
    UndefinedCorrelationError,
)
from .findings import Finding
from .judgments import (
    CENTER,
    ZSCORE,
    AssessorCurve,
    AssessorSimConfig,
    Judgment,
    RawJudgment,
    SegmentDA,
    SystemDA,
    WorkerStats,
    da_segment_map,
    da_system_map,
    load_judgments,
    segment_da,
    segment_da_to_tsv,
    simulate_assessor_count,
    standardize_judgments,
    system_da,
    system_da_to_tsv,
    worker_stats,
)
from .metrics import (
    BleuConfig,
    ChrfConfig,
    MetricScoreTable,
    TokenizationScheme,
    chrf,
    config_signature,
    corpus_bleu,
    corpus_chrf,
    load_external_metric_scores,
    merge_tables,
    parse_signature,
    score_systems,
    sentence_bleu,
    tokenize,
)
from .report import ReportBundle, StudyConfig, emit_report, load_config, run_study
from .significance import (
    SignificanceMatrix,
    TestOutcome,
    min_significant_r,
    pearson_zero_test,
    significance_matrix,
    student_t_sf,
    williams_test,
    winner_set,
)

__version__ = "0.1.0"

__all__ = [
    "CENTER",
    "ZSCORE",
    "AgreementReport",
    "AlignmentError",
    "AssessorCurve",
    "AssessorSimConfig",
    "BinAssignment",
    "BinSummary",
    "BleuConfig",
    "ChrfConfig",
    "ConfigError",
    "CorrelationResult",
    "DataError",
    "DegeneracyError",
    "EvaluationCorpus",
    "FailureCase",
    "Finding",
    "GroupCorrelation",
    "InsufficientDataError",
    "Judgment",
    "MetricScoreTable",
    "PairedSample",
    "RawJudgment",
    "ReportBundle",
    "Segment",
    "SegmentDA",
    "SignificanceMatrix",
    "StatsError",
    "StudyConfig",
    "StudyError",
    "SystemDA",
    "SystemMeta",
    "SystemOutput",
    "TestOutcome",
    "TestSet",
    "TokenizationScheme",
    "UndefinedCorrelationError",
    "ValidationPolicy",
    "WorkerStats",
    "attach_system_metadata",
    "average_ranks",
    "build_corpus",
    "chrf",
    "conditional_distribution",
    "config_signature",
    "correlate",
    "corpus_bleu",
    "corpus_chrf",
    "da_segment_map",
    "da_system_map",
    "emit_report",
    "failure_cases",
    "grouped_correlation",
    "kendall_agreement_report",
    "kendall_pair_counts",
    "kendall_tau",
    "load_config",
    "load_external_metric_scores",
    "load_judgments",
    "load_output_dir",
    "load_system_metadata",
    "load_system_outputs",
    "load_testset",
    "merge_tables",
    "min_significant_r",
    "parse_signature",
    "pearson",
    "pearson_zero_test",
    "run_study",
    "score_systems",
    "segment_correlation",
    "segment_da",
    "segment_da_to_tsv",
    "sentence_bleu",
    "significance_matrix",
    "simulate_assessor_count",
    "spearman",
    "standardize_judgments",
    "student_t_sf",
    "system_correlation",
    "system_da",
    "system_da_to_tsv",
    "tertile_bins",
    "tokenize",
    "validate_corpus",
    "williams_test",
    "winner_set",
    "worker_stats",
]
