"""randsentry: weak-randomness (SWC-120) detection for Solidity sources.

Five analysis phases per file: block-attribute keyword filter, pattern
labeling against a 58-expression registry, four-level risk classification,
function-level mitigation validation, and context analysis for patterns
found outside functions.
"""

from .context import (
    ContextCategory,
    ContextResult,
    DispositionKind,
    FinalDisposition,
    classify_context,
    refine,
)
from .corpus import (
    AnalysisReport,
    CorpusSummary,
    EvalMetrics,
    FinalLabel,
    MissingReport,
    analyze_file,
    analyze_source,
    evaluate,
    run_corpus,
)
from .patterns import (
    GROUP_COUNTS,
    REGISTRY,
    MitigationKind,
    PatternHit,
    VulnPattern,
    block_attribute_present,
    detect_partial_mitigation,
    detect_safe_mechanism,
    match_vulnerability_patterns,
)
from .pipeline import (
    ATTACKER_MATRIX,
    LabelKind,
    Labeling,
    RiskAssessment,
    RiskLevel,
    phase1_filter,
    phase2_label,
    phase3_classify,
)
from .source_model import (
    ContractModel,
    ContractUnit,
    FunctionRecord,
    UnbalancedBraces,
    has_mitigation,
    parse_contract,
    public_callers,
)
from .validator import Offender, ValidationVerdict, VerdictKind, validate

__version__ = "0.1.0"

__all__ = [
    "ATTACKER_MATRIX",
    "AnalysisReport",
    "ContextCategory",
    "ContextResult",
    "ContractModel",
    "ContractUnit",
    "CorpusSummary",
    "DispositionKind",
    "EvalMetrics",
    "FinalDisposition",
    "FinalLabel",
    "FunctionRecord",
    "GROUP_COUNTS",
    "LabelKind",
    "Labeling",
    "MissingReport",
    "MitigationKind",
    "Offender",
    "PatternHit",
    "REGISTRY",
    "RiskAssessment",
    "RiskLevel",
    "UnbalancedBraces",
    "ValidationVerdict",
    "VerdictKind",
    "VulnPattern",
    "analyze_file",
    "analyze_source",
    "block_attribute_present",
    "classify_context",
    "detect_partial_mitigation",
    "detect_safe_mechanism",
    "evaluate",
    "has_mitigation",
    "match_vulnerability_patterns",
    "parse_contract",
    "phase1_filter",
    "phase2_label",
    "phase3_classify",
    "public_callers",
    "refine",
    "run_corpus",
    "validate",
]
