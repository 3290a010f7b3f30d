"""Phases 1-3: keyword filter, vulnerability labeling, risk classification.

Risk levels are keyed to which attacker classes can exploit the contract:

    SAFE         VRF / commit-reveal      nobody
    LOW_RISK     access control           owner only
    MEDIUM_RISK  tx.origin / future block miner and owner
    HIGH_RISK    no mitigation            anyone

Safe mechanisms take precedence over pattern hits; a contract using VRF is
never labeled vulnerable no matter what legacy code it still carries.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

from .patterns import (
    MitigationKind,
    PatternHit,
    block_attribute_present,
    detect_partial_mitigation,
    detect_safe_mechanism,
    match_vulnerability_patterns,
)
from .source_model import ContractModel, ContractUnit


class RiskLevel(IntEnum):
    """Total order used for worst-case aggregation across contract units."""

    SAFE = 0
    LOW_RISK = 1
    MEDIUM_RISK = 2
    HIGH_RISK = 3


# (external attacker, miner, owner) exploitability per level.
ATTACKER_MATRIX: dict[RiskLevel, tuple[bool, bool, bool]] = {
    RiskLevel.SAFE: (False, False, False),
    RiskLevel.LOW_RISK: (False, False, True),
    RiskLevel.MEDIUM_RISK: (False, True, True),
    RiskLevel.HIGH_RISK: (True, True, True),
}


class LabelKind(Enum):
    SAFE = "safe"
    VULNERABLE = "vulnerable"
    NO_MATCH = "no_match"


@dataclass(frozen=True)
class Labeling:
    kind: LabelKind
    hits: tuple[PatternHit, ...] = ()
    safe_mechanism: MitigationKind | None = None


@dataclass(frozen=True)
class RiskAssessment:
    level: RiskLevel
    mitigation: MitigationKind | None
    hits: tuple[PatternHit, ...]
    attacker_matrix: tuple[bool, bool, bool]


@dataclass(frozen=True)
class UnitAssessment:
    """Per-contract-unit risk; ``unit`` is None for hits outside every unit."""

    unit: ContractUnit | None
    hits: tuple[PatternHit, ...]
    level: RiskLevel
    mitigation: MitigationKind | None


def phase1_filter(source_text: str) -> bool:
    """Corpus pre-filter: mere keyword presence, not vulnerability."""
    return block_attribute_present(source_text)


def phase2_label(source_text: str, model: ContractModel) -> Labeling:
    """Label as Safe (safe mechanism detected), Vulnerable (hits), or NoMatch."""
    safe = detect_safe_mechanism(source_text, model)
    if safe is not None:
        return Labeling(kind=LabelKind.SAFE, safe_mechanism=safe)
    hits = tuple(match_vulnerability_patterns(source_text, model))
    if hits:
        return Labeling(kind=LabelKind.VULNERABLE, hits=hits)
    return Labeling(kind=LabelKind.NO_MATCH)


def _classify_mitigation(mitigation: MitigationKind | None) -> RiskLevel:
    if mitigation is MitigationKind.ACCESS_CONTROL:
        return RiskLevel.LOW_RISK
    if mitigation in (MitigationKind.TX_ORIGIN_CHECK, MitigationKind.FUTURE_BLOCK):
        return RiskLevel.MEDIUM_RISK
    return RiskLevel.HIGH_RISK


def assess_units(labeling: Labeling, source_text: str, model: ContractModel) -> list[UnitAssessment]:
    """Risk-classify every contract unit that owns at least one hit.

    Mitigation detection is scoped to the unit's span.  Hits falling outside
    every unit (file-level code) form one residual assessment scanned at file
    scope.
    """
    out: list[UnitAssessment] = []
    residual = list(labeling.hits)
    for unit in model.contracts:
        lo, hi = unit.span
        unit_hits = tuple(h for h in labeling.hits if lo <= h.span[0] and h.span[1] <= hi)
        if not unit_hits:
            continue
        residual = [h for h in residual if h not in unit_hits]
        mit = detect_partial_mitigation(source_text, model, span=unit.span)
        out.append(UnitAssessment(unit, unit_hits, _classify_mitigation(mit), mit))
    if residual:
        mit = detect_partial_mitigation(source_text, model)
        out.append(UnitAssessment(None, tuple(residual), _classify_mitigation(mit), mit))
    return out


def phase3_classify(labeling: Labeling, source_text: str, model: ContractModel) -> RiskAssessment:
    """File-level risk: SAFE for safe labelings, else the worst unit level."""
    if labeling.kind is LabelKind.SAFE:
        return RiskAssessment(
            level=RiskLevel.SAFE,
            mitigation=labeling.safe_mechanism,
            hits=(),
            attacker_matrix=ATTACKER_MATRIX[RiskLevel.SAFE],
        )
    if labeling.kind is not LabelKind.VULNERABLE:
        raise ValueError("phase3_classify requires a Safe or Vulnerable labeling")
    assessments = assess_units(labeling, source_text, model)
    worst = max(assessments, key=lambda a: a.level)
    return RiskAssessment(
        level=worst.level,
        mitigation=worst.mitigation,
        hits=labeling.hits,
        attacker_matrix=ATTACKER_MATRIX[worst.level],
    )
