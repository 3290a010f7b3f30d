"""Function-level mitigation validation.

Risk classification only proves a mitigation exists *somewhere* in a
contract.  This module verifies it guards the functions that actually
contain weak-randomness patterns: a public or external vulnerable function
must carry the mitigation itself; an internal one is checked through its
public callers — every public entry point that can reach it must be guarded.
One pass covers both the direct check and the call-chain check; offender
reasons record which branch fired so the two can be told apart in reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .patterns import MitigationKind, PatternHit
from .source_model import ContractUnit, FunctionRecord, has_mitigation, public_callers
from .textscan import neutralize


class VerdictKind(Enum):
    CORRECT = "CORRECT"
    FALSE_POSITIVE = "FALSE_POSITIVE"
    NO_PATTERN_IN_FUNCTIONS = "NO_PATTERN_IN_FUNCTIONS"


@dataclass(frozen=True)
class Offender:
    name: str
    reason: str


@dataclass(frozen=True)
class ValidationVerdict:
    verdict: VerdictKind
    checked_mitigation: MitigationKind
    offending_functions: tuple[Offender, ...] = ()
    notes: tuple[str, ...] = ()


def validate(
    unit: ContractUnit,
    source_text: str,
    hits: list[PatternHit] | tuple[PatternHit, ...],
    expected: MitigationKind,
) -> ValidationVerdict:
    """Check that *expected* guards every function owning a pattern hit.

    Returns NO_PATTERN_IN_FUNCTIONS when no hit lies inside a function body,
    FALSE_POSITIVE listing all unprotected functions, or CORRECT.  Internal
    functions with no public caller are treated as unreachable, hence
    protected, but noted in the verdict so the information is not lost; the
    same goes for constructors, which only run at deployment.
    """
    text = neutralize(source_text)
    vulnerable = [
        fn for fn in unit.functions
        if any(fn.body_span[0] <= h.span[0] and h.span[1] <= fn.body_span[1] for h in hits)
    ]
    if not vulnerable:
        return ValidationVerdict(VerdictKind.NO_PATTERN_IN_FUNCTIONS, expected)

    offenders: list[Offender] = []
    notes: list[str] = []
    for fn in vulnerable:
        if fn.is_constructor:
            notes.append(f"constructor '{fn.name}' runs once at deployment; not externally callable")
            continue
        if fn.visibility in ("public", "external"):
            if not _guarded(fn, text, expected):
                offenders.append(Offender(
                    name=fn.name,
                    reason=f"direct: {expected.value} not applied to {fn.visibility} function",
                ))
            continue
        callers = public_callers(fn, unit)
        if not callers:
            notes.append(f"internal function '{fn.name}' has no public caller; unreachable, treated as protected")
            continue
        unguarded = [c.name for c in callers if not _guarded(c, text, expected)]
        if unguarded:
            offenders.append(Offender(
                name=fn.name,
                reason=f"via call-chain: unguarded public caller(s): {', '.join(unguarded)}",
            ))

    if offenders:
        return ValidationVerdict(VerdictKind.FALSE_POSITIVE, expected,
                                 offending_functions=tuple(offenders), notes=tuple(notes))
    return ValidationVerdict(VerdictKind.CORRECT, expected, notes=tuple(notes))


def _guarded(fn: FunctionRecord, neutral_text: str, expected: MitigationKind) -> bool:
    body = neutral_text[fn.body_span[0]:fn.body_span[1]]
    return has_mitigation(fn, body, expected)


def merge_verdicts(verdicts: list[ValidationVerdict]) -> ValidationVerdict:
    """File-level verdict across units: any FALSE_POSITIVE wins; otherwise
    CORRECT if at least one unit validated in-function hits; NO_PATTERN only
    when every unit's hits lie outside functions."""
    if not verdicts:
        raise ValueError("merge_verdicts needs at least one verdict")
    offenders: list[Offender] = []
    notes: list[str] = []
    kinds = []
    for v in verdicts:
        offenders.extend(v.offending_functions)
        notes.extend(v.notes)
        kinds.append(v.verdict)
    checked = verdicts[0].checked_mitigation
    if offenders:
        return ValidationVerdict(VerdictKind.FALSE_POSITIVE, checked,
                                 offending_functions=tuple(offenders), notes=tuple(notes))
    if all(k is VerdictKind.NO_PATTERN_IN_FUNCTIONS for k in kinds):
        return ValidationVerdict(VerdictKind.NO_PATTERN_IN_FUNCTIONS, checked, notes=tuple(notes))
    return ValidationVerdict(VerdictKind.CORRECT, checked, notes=tuple(notes))
