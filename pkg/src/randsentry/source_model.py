"""Structural model of a Solidity source file.

Extracts contracts, functions (visibility, modifiers, body spans), declared
modifiers, and a name-based call graph using lexical scanning with brace
counting over neutralized text — no grammar, which is sufficient for the
flattened verified sources this tool targets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .patterns import (
    MitigationKind,
    future_block_present,
    is_access_control_modifier,
    owner_comparison_present,
    tx_origin_check_present,
)
from .textscan import BraceIndex, matching_paren, neutralize


class UnbalancedBraces(Exception):
    """A brace opened in the source never closes; the file is unparseable."""

    def __init__(self, file_id: str, position: int):
        super().__init__(f"{file_id}: unbalanced braces (block opened at offset {position} never closes)")
        self.file_id = file_id
        self.position = position


VISIBILITIES = ("public", "external", "internal", "private")

# Unstated visibility defaults to public (pre-0.5 semantics): the
# conservative choice for exploitability.
DEFAULT_VISIBILITY = "public"


@dataclass(frozen=True)
class FunctionRecord:
    name: str
    visibility: str
    modifiers: tuple[str, ...]
    body_span: tuple[int, int]
    callees: tuple[str, ...]
    is_constructor: bool = False


@dataclass(frozen=True)
class ContractUnit:
    name: str
    kind: str  # contract | library | interface
    functions: tuple[FunctionRecord, ...]
    declared_modifiers: tuple[str, ...]
    span: tuple[int, int]


@dataclass(frozen=True)
class ContractModel:
    file_id: str
    contracts: tuple[ContractUnit, ...]
    raw_length: int


_CONTRACT_RE = re.compile(r"\b(contract|library|interface)\s+([A-Za-z_$][A-Za-z0-9_$]*)")
_FUNC_RE = re.compile(
    r"\bfunction\s+([A-Za-z_$][A-Za-z0-9_$]*)\s*\("
    r"|\b(constructor|receive|fallback|function)\s*\("
)
_MODIFIER_DECL_RE = re.compile(r"\bmodifier\s+([A-Za-z_$][A-Za-z0-9_$]*)")
_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_CALL_RE = re.compile(r"(?<![A-Za-z0-9_$.])([A-Za-z_$][A-Za-z0-9_$]*)\s*\(")

_MUTABILITY = frozenset({"view", "pure", "payable", "constant"})
_TYPE_NAME_RE = re.compile(r"^(?:u?int\d*|bytes\d*|bool|string|address)$")
_NON_CALLEES = frozenset({
    "if", "for", "while", "do", "return", "returns", "require", "assert",
    "revert", "emit", "new", "keccak256", "sha3", "sha256", "ripemd160",
    "ecrecover", "blockhash", "gasleft", "addmod", "mulmod", "selfdestruct",
    "suicide", "payable", "type", "unchecked", "try", "catch", "assembly",
    "modifier", "function", "constructor", "receive", "fallback", "throw",
    "delete", "using", "is", "super", "this",
})


def parse_contract(source_text: str, file_id: str) -> ContractModel:
    """Parse one source file into its structural model.

    Comments and string literals are blanked before any scanning, so braces
    inside them never corrupt spans.  Raises :class:`UnbalancedBraces` when a
    contract or function block never closes.
    """
    text = neutralize(source_text)
    braces = BraceIndex(text)
    units: list[ContractUnit] = []
    pos = 0
    for m in _CONTRACT_RE.finditer(text):
        if m.start() < pos:
            continue  # declaration-like token inside the previous unit
        open_idx = text.find("{", m.end())
        if open_idx == -1:
            continue
        close_idx = braces.match(open_idx)
        if close_idx is None:
            raise UnbalancedBraces(file_id, open_idx)
        units.append(_scan_unit(
            text, braces, file_id,
            name=m.group(2), kind=m.group(1),
            start=m.start(), open_idx=open_idx, close_idx=close_idx,
        ))
        pos = close_idx + 1
    return ContractModel(file_id=file_id, contracts=tuple(units), raw_length=len(source_text))


def _scan_unit(text: str, braces: BraceIndex, file_id: str, *,
               name: str, kind: str, start: int, open_idx: int, close_idx: int) -> ContractUnit:
    functions: list[FunctionRecord] = []
    modifiers: list[str] = []
    cursor = open_idx + 1
    while cursor < close_idx:
        fm = _FUNC_RE.search(text, cursor, close_idx)
        mm = _MODIFIER_DECL_RE.search(text, cursor, close_idx)
        if fm is None and mm is None:
            break
        if fm is not None and (mm is None or fm.start() < mm.start()):
            record, cursor = _scan_function(text, braces, file_id, fm, unit_name=name)
            if record is not None:
                functions.append(record)
        else:
            modifiers.append(mm.group(1))
            cursor = _skip_declaration(text, braces, file_id, mm.end())
    return ContractUnit(
        name=name, kind=kind,
        functions=tuple(functions),
        declared_modifiers=tuple(modifiers),
        span=(start, close_idx + 1),
    )


def _scan_function(text: str, braces: BraceIndex, file_id: str,
                   fm: re.Match[str], unit_name: str) -> tuple[FunctionRecord | None, int]:
    """Parse one function header starting at *fm*; returns (record, new cursor).

    Declarations without a body (interfaces, abstract functions) yield no
    record — they can neither contain patterns nor be call-graph nodes.
    """
    if fm.group(1):
        fname = fm.group(1)
        keyword = "function"
    else:
        keyword = fm.group(2)
        # A bare `function(` is the pre-0.6 unnamed fallback.
        fname = keyword if keyword != "function" else "fallback"

    paren_open = fm.end() - 1
    paren_close = matching_paren(text, paren_open)
    if paren_close is None:
        return None, len(text)

    visibility: str | None = None
    mods: list[str] = []
    i = paren_close + 1
    body_open = -1
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "{":
            body_open = i
            break
        if c == ";":
            return None, i + 1
        if c == "(":
            end = matching_paren(text, i)
            i = (end + 1) if end is not None else len(text)
            continue
        tok_m = _IDENT_RE.match(text, i)
        if tok_m is None:
            i += 1
            continue
        tok = tok_m.group(0)
        i = tok_m.end()
        if tok in VISIBILITIES:
            visibility = tok
        elif tok in _MUTABILITY or tok == "virtual":
            pass
        elif tok in ("override", "returns"):
            i = _skip_parens_if_any(text, i)
        else:
            mods.append(tok)
            i = _skip_parens_if_any(text, i)

    if body_open == -1:
        return None, len(text)
    body_close = braces.match(body_open)
    if body_close is None:
        raise UnbalancedBraces(file_id, body_open)

    is_ctor = keyword == "constructor" or fname == unit_name
    record = FunctionRecord(
        name="constructor" if keyword == "constructor" else fname,
        visibility=visibility or DEFAULT_VISIBILITY,
        modifiers=tuple(mods),
        body_span=(body_open, body_close + 1),
        callees=_collect_callees(text, body_open + 1, body_close),
        is_constructor=is_ctor,
    )
    return record, body_close + 1


def _skip_parens_if_any(text: str, i: int) -> int:
    j = i
    while j < len(text) and text[j].isspace():
        j += 1
    if j < len(text) and text[j] == "(":
        end = matching_paren(text, j)
        return (end + 1) if end is not None else len(text)
    return i


def _skip_declaration(text: str, braces: BraceIndex, file_id: str, pos: int) -> int:
    """Advance past a modifier declaration: optional params, then `{...}` or `;`."""
    i = pos
    while i < len(text):
        c = text[i]
        if c == "{":
            end = braces.match(i)
            if end is None:
                raise UnbalancedBraces(file_id, i)
            return end + 1
        if c == ";":
            return i + 1
        if c == "(":
            end = matching_paren(text, i)
            i = (end + 1) if end is not None else len(text)
            continue
        i += 1
    return i


def _collect_callees(text: str, start: int, end: int) -> tuple[str, ...]:
    seen: list[str] = []
    for cm in _CALL_RE.finditer(text, start, end):
        ident = cm.group(1)
        if ident in _NON_CALLEES or _TYPE_NAME_RE.match(ident):
            continue
        if _prev_token(text, cm.start(1)) in ("emit", "new"):
            continue
        if ident not in seen:
            seen.append(ident)
    return tuple(seen)


def _prev_token(text: str, pos: int) -> str:
    j = pos - 1
    while j >= 0 and text[j] in " \t\r\n":
        j -= 1
    if j < 0 or not (text[j].isalnum() or text[j] in "_$"):
        return ""
    i = j
    while i >= 0 and (text[i].isalnum() or text[i] in "_$"):
        i -= 1
    return text[i + 1:j + 1]


def public_callers(target: FunctionRecord, unit: ContractUnit) -> list[FunctionRecord]:
    """Public/external functions from which *target* is reachable.

    Walks the name-based caller graph transitively (cycles handled by a
    visited set).  Constructors are not entry points: they run once at
    deployment.  A public function is not its own caller unless it is
    reachable from itself through a cycle.
    """
    callers_of: dict[str, set[str]] = {fn.name: set() for fn in unit.functions}
    for fn in unit.functions:
        for callee in fn.callees:
            if callee in callers_of:
                callers_of[callee].add(fn.name)

    reached: set[str] = set()
    frontier = [target.name]
    while frontier:
        nxt = []
        for fname in frontier:
            for caller in callers_of.get(fname, ()):
                if caller not in reached:
                    reached.add(caller)
                    nxt.append(caller)
        frontier = nxt

    return [
        fn for fn in unit.functions
        if fn.name in reached and fn.visibility in ("public", "external") and not fn.is_constructor
    ]


def has_mitigation(fn: FunctionRecord, body_text: str, kind: MitigationKind) -> bool:
    """Whether *kind* protects this specific function.

    Access control counts when declared as a modifier on the function or as a
    require(msg.sender == owner) guard in its body; tx.origin and future-block
    guards are body statements.
    """
    if kind is MitigationKind.ACCESS_CONTROL:
        if any(is_access_control_modifier(m) for m in fn.modifiers):
            return True
        return owner_comparison_present(body_text)
    if kind is MitigationKind.TX_ORIGIN_CHECK:
        return tx_origin_check_present(body_text)
    if kind is MitigationKind.FUTURE_BLOCK:
        return future_block_present(body_text)
    return False
