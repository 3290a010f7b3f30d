"""Weak-randomness pattern registry and mitigation detectors.

Fifty-eight expressions in nine semantic groups cover the ways Solidity
contracts derive "random" values from chain attributes: direct modulo (G1),
uint casts of keccak256/sha3 (G2), hash-plus-modulo combinations (G3), the
legacy ``block.blockhash`` form (G4), blockhash answer/comparison schemes
(G5), seed/random variable assignments (G6), winner selection (G7), stored
block numbers and blockhash casts (G8), and randomness-keyword context near
hashing (G9).

Expressions are matched against neutralized, whitespace-normalized text, so
comments, string literals, and multi-line argument lists never affect them.
Solidity keywords are matched case-sensitively; heuristic identifier words
(seed, random, winner, answer, ...) case-insensitively, since casing varies
in the wild.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

from .textscan import neutralize, normalize_ws

if TYPE_CHECKING:
    from .source_model import ContractModel


class MitigationKind(Enum):
    """Protection mechanisms recognized by the risk classifier.

    VRF and CommitReveal are safe mechanisms (nobody can exploit); the rest
    are partial mitigations that only narrow the attacker set.
    """

    ACCESS_CONTROL = "AccessControl"
    TX_ORIGIN_CHECK = "TxOriginCheck"
    FUTURE_BLOCK = "FutureBlock"
    VRF = "VRF"
    COMMIT_REVEAL = "CommitReveal"

    @property
    def is_safe_mechanism(self) -> bool:
        return self in (MitigationKind.VRF, MitigationKind.COMMIT_REVEAL)


@dataclass(frozen=True)
class VulnPattern:
    pattern_id: str
    group: str
    expression: str
    description: str
    # Cheap prefilter: every `required` literal and, when non-empty, at least
    # one `any_of` literal must appear (lowercased) before the regex runs.
    required: tuple[str, ...] = ()
    any_of: tuple[str, ...] = ()


@dataclass(frozen=True)
class PatternHit:
    pattern_id: str
    group: str
    span: tuple[int, int]
    enclosing_function: str | None = None


# --- building blocks -------------------------------------------------------

# A blockhash call, accepting the legacy member form but not foo.blockhash().
_BLOCKHASH_CALL = r"(?:block\.blockhash|(?<!\.)blockhash)\s*\("

_ATTR_ANY = (
    r"(?:block\.timestamp|block\.difficulty|block\.prevrandao|block\.number"
    r"|block\.coinbase|block\.gaslimit|\bnow\b|" + _BLOCKHASH_CALL + r"|gasleft\s*\(\s*\))"
)

# Gap inside one statement: never crosses `;` or a brace, so a hit can not
# straddle a function boundary.
_GAP = r"[^;{}]*"


def _ident_with(word: str) -> str:
    """Identifier containing *word* case-insensitively (camel/snake tolerated)."""
    return rf"(?i:[a-z0-9_$]*{word}[a-z0-9_$]*)"


def _build_registry() -> tuple[VulnPattern, ...]:
    pats: list[VulnPattern] = []
    counters: dict[str, int] = {}

    def add(group: str, expression: str, description: str,
            required: tuple[str, ...] = (), any_of: tuple[str, ...] = ()) -> None:
        n = counters.get(group, 0) + 1
        counters[group] = n
        pats.append(VulnPattern(
            pattern_id=f"{group}.{n:02d}",
            group=group,
            expression=expression,
            description=description,
            required=required,
            any_of=any_of,
        ))

    # G1: direct modulo on a block attribute, one pattern per source.
    # `\)*` tolerates casts such as uint(block.timestamp) % n.
    for attr_re, lit, name in (
        (r"block\.timestamp", "block.timestamp", "block.timestamp"),
        (r"\bnow\b", "now", "now"),
        (r"block\.difficulty", "block.difficulty", "block.difficulty"),
        (r"block\.prevrandao", "block.prevrandao", "block.prevrandao"),
        (r"block\.number", "block.number", "block.number"),
        (r"block\.coinbase", "block.coinbase", "block.coinbase"),
        (r"block\.gaslimit", "block.gaslimit", "block.gaslimit"),
    ):
        add("G1", attr_re + r"\s*\)*\s*%",
            f"modulo applied to {name}", required=(lit, "%"))
    add("G1", r"(?<!\.)blockhash\s*\(" + _GAP + r"?\)\s*\)*\s*%",
        "modulo applied to blockhash(...)", required=("blockhash", "%"))
    add("G1", r"block\.blockhash\s*\(" + _GAP + r"?\)\s*\)*\s*%",
        "modulo applied to legacy block.blockhash(...)", required=("block.blockhash", "%"))
    add("G1", r"gasleft\s*\(\s*\)\s*\)*\s*%",
        "modulo applied to gasleft()", required=("gasleft", "%"))

    # G2: uint cast of a keccak256/sha3 hash whose arguments include a block
    # attribute.  One pattern per (cast width, hash) combination.
    g2_casts_keccak = ("uint(?!\\d)", "uint256", "uint128", "uint64", "uint32", "uint16", "uint8")
    for cast in g2_casts_keccak:
        lit = cast.replace("(?!\\d)", "")
        add("G2", rf"\b{cast}\s*\(\s*keccak256\s*\({_GAP}{_ATTR_ANY}",
            f"{lit} cast of keccak256 over a block attribute",
            required=(lit, "keccak256"))
    for cast in ("uint(?!\\d)", "uint256", "uint128", "uint64"):
        lit = cast.replace("(?!\\d)", "")
        add("G2", rf"\b{cast}\s*\(\s*sha3\s*\({_GAP}{_ATTR_ANY}",
            f"{lit} cast of sha3 over a block attribute",
            required=(lit, "sha3"))

    # G3: hash of a block attribute combined with a modulo.
    for attr_re, lit, name in (
        (r"block\.timestamp", "block.timestamp", "block.timestamp"),
        (r"block\.difficulty", "block.difficulty", "block.difficulty"),
        (r"block\.prevrandao", "block.prevrandao", "block.prevrandao"),
        (r"block\.number", "block.number", "block.number"),
        (r"\bnow\b", "now", "now"),
        (r"block\.coinbase", "block.coinbase", "block.coinbase"),
        (r"block\.gaslimit", "block.gaslimit", "block.gaslimit"),
        (r"blockhash", "blockhash", "blockhash"),
        (r"gasleft\s*\(", "gasleft", "gasleft()"),
    ):
        add("G3", rf"keccak256\s*\({_GAP}{attr_re}{_GAP}\)\s*\)*\s*%",
            f"keccak256 over {name} with modulo", required=("keccak256", lit, "%"))
    add("G3", rf"keccak256\s*\(\s*abi\.encodePacked\s*\(\s*{_ATTR_ANY}{_GAP}\)\s*\)\s*\)*\s*%",
        "keccak256(abi.encodePacked(...)) with a block attribute first, modulo",
        required=("keccak256", "abi.encodepacked", "%"))
    add("G3", rf"keccak256\s*\(\s*abi\.encodePacked\s*\({_GAP},\s*{_ATTR_ANY}{_GAP}\)\s*\)\s*\)*\s*%",
        "keccak256(abi.encodePacked(...)) with a block attribute in a later argument, modulo",
        required=("keccak256", "abi.encodepacked", "%"))
    add("G3", rf"keccak256\s*\(\s*abi\.encode\s*\({_GAP}{_ATTR_ANY}{_GAP}\)\s*\)\s*\)*\s*%",
        "keccak256(abi.encode(...)) over a block attribute with modulo",
        required=("keccak256", "abi.encode", "%"))
    add("G3", rf"sha3\s*\({_GAP}{_ATTR_ANY}{_GAP}\)\s*\)*\s*%",
        "sha3 over a block attribute with modulo", required=("sha3", "%"))
    add("G3", rf"\buint\d*\s*\(\s*keccak256\s*\({_GAP}{_ATTR_ANY}{_GAP}\)\s*\)\s*\)*\s*%",
        "uint cast of keccak256 over a block attribute with modulo",
        required=("uint", "keccak256", "%"))
    add("G3", rf"\buint\d*\s*\(\s*sha3\s*\({_GAP}{_ATTR_ANY}{_GAP}\)\s*\)\s*\)*\s*%",
        "uint cast of sha3 over a block attribute with modulo",
        required=("uint", "sha3", "%"))

    # G4: keccak256 fed from the deprecated block.blockhash member.
    add("G4", rf"keccak256\s*\({_GAP}block\.blockhash\s*\(",
        "keccak256 over legacy block.blockhash(...)",
        required=("keccak256", "block.blockhash"))

    # G5: blockhash stored as an answer/result or compared against one.
    add("G5", _ident_with("answer") + rf"\s*=(?!=)\s*{_GAP}?{_BLOCKHASH_CALL}",
        "answer variable assigned from blockhash", required=("answer", "blockhash"))
    add("G5", _ident_with("result") + rf"\s*=(?!=)\s*{_GAP}?{_BLOCKHASH_CALL}",
        "result variable assigned from blockhash", required=("result", "blockhash"))
    add("G5", _BLOCKHASH_CALL + _GAP + r"?\)\s*==",
        "blockhash(...) compared for equality", required=("blockhash", "=="))
    add("G5", r"==\s*" + _BLOCKHASH_CALL,
        "equality comparison against blockhash(...)", required=("blockhash", "=="))

    # G6: seed/random variable assigned from a predictable source.
    g6_sources = (
        (r"block\.timestamp", ("block.timestamp",), (), "block.timestamp"),
        (r"\bnow\b", ("now",), (), "now"),
        (r"block\.(?:difficulty|prevrandao)", (),
         ("block.difficulty", "block.prevrandao"), "block.difficulty/prevrandao"),
        (_BLOCKHASH_CALL, ("blockhash",), (), "blockhash"),
        (r"block\.number", ("block.number",), (), "block.number"),
    )
    for var in ("seed", "random"):
        for src_re, req, any_of, name in g6_sources:
            add("G6", _ident_with(var) + rf"\s*=(?!=){_GAP}?" + src_re,
                f"{var} variable assigned from {name}",
                required=(var,) + req, any_of=any_of)

    # G7: winner selection driven by block attributes.
    add("G7", _ident_with("winner") + rf"\s*=(?!=){_GAP}?{_ATTR_ANY}",
        "winner assigned from a block attribute", required=("winner",))
    add("G7",
        r"(?i:[a-z0-9_$]*(?:player|participant|entrant|ticket|candidate)[a-z0-9_$]*)"
        rf"\s*\[[^\[\];{{}}]*{_ATTR_ANY}[^\[\];{{}}]*\]",
        "participant array indexed by a block attribute",
        any_of=("player", "participant", "entrant", "ticket", "candidate"))

    # G8: stored block numbers and direct uint casts of blockhash.
    add("G8",
        r"(?i:[a-z_$][a-z0-9_$]*(?:block|num)[a-z0-9_$]*)\s*=(?!=)\s*block\.number\s*;",
        "block number stored for a later blockhash read", required=("block.number",))
    add("G8", r"\buint(?!\d)\s*\(\s*" + _BLOCKHASH_CALL,
        "uint cast of blockhash(...)", required=("uint", "blockhash"))
    add("G8", r"\buint256\s*\(\s*" + _BLOCKHASH_CALL,
        "uint256 cast of blockhash(...)", required=("uint256", "blockhash"))

    # G9: randomness vocabulary in the same block-free stretch as a keccak256
    # call over a block attribute.  The window may cross `;` but not braces.
    kw9 = r"(?i:[a-z0-9_$]*(?:random|lottery|lucky|jackpot)[a-z0-9_$]*)"
    kw9_lits = ("random", "lottery", "lucky", "jackpot")
    add("G9", kw9 + rf"[^{{}}]{{0,400}}?keccak256\s*\({_GAP}{_ATTR_ANY}",
        "randomness keyword preceding keccak256 over a block attribute",
        required=("keccak256",), any_of=kw9_lits)
    add("G9", rf"keccak256\s*\({_GAP}{_ATTR_ANY}{_GAP}\)[^{{}}]{{0,400}}?" + kw9,
        "keccak256 over a block attribute followed by a randomness keyword",
        required=("keccak256",), any_of=kw9_lits)

    return tuple(pats)


GROUP_COUNTS = {
    "G1": 10, "G2": 11, "G3": 15, "G4": 1, "G5": 4,
    "G6": 10, "G7": 2, "G8": 3, "G9": 2,
}

REGISTRY: tuple[VulnPattern, ...] = _build_registry()

# Registry cardinality is part of the contract; fail fast on any drift.
_actual = {g: sum(1 for p in REGISTRY if p.group == g) for g in GROUP_COUNTS}
if _actual != GROUP_COUNTS or len(REGISTRY) != 58:  # pragma: no cover
    raise AssertionError(f"pattern registry out of shape: {_actual}")

_COMPILED: dict[str, re.Pattern[str]] = {p.pattern_id: re.compile(p.expression) for p in REGISTRY}


def compiled(pattern_id: str) -> re.Pattern[str]:
    return _COMPILED[pattern_id]


# --- phase-1 keyword filter -------------------------------------------------

_BLOCK_ATTR_PRESENT_RE = re.compile(
    r"block\.timestamp|block\.difficulty|block\.number|block\.coinbase"
    r"|block\.gaslimit|block\.prevrandao"
    r"|(?<![A-Za-z0-9_$])blockhash(?![A-Za-z0-9_$])"
    r"|gasleft\s*\("
    r"|(?<![A-Za-z0-9_$])now(?![A-Za-z0-9_$])"
)


def block_attribute_present(source_text: str) -> bool:
    """True when any block attribute keyword occurs anywhere in the source.

    Deliberately a coarse token check (the corpus pre-filter); `now` only
    counts as a standalone token.
    """
    return bool(_BLOCK_ATTR_PRESENT_RE.search(source_text))


# --- pattern matching -------------------------------------------------------

def match_vulnerability_patterns(source_text: str, model: ContractModel) -> list[PatternHit]:
    """All registry hits in *source_text*, annotated with enclosing functions.

    Matching runs on neutralized, whitespace-normalized text; reported spans
    refer to the original source.  A hit's enclosing function is the function
    whose body span contains the whole hit, when one exists.
    """
    norm, starts, ends = normalize_ws(neutralize(source_text))
    lower = norm.lower()
    bodies = [
        (fn.name, fn.body_span)
        for unit in model.contracts
        for fn in unit.functions
    ]
    hits: list[PatternHit] = []
    for pat in REGISTRY:
        if any(lit not in lower for lit in pat.required):
            continue
        if pat.any_of and not any(lit in lower for lit in pat.any_of):
            continue
        for m in _COMPILED[pat.pattern_id].finditer(norm):
            a, b = m.span()
            span = (starts[a], ends[b - 1])
            hits.append(PatternHit(
                pattern_id=pat.pattern_id,
                group=pat.group,
                span=span,
                enclosing_function=_enclosing(span, bodies),
            ))
    hits.sort(key=lambda h: (h.span, h.pattern_id))
    return hits


def _enclosing(span: tuple[int, int], bodies: list[tuple[str, tuple[int, int]]]) -> str | None:
    for name, (lo, hi) in bodies:
        if lo <= span[0] and span[1] <= hi:
            return name
    return None


# --- safe mechanisms and partial mitigations --------------------------------

_VRF_RE = re.compile(r"\bVRFConsumerBase|\brequestRandomWords\b|\bfulfillRandomness\b")


def detect_safe_mechanism(source_text: str, model: ContractModel) -> MitigationKind | None:
    """VRF or commit-reveal usage; VRF wins when both apply."""
    if _VRF_RE.search(neutralize(source_text)):
        return MitigationKind.VRF
    names = [fn.name.lower() for unit in model.contracts for fn in unit.functions]
    if any("commit" in n for n in names) and any("reveal" in n for n in names):
        return MitigationKind.COMMIT_REVEAL
    return None


# onlyOwner/onlyAdmin style tokens; underscores tolerated.
_ACCESS_TOKEN_RE = re.compile(r"(?i)\bonly_?(owner|admin)")
_SENDER_EQ_RE = re.compile(r"msg\.sender\s*==\s*([A-Za-z_$][A-Za-z0-9_$]*)")
_EQ_SENDER_RE = re.compile(r"([A-Za-z_$][A-Za-z0-9_$]*)\s*(?:\(\s*\))?\s*==\s*msg\.sender")
_TX_ORIGIN_RE = re.compile(r"tx\.origin\s*==\s*msg\.sender|msg\.sender\s*==\s*tx\.origin")
_FUTURE_BLOCK_RE = re.compile(r"block\.number\s*\+")


def is_access_control_modifier(name: str) -> bool:
    """Heuristic: owner/admin in the modifier name marks it as access control."""
    low = name.lower()
    return "owner" in low or "admin" in low


def owner_comparison_present(text: str) -> bool:
    """require(msg.sender == owner)-style guard, either operand order."""
    for rx in (_SENDER_EQ_RE, _EQ_SENDER_RE):
        for m in rx.finditer(text):
            ident = m.group(1).lower()
            if "owner" in ident or "admin" in ident:
                return True
    return False


def tx_origin_check_present(text: str) -> bool:
    return bool(_TX_ORIGIN_RE.search(text))


def future_block_present(text: str) -> bool:
    return bool(_FUTURE_BLOCK_RE.search(text))


def detect_partial_mitigation(
    source_text: str,
    model: ContractModel,
    span: tuple[int, int] | None = None,
) -> MitigationKind | None:
    """Contract-level mitigation detection, AccessControl taking precedence.

    This is intentionally naive — a token anywhere in the scanned region
    counts — because the validation phase exists to expose exactly the false
    positives this produces.  *span* restricts the scan to one contract unit.
    """
    text = neutralize(source_text)
    if span is not None:
        text = text[span[0]:span[1]]
    if _ACCESS_TOKEN_RE.search(text) or owner_comparison_present(text):
        return MitigationKind.ACCESS_CONTROL
    if tx_origin_check_present(text):
        return MitigationKind.TX_ORIGIN_CHECK
    if future_block_present(text):
        return MitigationKind.FUTURE_BLOCK
    return None
