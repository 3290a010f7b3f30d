"""Context classification for contracts whose patterns sit outside functions.

Mining tokens use block attributes for proof-of-work puzzles, where
predictability is not a weakness; lottery-style contracts genuinely gamble on
them.  Keyword tallies over identifiers decide between Mining, Lottery, and
Unknown; Unknown is deliberately left to a human.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

from .textscan import neutralize

if TYPE_CHECKING:
    from .source_model import ContractModel


MINING_KEYWORDS = ("mint", "difficulty", "nonce", "mining", "reward")
LOTTERY_KEYWORDS = ("lottery", "jackpot", "prize", "bet", "gamble")


class ContextCategory(Enum):
    MINING = "Mining"
    LOTTERY = "Lottery"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class ContextResult:
    category: ContextCategory
    mining_count: int
    lottery_count: int


class DispositionKind(Enum):
    EXCLUDED = "Excluded"
    CONFIRMED_HIGH_RISK = "ConfirmedHighRisk"
    NEEDS_MANUAL_REVIEW = "NeedsManualReview"


@dataclass(frozen=True)
class FinalDisposition:
    kind: DispositionKind
    reason: str | None = None


def _keyword_regex(keyword: str) -> re.Pattern[str]:
    # Matches the keyword at word-part boundaries inside identifiers, so
    # placeBet and DailyJackpot count while betray does not.  A plural `s`
    # is tolerated (prizes, bets).
    return re.compile(
        rf"(?:(?<![A-Za-z])|(?<=[a-z])(?=[A-Z]))(?i:{keyword})s?(?![a-z])"
    )


_MINING_RES = [(_keyword_regex(k), k) for k in MINING_KEYWORDS]
_LOTTERY_RES = [(_keyword_regex(k), k) for k in LOTTERY_KEYWORDS]
_BLOCK_MEMBER_RE = re.compile(r"block\s*\.\s*$")


def _count(text: str, rules: list[tuple[re.Pattern[str], str]]) -> int:
    total = 0
    for rx, _keyword in rules:
        for m in rx.finditer(text):
            # block.difficulty is the chain attribute, not mining vocabulary.
            if _BLOCK_MEMBER_RE.search(text, max(0, m.start() - 16), m.start()):
                continue
            total += 1
    return total


def classify_context(source_text: str, model: ContractModel) -> ContextResult:
    """Tally mining vs lottery vocabulary over identifiers (comments ignored).

    Strict majority decides; ties — including 0:0 — are Unknown, because a
    contract mixing both vocabularies genuinely needs human review.
    """
    text = neutralize(source_text)
    mining = _count(text, _MINING_RES)
    lottery = _count(text, _LOTTERY_RES)
    if mining > lottery and mining >= 1:
        category = ContextCategory.MINING
    elif lottery > mining and lottery >= 1:
        category = ContextCategory.LOTTERY
    else:
        category = ContextCategory.UNKNOWN
    return ContextResult(category=category, mining_count=mining, lottery_count=lottery)


def refine(category: ContextCategory) -> FinalDisposition:
    """Closed mapping from context category to final disposition."""
    if category is ContextCategory.MINING:
        return FinalDisposition(DispositionKind.EXCLUDED, reason="proof-of-work, not randomness")
    if category is ContextCategory.LOTTERY:
        return FinalDisposition(DispositionKind.CONFIRMED_HIGH_RISK)
    return FinalDisposition(DispositionKind.NEEDS_MANUAL_REVIEW)
