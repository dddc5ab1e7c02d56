"""Weak-supervision intent labeling: one interrogative-pronoun category per turn."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .corpus import Dialogue, Turn, tokenize

_TERMINATORS = {".", "!", "?"}


class IntentLabel(str, Enum):
    WHY = "why"
    WHAT = "what"
    WHERE = "where"
    WHEN = "when"
    CONFIRM = "confirm"
    ABSTAIN = "abstain"


# Fixed category priority for tie-breaking when several rules match.
PRIORITY = (
    IntentLabel.WHEN,
    IntentLabel.WHY,
    IntentLabel.WHERE,
    IntentLabel.WHAT,
    IntentLabel.CONFIRM,
)

ANCHOR_START = "start"
ANCHOR_ANYWHERE = "anywhere"


@dataclass(frozen=True)
class LabelingRule:
    category: IntentLabel
    patterns: tuple[str, ...]
    anchor: str = ANCHOR_ANYWHERE

    def __post_init__(self) -> None:
        if self.category is IntentLabel.ABSTAIN:
            raise ValueError("no rule may target ABSTAIN; it is the fallback")
        if not self.patterns:
            raise ValueError("rule patterns must be nonempty")
        if self.anchor not in (ANCHOR_START, ANCHOR_ANYWHERE):
            raise ValueError(f"unknown anchor {self.anchor!r}")


def default_rules() -> list[LabelingRule]:
    """Built-in rules for the five non-abstain categories."""
    return [
        LabelingRule(IntentLabel.WHY, ("why", "why not")),
        LabelingRule(IntentLabel.WHAT, ("what's", "what about", "what is")),
        LabelingRule(IntentLabel.WHERE, ("where",)),
        LabelingRule(IntentLabel.WHEN, ("when", "what time")),
        LabelingRule(
            IntentLabel.CONFIRM,
            (
                "are you",
                "will you",
                "has he",
                "have you",
                "is he",
                "is she",
                "do you",
                "did you",
                "can you",
                "could you",
                "would you",
                "is it",
                "was it",
            ),
            anchor=ANCHOR_START,
        ),
    ]


def load_rules(path: str | Path) -> list[LabelingRule]:
    """Load rules from a JSON array of {"category", "patterns", "anchor"?}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ValueError("rule config must be a JSON array")
    rules = []
    for entry in raw:
        rules.append(
            LabelingRule(
                category=IntentLabel(entry["category"].lower()),
                patterns=tuple(entry["patterns"]),
                anchor=entry.get("anchor", ANCHOR_ANYWHERE),
            )
        )
    return rules


def _sentence_starts(tokens: tuple[str, ...]) -> set[int]:
    starts = {0}
    for i, tok in enumerate(tokens):
        if tok in _TERMINATORS and i + 1 < len(tokens):
            starts.add(i + 1)
    return starts


def _matches(rule: LabelingRule, tokens: tuple[str, ...]) -> bool:
    starts = _sentence_starts(tokens) if rule.anchor == ANCHOR_START else None
    for pattern in rule.patterns:
        pattern_tokens = tokenize(pattern)
        if not pattern_tokens:
            continue
        span = len(pattern_tokens)
        positions = starts if starts is not None else range(len(tokens) - span + 1)
        for pos in positions:
            if list(tokens[pos : pos + span]) == pattern_tokens:
                return True
    return False


def label_turn(turn: Turn, rules: list[LabelingRule]) -> IntentLabel:
    """First matching rule in fixed priority order wins; no match is ABSTAIN.

    CONFIRM only fires on turns containing a question mark.
    """
    by_category: dict[IntentLabel, list[LabelingRule]] = {}
    for rule in rules:
        by_category.setdefault(rule.category, []).append(rule)
    for category in PRIORITY:
        if category is IntentLabel.CONFIRM and "?" not in turn.tokens:
            continue
        for rule in by_category.get(category, []):
            if _matches(rule, turn.tokens):
                return category
    return IntentLabel.ABSTAIN


def label_dialogue(dialogue: Dialogue, rules: list[LabelingRule]) -> list[IntentLabel]:
    return [label_turn(turn, rules) for turn in dialogue.turns]
