"""Summary-sketch construction, serialization, and generated-text splitting."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from .corpus import Dialogue
from .intent import IntentLabel
from .phrase import Phrase

TLDR = "TL;DR"

STYLE_INDEX = "index"
STYLE_HASH = "hash"


@dataclass(frozen=True)
class SketchEntry:
    turn_index: int
    intent: IntentLabel
    phrases: tuple[Phrase, ...] = ()


@dataclass(frozen=True)
class Sketch:
    entries: tuple[SketchEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("sketch must have at least one entry")


def build_sketch(
    dialogue: Dialogue,
    intents: Sequence[IntentLabel],
    keyphrases: Mapping[int, Sequence[Phrase]],
) -> Sketch:
    """One entry per turn, phrases copied in span order."""
    if len(intents) != dialogue.n_turns:
        raise ValueError(
            f"dialogue {dialogue.id!r}: {dialogue.n_turns} turns but {len(intents)} intents"
        )
    entries = []
    for turn, intent in zip(dialogue.turns, intents):
        phrases = tuple(sorted(keyphrases.get(turn.index, ()), key=lambda p: p.start))
        entries.append(SketchEntry(turn_index=turn.index, intent=intent, phrases=phrases))
    return Sketch(entries=tuple(entries))


def restrict_to_segment(sketch: Sketch, start: int, end: int) -> Sketch:
    """Entries for turns start..end inclusive, keeping original indices."""
    entries = tuple(e for e in sketch.entries if start <= e.turn_index <= end)
    if not entries:
        raise ValueError(f"segment ({start}, {end}) covers no sketch entries")
    return Sketch(entries=entries)


def serialize_sketch(sketch: Sketch, style: str = STYLE_INDEX) -> str:
    """Render entries as "<index> <intent> <phrases...>" ending with the TL;DR token.

    The hash style writes "#<intent>" and collapses phrase-less abstain
    entries to "none".
    """
    if style not in (STYLE_INDEX, STYLE_HASH):
        raise ValueError(f"unknown sketch style {style!r}")
    parts: list[str] = []
    for entry in sketch.entries:
        parts.append(str(entry.turn_index))
        if style == STYLE_HASH and entry.intent is IntentLabel.ABSTAIN and not entry.phrases:
            parts.append("none")
            continue
        intent = entry.intent.value
        parts.append(f"#{intent}" if style == STYLE_HASH else intent)
        for phrase in entry.phrases:
            parts.append(phrase.text)
    parts.append(TLDR)
    return " ".join(parts)


class SplitResult(NamedTuple):
    sketch: str
    summary: str
    found_marker: bool


def split_generated(text: str) -> SplitResult:
    """Split generated text at the first TL;DR occurrence.

    Without a marker the whole input is treated as summary and the missing
    marker is flagged.
    """
    idx = text.find(TLDR)
    if idx < 0:
        return SplitResult(sketch="", summary=text.strip(), found_marker=False)
    return SplitResult(
        sketch=text[:idx].strip(),
        summary=text[idx + len(TLDR) :].strip(),
        found_marker=True,
    )
