"""Greedy summary-to-dialogue alignment, highlight insertion, and cut selection."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .corpus import Dialogue, ReferenceSummary, format_dialogue
from .metrics import rouge_n

HL = "<hl>"

SimilarityFn = Callable[[Sequence[str], Sequence[str]], float]


def make_sim(variant: str = "f1") -> SimilarityFn:
    """ROUGE-1 similarity in the requested variant, over unstemmed tokens."""
    if variant not in ("f1", "recall", "precision"):
        raise ValueError(f"unknown sim variant {variant!r}")

    def sim(candidate: Sequence[str], reference: Sequence[str]) -> float:
        return getattr(rouge_n(candidate, reference, 1), variant)

    return sim


@dataclass(frozen=True)
class Segmentation:
    """Cut points t_1..t_{M-1} partitioning turns 1..N into M contiguous segments."""

    cuts: tuple[int, ...]
    n_turns: int

    def __post_init__(self) -> None:
        if self.n_turns < 1:
            raise ValueError("segmentation needs at least one turn")
        previous = 0
        for cut in self.cuts:
            if not (1 <= cut <= self.n_turns - 1):
                raise ValueError(f"cut {cut} out of range 1..{self.n_turns - 1}")
            if cut <= previous:
                raise ValueError(f"cuts must be strictly increasing, got {self.cuts}")
            previous = cut

    @property
    def n_segments(self) -> int:
        return len(self.cuts) + 1

    def segments(self) -> list[tuple[int, int]]:
        """Inclusive 1-based (start, end) turn ranges; the last always ends at N."""
        starts = [1] + [c + 1 for c in self.cuts]
        ends = list(self.cuts) + [self.n_turns]
        return list(zip(starts, ends))


def align_segments(
    dialogue: Dialogue,
    summary: ReferenceSummary,
    sim: SimilarityFn | None = None,
) -> Segmentation:
    """Greedy per-sentence cuts: t_m maximizes sim(turns c_m..t, sentence m).

    The search range leaves room for every later segment; ties pick the
    smallest t.
    """
    n = dialogue.n_turns
    m_total = len(summary.sentences)
    if m_total > n:
        raise ValueError(
            f"dialogue {dialogue.id!r}: more summary sentences ({m_total}) than turns ({n})"
        )
    if sim is None:
        sim = make_sim("f1")

    cuts: list[int] = []
    c = 1
    for m in range(1, m_total):
        sentence_tokens = summary.sentence_tokens[m - 1]
        best_t = c
        best_score = -1.0
        for t in range(c, n - (m_total - m) + 1):
            window: list[str] = []
            for turn in dialogue.turns[c - 1 : t]:
                window.extend(turn.tokens)
            score = sim(window, sentence_tokens)
            if score > best_score:
                best_score = score
                best_t = t
        cuts.append(best_t)
        c = best_t + 1
    return Segmentation(cuts=tuple(cuts), n_turns=n)


@dataclass(frozen=True)
class HighlightedDialogue:
    """Plain rendering with one <hl> pair wrapping the requested segment."""

    text: str
    segment_index: int = 0


def insert_highlights(
    dialogue: Dialogue, segment: tuple[int, int], segment_index: int = 0
) -> HighlightedDialogue:
    start, end = segment
    if not (1 <= start <= end <= dialogue.n_turns):
        raise ValueError(
            f"segment ({start}, {end}) out of bounds for {dialogue.n_turns} turns"
        )
    lines = format_dialogue(dialogue).split("\n")
    lines[start - 1] = f"{HL} {lines[start - 1]}"
    lines[end - 1] = f"{lines[end - 1]} {HL}"
    return HighlightedDialogue(text="\n".join(lines), segment_index=segment_index)


def strip_highlights(text: str) -> str:
    """Inverse of insert_highlights for the plain rendering."""
    return text.replace(f"{HL} ", "").replace(f" {HL}", "")


def highlighted_span(text: str) -> tuple[int, int]:
    """Recover the 1-based (start, end) turn range wrapped by the <hl> pair."""
    if text.count(HL) != 2:
        raise ValueError(f"expected exactly two {HL} tokens")
    start = end = 0
    for i, line in enumerate(text.split("\n"), start=1):
        if line.startswith(f"{HL} "):
            start = i
        if line.endswith(f" {HL}"):
            end = i
    if not (1 <= start <= end):
        raise ValueError("could not locate the highlighted span")
    return start, end


def _check_probs(probs: Sequence[float]) -> None:
    if not probs:
        raise ValueError("probability list is empty")
    for p in probs:
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"probability {p} outside [0, 1]")


def cuts_from_probs(probs: Sequence[float], threshold: float = 0.5) -> Segmentation:
    """Per-turn probabilities to cuts: position i < N cuts when probs[i] > threshold.

    The last turn can never be a cut; no triggered cut means a single segment.
    """
    _check_probs(probs)
    n = len(probs)
    cuts = tuple(i + 1 for i in range(n - 1) if probs[i] > threshold)
    return Segmentation(cuts=cuts, n_turns=n)


def select_cuts_topk(probs: Sequence[float], k: int) -> Segmentation:
    """Choose the K-1 highest-probability cut positions (ties to smaller index)."""
    _check_probs(probs)
    n = len(probs)
    if not (1 <= k <= n):
        raise ValueError(f"K must be in 1..{n}, got {k}")
    positions = sorted(range(1, n), key=lambda i: (-probs[i - 1], i))[: k - 1]
    return Segmentation(cuts=tuple(sorted(positions)), n_turns=n)
