"""From-scratch ROUGE-1/2/L scoring and corpus-level evaluation."""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .corpus import Dialogue, tokenize
from .phrase import lcs
from .stem import porter_stem

_ALNUM_RE = re.compile(r"[a-z0-9]+")

# ROUGE tooling conventionally stems only words longer than three characters.
_STEM_MIN_LEN = 4


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def zero(cls) -> "RougeScore":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_counts(cls, match: float, candidate_total: int, reference_total: int) -> "RougeScore":
        if candidate_total <= 0 or reference_total <= 0:
            return cls.zero()
        p = match / candidate_total
        r = match / reference_total
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(p, r, f1)


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap (multiset intersection) precision/recall/F1."""
    if n not in (1, 2):
        raise ValueError(f"rouge_n supports n in {{1, 2}}, got {n}")
    cand_counts = _ngram_counts(candidate, n)
    ref_counts = _ngram_counts(reference, n)
    match = sum((cand_counts & ref_counts).values())
    return RougeScore.from_counts(
        match, sum(cand_counts.values()), sum(ref_counts.values())
    )


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """LCS-based precision/recall/F1."""
    if not candidate or not reference:
        return RougeScore.zero()
    length = len(lcs(list(candidate), list(reference)))
    return RougeScore.from_counts(length, len(candidate), len(reference))


def rouge_tokenize(text: str, stem: bool = False) -> list[str]:
    """Evaluation tokenizer: lowercase alphanumeric runs, optional Porter pass."""
    tokens = _ALNUM_RE.findall(text.lower())
    if stem:
        tokens = [porter_stem(t) if len(t) >= _STEM_MIN_LEN else t for t in tokens]
    return tokens


def length_ratio(summary: str, dialogue: Dialogue) -> float:
    dialogue_tokens = dialogue.token_count()
    if dialogue_tokens == 0:
        raise ValueError(f"dialogue {dialogue.id!r} has zero tokens")
    return len(tokenize(summary)) / dialogue_tokens


@dataclass(frozen=True)
class EvalReport:
    rouge1: float
    rouge2: float
    rougeL: float
    length_ratio: float
    n_records: int

    def to_dict(self) -> dict:
        return {
            "rouge1": self.rouge1,
            "rouge2": self.rouge2,
            "rougeL": self.rougeL,
            "length_ratio": self.length_ratio,
        }


def evaluate_corpus(
    predictions: Sequence[str],
    references: Sequence[str],
    dialogues: Sequence[Dialogue],
    stem: bool = True,
) -> EvalReport:
    """Arithmetic means of per-record ROUGE F1 and summary/dialogue length ratio."""
    if not (len(predictions) == len(references) == len(dialogues)):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions, "
            f"{len(references)} references, {len(dialogues)} dialogues"
        )
    if not predictions:
        raise ValueError("cannot evaluate an empty record set")
    r1 = r2 = rl = ratio = 0.0
    for pred, ref, dialogue in zip(predictions, references, dialogues):
        cand = rouge_tokenize(pred, stem=stem)
        gold = rouge_tokenize(ref, stem=stem)
        r1 += rouge_n(cand, gold, 1).f1
        r2 += rouge_n(cand, gold, 2).f1
        rl += rouge_l(cand, gold).f1
        ratio += length_ratio(pred, dialogue)
    n = len(predictions)
    return EvalReport(r1 / n, r2 / n, rl / n, ratio / n, n)
