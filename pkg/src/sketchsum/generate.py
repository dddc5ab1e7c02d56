"""End-to-end summarization orchestration, baseline generators, and pair emission."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import requests

from .corpus import Dialogue, DialogueSample, split_summary_sentences
from .cutmodel import CutClassifier, predict_probs
from .intent import IntentLabel, default_rules, label_dialogue
from .phrase import Phrase
from .segment import (
    Segmentation,
    cuts_from_probs,
    highlighted_span,
    insert_highlights,
    select_cuts_topk,
)
from .sketch import (
    Sketch,
    TLDR,
    build_sketch,
    restrict_to_segment,
    serialize_sketch,
    split_generated,
)

MODE_AUTO = "auto"
MODE_FIXED = "fixed"
MODE_ONE = "one"

_SENTENCE_END = (".", "!", "?")


class GeneratorError(RuntimeError):
    """Generator call failed; carries the 1-based segment index when known."""

    def __init__(self, message: str, segment_index: int | None = None):
        super().__init__(message)
        self.segment_index = segment_index


class GeneratorProtocolError(GeneratorError):
    """The remote endpoint violated the wire contract."""


class GeneratorUnavailableError(GeneratorError):
    """The remote endpoint could not be reached after retries."""


@dataclass(frozen=True)
class GeneratorRequest:
    highlighted_text: str
    max_tokens: int = 128

    def __post_init__(self) -> None:
        if self.highlighted_text.count("<hl>") != 2:
            raise ValueError("highlighted_text must contain exactly one <hl> pair")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class GeneratorResponse:
    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("generator response text is empty")


Generator = Callable[[GeneratorRequest], GeneratorResponse]


@dataclass(frozen=True)
class TrainingPair:
    id: str
    segment_index: int
    source: str
    target: str

    def __post_init__(self) -> None:
        if self.source.count("<hl>") != 2:
            raise ValueError("training source must contain exactly one <hl> pair")
        if self.target.count(TLDR) != 1:
            raise ValueError(f"training target must contain exactly one {TLDR}")


@dataclass(frozen=True)
class SummaryResult:
    summary: str
    segmentation: Segmentation
    sketches: tuple[str, ...]
    warnings: tuple[str, ...] = ()


def _resolve_probs(
    dialogue: Dialogue,
    intents: Sequence[IntentLabel],
    model: CutClassifier | None,
    probs: Sequence[float] | None,
) -> Sequence[float]:
    if probs is not None:
        if len(probs) != dialogue.n_turns:
            raise ValueError(
                f"dialogue {dialogue.id!r}: {dialogue.n_turns} turns but "
                f"{len(probs)} probabilities"
            )
        return probs
    if model is None:
        raise ValueError("auto and fixed modes need a model or injected probabilities")
    return predict_probs(model, dialogue, intents)


def summarize(
    dialogue: Dialogue,
    generator: Generator,
    mode: str = MODE_AUTO,
    k: int | None = None,
    intents: Sequence[IntentLabel] | None = None,
    model: CutClassifier | None = None,
    probs: Sequence[float] | None = None,
    threshold: float = 0.5,
    max_tokens: int = 128,
) -> SummaryResult:
    """Segment the dialogue, call the generator once per segment, join sentences."""
    if intents is None:
        intents = label_dialogue(dialogue, default_rules())

    if mode == MODE_ONE:
        segmentation = Segmentation(cuts=(), n_turns=dialogue.n_turns)
    elif mode == MODE_AUTO:
        segmentation = cuts_from_probs(
            _resolve_probs(dialogue, intents, model, probs), threshold
        )
    elif mode == MODE_FIXED:
        if k is None:
            raise ValueError("fixed mode needs k")
        segmentation = select_cuts_topk(
            _resolve_probs(dialogue, intents, model, probs), k
        )
    else:
        raise ValueError(f"unknown mode {mode!r}")

    sentences: list[str] = []
    sketches: list[str] = []
    warnings: list[str] = []
    for seg_index, (start, end) in enumerate(segmentation.segments(), start=1):
        highlighted = insert_highlights(dialogue, (start, end), seg_index)
        request = GeneratorRequest(highlighted.text, max_tokens)
        try:
            response = generator(request)
        except GeneratorError:
            raise
        except Exception as exc:
            raise GeneratorError(
                f"dialogue {dialogue.id!r}: generator failed on segment {seg_index}: {exc}",
                segment_index=seg_index,
            ) from exc
        parts = split_generated(response.text)
        if not parts.found_marker:
            warnings.append(f"segment {seg_index}: response had no {TLDR} marker")
        if not parts.summary:
            warnings.append(f"segment {seg_index}: empty summary sentence, skipped")
            continue
        if len(split_summary_sentences(parts.summary)) > 1:
            warnings.append(f"segment {seg_index}: response has multiple sentences")
        sentences.append(parts.summary)
        sketches.append(parts.sketch)

    return SummaryResult(
        summary=" ".join(sentences),
        segmentation=segmentation,
        sketches=tuple(sketches),
        warnings=tuple(warnings),
    )


def longest_k_baseline(dialogue: Dialogue, k: int) -> str:
    """Render the k turns with the most tokens, kept in original order."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    k = min(k, dialogue.n_turns)
    ranked = sorted(dialogue.turns, key=lambda t: (-len(t.tokens), t.index))[:k]
    chosen = sorted(ranked, key=lambda t: t.index)
    return " ".join(f"{t.speaker} said {t.text}" for t in chosen)


def make_echo_generator(
    dialogue: Dialogue,
    intents: Sequence[IntentLabel],
    keyphrases: Mapping[int, Sequence[Phrase]] | None = None,
    style: str = "index",
) -> Generator:
    """Deterministic test double: echoes the segment sketch and its key phrases.

    The sentence is the segment's key phrases joined, or the first turn's text
    when no phrases were kept.
    """
    sketch = build_sketch(dialogue, intents, keyphrases or {})

    def generate(request: GeneratorRequest) -> GeneratorResponse:
        start, end = highlighted_span(request.highlighted_text)
        segment = restrict_to_segment(sketch, start, end)
        phrase_texts = [p.text for e in segment.entries for p in e.phrases]
        if phrase_texts:
            sentence = " ".join(phrase_texts)
        else:
            sentence = dialogue.turns[start - 1].text
        if not sentence.endswith(_SENTENCE_END):
            sentence += "."
        return GeneratorResponse(f"{serialize_sketch(segment, style)} {sentence}")

    return generate


def remote_generate(
    endpoint: str,
    request: GeneratorRequest,
    timeout: float = 10.0,
    retries: int = 3,
    backoff: float = 0.5,
) -> GeneratorResponse:
    """POST the request to a generator endpoint, retrying transient failures."""
    last_error: Exception | None = None
    for attempt in range(retries):
        if attempt > 0:
            time.sleep(backoff * 2 ** (attempt - 1))
        try:
            resp = requests.post(
                endpoint,
                json={"text": request.highlighted_text, "max_tokens": request.max_tokens},
                timeout=timeout,
            )
        except requests.RequestException as exc:
            last_error = exc
            continue
        if resp.status_code >= 500:
            last_error = GeneratorUnavailableError(
                f"{endpoint} returned {resp.status_code}"
            )
            continue
        if resp.status_code != 200:
            raise GeneratorProtocolError(
                f"{endpoint} returned status {resp.status_code}"
            )
        try:
            payload = resp.json()
        except ValueError as exc:
            raise GeneratorProtocolError(f"{endpoint} returned invalid JSON: {exc}") from exc
        if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
            raise GeneratorProtocolError(f"{endpoint} response missing 'text' field")
        return GeneratorResponse(text=payload["text"])
    raise GeneratorUnavailableError(
        f"{endpoint} unavailable after {retries} attempts: {last_error}"
    )


def make_remote_generator(endpoint: str, **kwargs) -> Generator:
    def generate(request: GeneratorRequest) -> GeneratorResponse:
        return remote_generate(endpoint, request, **kwargs)

    return generate


def emit_training_pairs(
    sample: DialogueSample,
    segmentation: Segmentation,
    sketch: Sketch,
    scope: str = "segment",
) -> list[TrainingPair]:
    """One (highlighted source, sketch + TL;DR + sentence) pair per summary sentence."""
    if sample.summary is None:
        raise ValueError(f"dialogue {sample.dialogue.id!r} has no reference summary")
    if scope not in ("segment", "full"):
        raise ValueError(f"unknown sketch scope {scope!r}")
    sentences = sample.summary.sentences
    if segmentation.n_segments != len(sentences):
        raise ValueError(
            f"dialogue {sample.dialogue.id!r}: {segmentation.n_segments} segments "
            f"but {len(sentences)} summary sentences"
        )
    pairs = []
    for seg_index, (start, end) in enumerate(segmentation.segments(), start=1):
        source = insert_highlights(sample.dialogue, (start, end), seg_index).text
        scoped = restrict_to_segment(sketch, start, end) if scope == "segment" else sketch
        target = f"{serialize_sketch(scoped)} {sentences[seg_index - 1]}"
        pairs.append(
            TrainingPair(
                id=sample.dialogue.id,
                segment_index=seg_index,
                source=source,
                target=target,
            )
        )
    return pairs
