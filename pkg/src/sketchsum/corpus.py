"""Loading, cleaning, and normalization of dialogue-summary corpora.

Canonical JSONL schema, one object per line:

    {"id": str, "dialogue": [{"speaker": str, "text": str}, ...], "summary": str}

The loader also accepts the common distribution format where "dialogue" is a
single newline-separated "Speaker: text" string, and a top-level JSON array
instead of JSONL framing.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

_URL_RE = re.compile(r"https?://\S+|www\.\S+", re.IGNORECASE)
_HASHTAG_RE = re.compile(r"#\w+")
# Emoji blocks: symbols/pictographs plus variation selector and ZWJ.
_EMOJI_RE = re.compile("[\U0001F300-\U0001FAFF☀-➿️‍]")
_WS_RE = re.compile(r"\s+")
# Words keep internal apostrophes ("i'm"); every other punctuation mark
# becomes its own token.
_TOKEN_RE = re.compile(r"\w+(?:'\w+)*|[^\w\s]")
_SENT_BOUNDARY_RE = re.compile(r"(?<=[.!?])\s+")


class CorpusError(ValueError):
    """Malformed corpus file or record."""


def clean_text(raw: str) -> str:
    """Remove URLs, hashtags, and emoji; collapse whitespace.

    Runs to a fixpoint so the result is idempotent even when one removal
    exposes another pattern.
    """
    text = raw
    prev = None
    while text != prev:
        prev = text
        text = _URL_RE.sub(" ", text)
        text = _HASHTAG_RE.sub(" ", text)
        text = _EMOJI_RE.sub(" ", text)
        text = _WS_RE.sub(" ", text).strip()
    return text


def tokenize(text: str) -> list[str]:
    """Lowercase tokens with punctuation split off as separate tokens."""
    return _TOKEN_RE.findall(text.lower())


def split_summary_sentences(text: str) -> list[str]:
    """Split on sentence terminators (. ! ?) followed by whitespace, keeping them."""
    normalized = _WS_RE.sub(" ", text).strip()
    if not normalized:
        return []
    return [part for part in _SENT_BOUNDARY_RE.split(normalized) if part]


@dataclass(frozen=True)
class Turn:
    """One speaker's contiguous message; tokens are derived from text."""

    index: int
    speaker: str
    text: str
    tokens: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"turn index must be >= 1, got {self.index}")
        if not self.speaker:
            raise ValueError("turn speaker must be nonempty")
        object.__setattr__(self, "tokens", tuple(tokenize(self.text)))


@dataclass(frozen=True)
class Dialogue:
    id: str
    turns: tuple[Turn, ...]

    def __post_init__(self) -> None:
        if not self.turns:
            raise ValueError(f"dialogue {self.id!r} has no turns")
        for pos, turn in enumerate(self.turns):
            if turn.index != pos + 1:
                raise ValueError(
                    f"dialogue {self.id!r}: turn at position {pos} has index {turn.index}"
                )
        for a, b in zip(self.turns, self.turns[1:]):
            if a.speaker == b.speaker:
                raise ValueError(
                    f"dialogue {self.id!r}: adjacent turns {a.index},{b.index} share speaker"
                )

    @property
    def n_turns(self) -> int:
        return len(self.turns)

    def token_count(self) -> int:
        return sum(len(t.tokens) for t in self.turns)


def format_dialogue(dialogue: Dialogue) -> str:
    """Canonical plain rendering: one "Speaker: text" line per turn."""
    return "\n".join(f"{t.speaker}: {t.text}" for t in dialogue.turns)


@dataclass(frozen=True)
class ReferenceSummary:
    sentences: tuple[str, ...]
    sentence_tokens: tuple[tuple[str, ...], ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if not self.sentences:
            raise ValueError("reference summary has no sentences")
        object.__setattr__(
            self,
            "sentence_tokens",
            tuple(tuple(tokenize(s)) for s in self.sentences),
        )

    @property
    def text(self) -> str:
        return " ".join(self.sentences)

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(tok for sent in self.sentence_tokens for tok in sent)

    @classmethod
    def from_text(cls, text: str) -> "ReferenceSummary | None":
        sentences = split_summary_sentences(text)
        if not sentences:
            return None
        return cls(tuple(sentences))


@dataclass(frozen=True)
class DialogueSample:
    dialogue: Dialogue
    summary: ReferenceSummary | None = None


def merge_adjacent_turns(turns: list[Turn]) -> list[Turn]:
    """Join adjacent same-speaker turns with a single space and renumber 1..N."""
    if not turns:
        raise ValueError("merge_adjacent_turns requires a nonempty turn list")
    merged: list[tuple[str, list[str]]] = []
    for turn in turns:
        if merged and merged[-1][0] == turn.speaker:
            merged[-1][1].append(turn.text)
        else:
            merged.append((turn.speaker, [turn.text]))
    return [
        Turn(index=i + 1, speaker=speaker, text=" ".join(texts))
        for i, (speaker, texts) in enumerate(merged)
    ]


def parse_speaker_lines(dialogue_text: str) -> list[dict]:
    """Convert a newline-separated "Speaker: text" block to turn dicts.

    Lines without a colon continue the previous turn; leading colon-less
    lines are dropped.
    """
    raw_turns: list[dict] = []
    for line in dialogue_text.splitlines():
        line = line.strip()
        if not line:
            continue
        speaker, sep, text = line.partition(":")
        if sep and speaker.strip():
            raw_turns.append({"speaker": speaker.strip(), "text": text.strip()})
        elif raw_turns:
            raw_turns[-1]["text"] = f"{raw_turns[-1]['text']} {line}".strip()
    return raw_turns


@dataclass
class LoadReport:
    samples: list[DialogueSample]
    skipped_empty: int = 0
    skipped_no_summary: int = 0
    merged_turns: int = 0


def _build_sample(record: dict, line_no: int, split: str) -> tuple[DialogueSample | None, str, int]:
    """Returns (sample-or-None, skip reason, merged turn count)."""
    if "dialogue" not in record:
        raise CorpusError(f"line {line_no}: record missing 'dialogue' field")
    raw_dialogue = record["dialogue"]
    if isinstance(raw_dialogue, str):
        raw_dialogue = parse_speaker_lines(raw_dialogue)
    if not isinstance(raw_dialogue, list):
        raise CorpusError(f"line {line_no}: 'dialogue' must be a list or string")

    turns: list[Turn] = []
    for entry in raw_dialogue:
        if not isinstance(entry, dict) or "speaker" not in entry or "text" not in entry:
            raise CorpusError(f"line {line_no}: dialogue entries need 'speaker' and 'text'")
        text = clean_text(str(entry["text"]))
        speaker = str(entry["speaker"]).strip()
        if text and speaker:
            turns.append(Turn(index=len(turns) + 1, speaker=speaker, text=text))
    if not turns:
        return None, "empty", 0

    merged = merge_adjacent_turns(turns)
    n_merged = len(turns) - len(merged)
    dialogue = Dialogue(id=str(record.get("id", f"record-{line_no}")), turns=tuple(merged))

    summary = None
    if "summary" in record and record["summary"] is not None:
        summary = ReferenceSummary.from_text(str(record["summary"]))
    if summary is None and split != "infer":
        return None, "no_summary", n_merged
    return DialogueSample(dialogue=dialogue, summary=summary), "", n_merged


def _iter_records(path: Path):
    """Yield (line_no, record) from JSONL or a top-level JSON array."""
    content = path.read_text(encoding="utf-8")
    stripped = content.lstrip()
    if stripped.startswith("["):
        try:
            records = json.loads(content)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}: invalid JSON array: {exc}") from exc
        for i, record in enumerate(records, start=1):
            yield i, record
        return
    for line_no, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {line_no}: invalid JSON: {exc}") from exc
        yield line_no, record


def load_corpus_report(path: str | Path, split: str = "train") -> LoadReport:
    """Load and normalize a corpus file.

    split: "train" | "dev" | "test" require a summary per record (records
    without one are skipped with a counter); "infer" keeps summary-less
    records.
    """
    if split not in ("train", "dev", "test", "infer"):
        raise ValueError(f"unknown split {split!r}")
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    report = LoadReport(samples=[])
    for line_no, record in _iter_records(path):
        if not isinstance(record, dict):
            raise CorpusError(f"line {line_no}: record must be a JSON object")
        sample, reason, n_merged = _build_sample(record, line_no, split)
        report.merged_turns += n_merged
        if sample is None:
            if reason == "empty":
                report.skipped_empty += 1
            else:
                report.skipped_no_summary += 1
            continue
        report.samples.append(sample)
    return report


def load_corpus(path: str | Path, split: str = "train") -> list[DialogueSample]:
    return load_corpus_report(path, split).samples


def sample_to_record(sample: DialogueSample) -> dict:
    record: dict = {
        "id": sample.dialogue.id,
        "dialogue": [{"speaker": t.speaker, "text": t.text} for t in sample.dialogue.turns],
    }
    if sample.summary is not None:
        record["summary"] = sample.summary.text
    return record


def write_corpus(samples: list[DialogueSample], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fout:
        for sample in samples:
            fout.write(json.dumps(sample_to_record(sample), ensure_ascii=False) + "\n")
