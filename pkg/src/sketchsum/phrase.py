"""Constituency-tree ingestion, LCS, and key-phrase extraction."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .corpus import ReferenceSummary, Turn

_WORD_RE = re.compile(r"\w")

# Articles, prepositions, pronouns, auxiliaries, conjunctions.
DEFAULT_STOPWORDS = frozenset(
    """
    a an the this that these those some any each every no
    i you he she it we they me him her us them my your his its our their
    mine yours hers ours theirs myself yourself himself herself itself
    am is are was were be been being do does did done have has had having
    will would shall should can could may might must
    of in on at by for with about against between into through during
    before after above below to from up down out off over under again
    and or but nor so yet if then than as because while
    not n't s t d ll m re ve
    what which who whom whose when where why how
    there here very too also just only
    """.split()
)

# Fallback candidate spans when no parse tree is available.
FALLBACK_MIN_LEN = 2
FALLBACK_MAX_LEN = 6


class TreeParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class ParseTree:
    """Internal node of a bracketed constituency tree; leaves are plain tokens."""

    label: str
    children: tuple["ParseTree | str", ...]

    def leaves(self) -> list[str]:
        out: list[str] = []
        for child in self.children:
            if isinstance(child, ParseTree):
                out.extend(child.leaves())
            else:
                out.append(child)
        return out


@dataclass(frozen=True)
class Phrase:
    """A constituent yield; span is half-open over the turn's tokens."""

    tokens: tuple[str, ...]
    start: int
    end: int
    source_turn: int = 0

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("phrase tokens must be nonempty")
        if not (0 <= self.start < self.end):
            raise ValueError(f"bad phrase span ({self.start}, {self.end})")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def parse_bracketed(s: str) -> ParseTree:
    """Parse a labeled S-expression like "(S (NP the cat) (VP sat))"."""
    pos = 0
    n = len(s)

    def skip_ws() -> None:
        nonlocal pos
        while pos < n and s[pos].isspace():
            pos += 1

    def parse_node() -> ParseTree:
        nonlocal pos
        skip_ws()
        if pos >= n or s[pos] != "(":
            raise TreeParseError("expected '('", pos)
        pos += 1
        skip_ws()
        label_start = pos
        while pos < n and not s[pos].isspace() and s[pos] not in "()":
            pos += 1
        label = s[label_start:pos]
        if not label:
            raise TreeParseError("missing node label", pos)
        children: list[ParseTree | str] = []
        while True:
            skip_ws()
            if pos >= n:
                raise TreeParseError("unbalanced parentheses", pos)
            if s[pos] == ")":
                pos += 1
                if not children:
                    raise TreeParseError("empty node", pos - 1)
                return ParseTree(label=label, children=tuple(children))
            if s[pos] == "(":
                children.append(parse_node())
            else:
                tok_start = pos
                while pos < n and not s[pos].isspace() and s[pos] not in "()":
                    pos += 1
                children.append(s[tok_start:pos])

    tree = parse_node()
    skip_ws()
    if pos != n:
        raise TreeParseError("trailing content after tree", pos)
    return tree


def enumerate_constituents(tree: ParseTree, source_turn: int = 0) -> list[Phrase]:
    """One Phrase per internal node (its leaf yield), in pre-order."""
    phrases: list[Phrase] = []

    def walk(node: ParseTree, offset: int) -> int:
        start = offset
        child_spans: list[tuple[ParseTree, int]] = []
        for child in node.children:
            if isinstance(child, ParseTree):
                child_spans.append((child, offset))
                offset += len(child.leaves())
            else:
                offset += 1
        phrases.append(
            Phrase(
                tokens=tuple(node.leaves()),
                start=start,
                end=offset,
                source_turn=source_turn,
            )
        )
        for child, child_offset in child_spans:
            walk(child, child_offset)
        return offset

    walk(tree, 0)
    return phrases


def lcs(a: list[str], b: list[str]) -> list[str]:
    """Longest common subsequence; ties resolved toward earlier positions in a."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return []
    # suffix[i][j] = LCS length of a[i:], b[j:]
    suffix = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row = suffix[i]
        below = suffix[i + 1]
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = below[j] if below[j] >= row[j + 1] else row[j + 1]
    out: list[str] = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            out.append(a[i])
            i += 1
            j += 1
        elif suffix[i + 1][j] > suffix[i][j + 1]:
            i += 1
        else:
            j += 1
    return out


def load_stopwords(path: str | Path) -> frozenset[str]:
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


def load_trees(path: str | Path) -> dict[tuple[str, int], ParseTree]:
    """Load a JSONL sidecar of {"id", "turn", "tree"} bracketed strings."""
    trees: dict[tuple[str, int], ParseTree] = {}
    with Path(path).open(encoding="utf-8") as fin:
        for line_no, line in enumerate(fin, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                key = (str(record["id"]), int(record["turn"]))
                trees[key] = parse_bracketed(record["tree"])
            except (json.JSONDecodeError, KeyError, TypeError, TreeParseError) as exc:
                raise ValueError(f"tree sidecar line {line_no}: {exc}") from exc
    return trees


def _is_content(token: str, stopwords: frozenset[str]) -> bool:
    return token not in stopwords and bool(_WORD_RE.search(token))


def _ngram_candidates(turn: Turn) -> list[Phrase]:
    tokens = turn.tokens
    out = []
    max_len = min(FALLBACK_MAX_LEN, len(tokens))
    for length in range(FALLBACK_MIN_LEN, max_len + 1):
        for start in range(len(tokens) - length + 1):
            out.append(
                Phrase(
                    tokens=tokens[start : start + length],
                    start=start,
                    end=start + length,
                    source_turn=turn.index,
                )
            )
    return out


def extract_key_phrases(
    turn: Turn,
    tree: ParseTree | None,
    summary: ReferenceSummary | None,
    min_content: int = 1,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
    lcs_min: int = 2,
    target: str = "summary",
) -> list[Phrase]:
    """Keep candidate phrases whose LCS with the summary passes the threshold.

    A candidate survives when its LCS with the target has at least lcs_min
    tokens of which at least min_content are non-stopwords. Kept phrases are
    pruned to maximal spans (contained phrases dropped) and made
    non-overlapping (longer wins, earlier on ties), sorted by span start.
    """
    if summary is None or not summary.tokens:
        return []
    if target not in ("summary", "sentence"):
        raise ValueError(f"unknown lcs target {target!r}")

    if tree is not None:
        leaves = tree.leaves()
        if tuple(tok.lower() for tok in leaves) != turn.tokens:
            raise ValueError(
                f"turn {turn.index}: tree leaves do not match turn tokens"
            )
        candidates = [
            Phrase(tokens=turn.tokens[p.start : p.end], start=p.start, end=p.end,
                   source_turn=turn.index)
            for p in enumerate_constituents(tree, source_turn=turn.index)
        ]
    else:
        candidates = _ngram_candidates(turn)

    targets: list[list[str]]
    if target == "summary":
        targets = [list(summary.tokens)]
    else:
        targets = [list(sent) for sent in summary.sentence_tokens]

    def passes(phrase: Phrase) -> bool:
        for target_tokens in targets:
            common = lcs(list(phrase.tokens), target_tokens)
            if len(common) < lcs_min:
                continue
            if sum(1 for tok in common if _is_content(tok, stopwords)) >= min_content:
                return True
        return False

    kept = [p for p in candidates if passes(p)]
    if not kept:
        return []

    # Drop phrases strictly contained in another kept phrase; collapse
    # identical spans (unary chains) to one.
    seen_spans = set()
    unique = []
    for p in kept:
        if p.span not in seen_spans:
            seen_spans.add(p.span)
            unique.append(p)
    maximal = [
        p
        for p in unique
        if not any(
            q.start <= p.start and p.end <= q.end and q.span != p.span for q in unique
        )
    ]

    # Resolve overlaps: longer phrase wins, ties go to the earlier span.
    chosen: list[Phrase] = []
    for p in sorted(maximal, key=lambda p: (-(p.end - p.start), p.start)):
        if all(p.end <= c.start or c.end <= p.start for c in chosen):
            chosen.append(p)
    chosen.sort(key=lambda p: p.start)
    return chosen
