"""Whitespace word vocabulary with the markup tokens pinned as first-class entries."""
from __future__ import annotations

from dataclasses import dataclass

PAD = "<pad>"
BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"
HIGHLIGHT = "<hl>"
TLDR = "TL;DR"

SPECIALS = (PAD, BOS, EOS, UNK, HIGHLIGHT, TLDR)


def word_tokens(text: str) -> list[str]:
    """Plain whitespace split; keeps <hl> and TL;DR intact as single tokens."""
    return text.split()


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.tokens[: len(SPECIALS)] != SPECIALS:
            raise ValueError("vocabulary must start with the special tokens")
        object.__setattr__(
            self, "_index", {tok: i for i, tok in enumerate(self.tokens)}
        )

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def bos_id(self) -> int:
        return 1

    @property
    def eos_id(self) -> int:
        return 2

    @property
    def unk_id(self) -> int:
        return 3

    def encode(self, text: str) -> list[int]:
        index = self._index
        return [index.get(tok, self.unk_id) for tok in word_tokens(text)]

    def decode(self, ids: list[int]) -> str:
        skip = {self.pad_id, self.bos_id, self.eos_id}
        return " ".join(self.tokens[i] for i in ids if i not in skip)

    @classmethod
    def build(cls, texts: list[str]) -> "Vocab":
        seen: dict[str, None] = {}
        for text in texts:
            for tok in word_tokens(text):
                if tok not in seen:
                    seen[tok] = None
        ordinary = tuple(tok for tok in seen if tok not in SPECIALS)
        return cls(tokens=SPECIALS + ordinary)
