"""Fine-tuning entry point consuming emitted training pairs (JSONL source/target)."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .model import ModelConfig, Seq2Seq, save_checkpoint
from .vocab import Vocab

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FinetuneConfig:
    epochs: int = 10
    lr: float = 1e-3
    seed: int = 0
    emb_dim: int = 64
    hidden_dim: int = 128
    max_source_len: int = 512
    model_id: str = "tiny-seq2seq"

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")


def load_pairs(path: str | Path) -> list[tuple[str, str]]:
    pairs = []
    with Path(path).open(encoding="utf-8") as fin:
        for line_no, line in enumerate(fin, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                pairs.append((str(record["source"]), str(record["target"])))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"training pairs line {line_no}: {exc}") from exc
    if not pairs:
        raise ValueError(f"no training pairs in {path}")
    return pairs


def finetune(
    pairs_path: str | Path, out_path: str | Path, config: FinetuneConfig = FinetuneConfig()
) -> list[float]:
    """Train on the pairs file, save a checkpoint, return the per-epoch loss curve."""
    pairs = load_pairs(pairs_path)
    torch.manual_seed(config.seed)

    vocab = Vocab.build([text for pair in pairs for text in pair])
    model = Seq2Seq(
        ModelConfig(vocab_size=len(vocab), emb_dim=config.emb_dim, hidden_dim=config.hidden_dim)
    )
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    criterion = nn.CrossEntropyLoss(ignore_index=vocab.pad_id)

    encoded = []
    for source, target in pairs:
        src = vocab.encode(source)[: config.max_source_len]
        tgt = vocab.encode(target)
        encoded.append(
            (
                torch.tensor([src or [vocab.unk_id]], dtype=torch.long),
                torch.tensor([[vocab.bos_id] + tgt], dtype=torch.long),
                torch.tensor([tgt + [vocab.eos_id]], dtype=torch.long),
            )
        )

    model.train()
    curve = []
    for epoch in range(1, config.epochs + 1):
        total = 0.0
        for src, tgt_in, tgt_out in encoded:
            optimizer.zero_grad()
            logits = model(src, tgt_in)
            loss = criterion(logits.view(-1, logits.size(-1)), tgt_out.view(-1))
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
        epoch_loss = total / len(encoded)
        curve.append(epoch_loss)
        logger.info("epoch %d/%d loss %.4f", epoch, config.epochs, epoch_loss)

    save_checkpoint(out_path, model, vocab, config.model_id)
    return curve
