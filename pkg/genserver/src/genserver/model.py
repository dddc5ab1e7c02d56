"""Tiny GRU encoder-decoder with dot attention, small enough to fine-tune on CPU."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch import nn

from .vocab import Vocab


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    emb_dim: int = 64
    hidden_dim: int = 128


class Seq2Seq(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.embedding = nn.Embedding(config.vocab_size, config.emb_dim, padding_idx=0)
        self.encoder = nn.GRU(config.emb_dim, config.hidden_dim, batch_first=True)
        self.decoder = nn.GRU(config.emb_dim, config.hidden_dim, batch_first=True)
        self.out = nn.Linear(config.hidden_dim * 2, config.vocab_size)

    def encode(self, src: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        outputs, state = self.encoder(self.embedding(src))
        return outputs, state

    def decode_step(
        self,
        token: torch.Tensor,
        state: torch.Tensor,
        memory: torch.Tensor,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """One decoder step with dot attention over the encoder memory."""
        emb = self.embedding(token).unsqueeze(1)
        output, state = self.decoder(emb, state)
        scores = torch.bmm(output, memory.transpose(1, 2))
        weights = torch.softmax(scores, dim=-1)
        context = torch.bmm(weights, memory)
        logits = self.out(torch.cat([output, context], dim=-1)).squeeze(1)
        return logits, state

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        """Teacher-forced logits for every target position."""
        memory, state = self.encode(src)
        logits = []
        for step in range(tgt_in.size(1)):
            step_logits, state = self.decode_step(tgt_in[:, step], state, memory)
            logits.append(step_logits)
        return torch.stack(logits, dim=1)

    @torch.no_grad()
    def generate(
        self,
        src_ids: list[int],
        vocab: Vocab,
        max_tokens: int = 64,
        beam_size: int = 4,
    ) -> list[int]:
        """Beam search decode (beam_size 1 degenerates to greedy)."""
        self.eval()
        src = torch.tensor([src_ids or [vocab.unk_id]], dtype=torch.long)
        memory, state = self.encode(src)
        beams = [([vocab.bos_id], 0.0, state, False)]
        for _ in range(max_tokens):
            if all(done for _, _, _, done in beams):
                break
            candidates = []
            for tokens, score, beam_state, done in beams:
                if done:
                    candidates.append((tokens, score, beam_state, True))
                    continue
                token = torch.tensor([tokens[-1]], dtype=torch.long)
                logits, next_state = self.decode_step(token, beam_state, memory)
                log_probs = torch.log_softmax(logits.squeeze(0), dim=-1)
                top = torch.topk(log_probs, k=min(beam_size, log_probs.size(0)))
                for log_prob, token_id in zip(top.values.tolist(), top.indices.tolist()):
                    candidates.append(
                        (
                            tokens + [token_id],
                            score + log_prob,
                            next_state,
                            token_id == vocab.eos_id,
                        )
                    )
            candidates.sort(key=lambda c: c[1], reverse=True)
            beams = candidates[:beam_size]
        return beams[0][0]


def save_checkpoint(path: str | Path, model: Seq2Seq, vocab: Vocab, model_id: str) -> None:
    torch.save(
        {
            "model_id": model_id,
            "config": asdict(model.config),
            "vocab": list(vocab.tokens),
            "state_dict": model.state_dict(),
        },
        path,
    )


def load_checkpoint(path: str | Path) -> tuple[Seq2Seq, Vocab, str]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    vocab = Vocab(tokens=tuple(payload["vocab"]))
    model = Seq2Seq(ModelConfig(**payload["config"]))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, vocab, payload["model_id"]
