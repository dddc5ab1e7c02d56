"""genserver command line: fine-tune a checkpoint, then serve it."""
from __future__ import annotations

import argparse
import logging
import sys

from .finetune import FinetuneConfig, finetune
from .server import ServerConfig, serve


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="genserver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("finetune", help="train on emitted pairs and save a checkpoint")
    p.add_argument("pairs", help="training pairs JSONL with source/target fields")
    p.add_argument("out", help="checkpoint output path")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emb-dim", type=int, default=64)
    p.add_argument("--hidden-dim", type=int, default=128)
    p.add_argument("--model-id", default="tiny-seq2seq")

    p = sub.add_parser("serve", help="expose a checkpoint behind the wire protocol")
    p.add_argument("checkpoint")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--max-input-len", type=int, default=512)
    p.add_argument("--beam", type=int, default=4)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    try:
        if args.command == "finetune":
            curve = finetune(
                args.pairs,
                args.out,
                FinetuneConfig(
                    epochs=args.epochs,
                    lr=args.lr,
                    seed=args.seed,
                    emb_dim=args.emb_dim,
                    hidden_dim=args.hidden_dim,
                    model_id=args.model_id,
                ),
            )
            print(f"final loss {curve[-1]:.4f} -> {args.out}")
        else:
            serve(
                ServerConfig(
                    checkpoint=args.checkpoint,
                    port=args.port,
                    max_input_len=args.max_input_len,
                    beam_size=args.beam,
                )
            )
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
