"""HTTP generator endpoint and fine-tuning entry point for highlighted dialogues."""

from .finetune import FinetuneConfig, finetune, load_pairs
from .model import Seq2Seq, load_checkpoint, save_checkpoint
from .server import GeneratorService, ServerConfig, make_server, serve, serve_in_thread
from .vocab import Vocab

__version__ = "0.1.0"

__all__ = [
    "FinetuneConfig",
    "finetune",
    "load_pairs",
    "Seq2Seq",
    "load_checkpoint",
    "save_checkpoint",
    "GeneratorService",
    "ServerConfig",
    "make_server",
    "serve",
    "serve_in_thread",
    "Vocab",
]
