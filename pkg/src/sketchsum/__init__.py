"""Sketch-then-summarize dialogue summarization pipeline with granularity control."""

from .corpus import (
    Dialogue,
    DialogueSample,
    ReferenceSummary,
    Turn,
    clean_text,
    load_corpus,
    merge_adjacent_turns,
    split_summary_sentences,
    tokenize,
)
from .intent import IntentLabel, LabelingRule, default_rules, label_dialogue, label_turn
from .metrics import RougeScore, evaluate_corpus, length_ratio, rouge_l, rouge_n
from .phrase import ParseTree, Phrase, extract_key_phrases, lcs, parse_bracketed
from .segment import (
    Segmentation,
    align_segments,
    cuts_from_probs,
    insert_highlights,
    select_cuts_topk,
)
from .sketch import Sketch, SketchEntry, build_sketch, serialize_sketch, split_generated
from .generate import (
    GeneratorRequest,
    GeneratorResponse,
    TrainingPair,
    emit_training_pairs,
    longest_k_baseline,
    make_echo_generator,
    make_remote_generator,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "Dialogue",
    "DialogueSample",
    "ReferenceSummary",
    "Turn",
    "clean_text",
    "load_corpus",
    "merge_adjacent_turns",
    "split_summary_sentences",
    "tokenize",
    "IntentLabel",
    "LabelingRule",
    "default_rules",
    "label_dialogue",
    "label_turn",
    "RougeScore",
    "evaluate_corpus",
    "length_ratio",
    "rouge_l",
    "rouge_n",
    "ParseTree",
    "Phrase",
    "extract_key_phrases",
    "lcs",
    "parse_bracketed",
    "Segmentation",
    "align_segments",
    "cuts_from_probs",
    "insert_highlights",
    "select_cuts_topk",
    "Sketch",
    "SketchEntry",
    "build_sketch",
    "serialize_sketch",
    "split_generated",
    "GeneratorRequest",
    "GeneratorResponse",
    "TrainingPair",
    "emit_training_pairs",
    "longest_k_baseline",
    "make_echo_generator",
    "make_remote_generator",
    "summarize",
]
