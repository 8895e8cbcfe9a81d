"""Character-level GRU encoder-decoder: api/parameter name -> description."""

from __future__ import annotations

from typing import Iterable

from ..errors import ParseError
from .checkpoint import load_model, save_model
from .describe import generate_description
from .gru import (
    GruCellParams,
    GruModel,
    GruState,
    decode_greedy,
    encoder_forward,
    gru_cell_step,
    init_model,
    zero_state,
)
from .training import (
    GradientCheckReport,
    TrainResult,
    corpus_loss,
    gradient_check,
    loss_and_grads,
    pair_loss,
    train,
)
from .vocab import BOS, EOS, PAD, SEP, UNK, Vocab, build_vocab, encode_source

__all__ = [
    "BOS",
    "EOS",
    "PAD",
    "SEP",
    "UNK",
    "GradientCheckReport",
    "GruCellParams",
    "GruModel",
    "GruState",
    "TrainResult",
    "Vocab",
    "build_vocab",
    "corpus_loss",
    "decode_greedy",
    "encode_pairs",
    "encode_source",
    "encoder_forward",
    "generate_description",
    "gradient_check",
    "gru_cell_step",
    "init_model",
    "load_model",
    "loss_and_grads",
    "pair_loss",
    "read_pair_file",
    "save_model",
    "train",
    "zero_state",
]


def read_pair_file(lines: Iterable[str], source: str = "pairs") -> list[tuple[str, str, str]]:
    """Parse training records: api_name TAB param_name TAB description."""
    triples = []
    for i, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError("expected api_name<TAB>param_name<TAB>description", f"{source}:{i}")
        triples.append((parts[0], parts[1], parts[2]))
    return triples


def encode_pairs(
    triples: Iterable[tuple[str, str, str]], vocab: Vocab
) -> list[tuple[list[int], list[int]]]:
    """Turn (api, param, description) triples into (source, target) id pairs."""
    return [
        (encode_source(api, param, vocab), vocab.encode_text(description))
        for api, param, description in triples
    ]
