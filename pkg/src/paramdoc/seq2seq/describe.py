"""Description generation: the translation route for blank fields."""

from __future__ import annotations

import math
import sys

from ..index import Candidate, CandidateKind
from .gru import GruModel, _decode_greedy_scored, encoder_forward
from .vocab import encode_source

DEFAULT_MAX_LEN = 80


def generate_description(
    model: GruModel, api_name: str, param_name: str, max_len: int = DEFAULT_MAX_LEN
) -> Candidate:
    """Translate the combined api/parameter name into a description.

    The score is exp(mean log-probability of the emitted symbols), so a
    fully confident decode scores 1.0. An immediate EOS yields an empty
    description; consumers filter those.
    """
    ids = encode_source(api_name, param_name, model.vocab)
    context = encoder_forward(model, ids)
    out_ids, logps = _decode_greedy_scored(model, context, max_len)
    # max() keeps the score inside (0, 1] even if exp underflows.
    score = max(math.exp(sum(logps) / len(logps)), sys.float_info.min)
    return Candidate(
        kind=CandidateKind.TRANSLATION_BASED,
        description=model.vocab.decode_ids(out_ids),
        example="",
        ptype="String",
        required=False,
        score=score,
        provenance=(),
    )
