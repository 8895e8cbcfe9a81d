"""Gated recurrent cell, encoder fold, and greedy decoding.

Cell update, given input x_t and previous state h:
    z = sigmoid(W_z x_t + U_z h)
    r = sigmoid(W_r x_t + U_r h)
    c = tanh(W x_t + U (r * h))
    h' = (1 - z) * h + z * c
No bias terms; the update gate z mixes the old state with the candidate c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .vocab import BOS, EOS, Vocab

INIT_SCALE = 0.08


@dataclass
class GruCellParams:
    """The six cell matrices: three input projections (hidden x input)
    and three recurrent projections (hidden x hidden)."""

    W_z: np.ndarray
    U_z: np.ndarray
    W_r: np.ndarray
    U_r: np.ndarray
    W: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        hidden, inp = self.W_z.shape
        for name in ("W_r", "W"):
            if getattr(self, name).shape != (hidden, inp):
                raise ValueError(f"{name} must have shape {(hidden, inp)}")
        for name in ("U_z", "U_r", "U"):
            if getattr(self, name).shape != (hidden, hidden):
                raise ValueError(f"{name} must have shape {(hidden, hidden)}")
        for name in ("W_z", "U_z", "W_r", "U_r", "W", "U"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite values")

    def copy(self) -> "GruCellParams":
        return GruCellParams(*(m.copy() for m in self.matrices()))

    def matrices(self) -> tuple[np.ndarray, ...]:
        return (self.W_z, self.U_z, self.W_r, self.U_r, self.W, self.U)


@dataclass(eq=False)
class GruState:
    """Hidden state vector. Evolved from zero, every component stays in (-1, 1)."""

    h: np.ndarray


@dataclass
class GruModel:
    """Character-level encoder-decoder with a shared embedding and a
    linear projection from decoder states to symbol logits."""

    vocab: Vocab
    embedding: np.ndarray  # |vocab| x input_dim
    encoder: GruCellParams
    decoder: GruCellParams
    output_proj: np.ndarray  # |vocab| x hidden_dim
    hidden_dim: int
    input_dim: int

    def __post_init__(self):
        if self.embedding.shape != (len(self.vocab), self.input_dim):
            raise ValueError("embedding shape must be |vocab| x input_dim")
        if self.output_proj.shape != (len(self.vocab), self.hidden_dim):
            raise ValueError("output_proj shape must be |vocab| x hidden_dim")

    def copy(self) -> "GruModel":
        return GruModel(
            vocab=self.vocab,
            embedding=self.embedding.copy(),
            encoder=self.encoder.copy(),
            decoder=self.decoder.copy(),
            output_proj=self.output_proj.copy(),
            hidden_dim=self.hidden_dim,
            input_dim=self.input_dim,
        )


def _sigmoid(a: np.ndarray) -> np.ndarray:
    # Logistic function via tanh: overflow-safe for any argument.
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def _cell_forward(params: GruCellParams, x, h):
    """One cell update; returns the new state and the backward cache."""
    z = _sigmoid(params.W_z @ x + params.U_z @ h)
    r = _sigmoid(params.W_r @ x + params.U_r @ h)
    rh = r * h
    c = np.tanh(params.W @ x + params.U @ rh)
    h_new = (1.0 - z) * h + z * c
    return h_new, (x, h, z, r, rh, c)


def gru_cell_step(params: GruCellParams, x_t: np.ndarray, h_prev: GruState) -> GruState:
    """Apply the cell update once."""
    x_t = np.asarray(x_t, dtype=float)
    h = np.asarray(h_prev.h, dtype=float)
    if x_t.shape != (params.W_z.shape[1],):
        raise ValueError(f"input must have length {params.W_z.shape[1]}")
    if h.shape != (params.W_z.shape[0],):
        raise ValueError(f"state must have length {params.W_z.shape[0]}")
    h_new, _ = _cell_forward(params, x_t, h)
    return GruState(h=h_new)


def zero_state(hidden_dim: int) -> GruState:
    return GruState(h=np.zeros(hidden_dim))


def encoder_forward(model: GruModel, ids) -> GruState:
    """Fold the encoder cell over the embedded ids from the zero state."""
    ids = list(ids)
    if not ids:
        raise ValueError("encoder input must be non-empty")
    h = np.zeros(model.hidden_dim)
    for i in ids:
        h, _ = _cell_forward(model.encoder, model.embedding[i], h)
    return GruState(h=h)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    return shifted - np.log(np.exp(shifted).sum())


def _decode_greedy_scored(model: GruModel, context: GruState, max_len: int):
    """Greedy decode returning ids plus the log-probability of every
    emitted symbol (the terminating EOS included)."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    h = np.asarray(context.h, dtype=float)
    prev = BOS
    ids: list[int] = []
    logps: list[float] = []
    for _ in range(max_len):
        h, _ = _cell_forward(model.decoder, model.embedding[prev], h)
        logits = model.output_proj @ h
        sym = int(np.argmax(logits))
        logps.append(float(_log_softmax(logits)[sym]))
        if sym == EOS:
            break
        ids.append(sym)
        prev = sym
    return ids, logps


def decode_greedy(model: GruModel, context: GruState, max_len: int) -> list[int]:
    """Greedy decode from the context state; stops at EOS or max_len
    emitted symbols. BOS/EOS are not part of the returned sequence."""
    ids, _ = _decode_greedy_scored(model, context, max_len)
    return ids


def init_model(
    vocab: Vocab,
    hidden_dim: int = 64,
    input_dim: int = 32,
    seed: int = 0,
) -> GruModel:
    """Fresh model with all weights uniform in [-INIT_SCALE, INIT_SCALE]."""
    rng = np.random.default_rng(seed)

    def uniform(rows, cols):
        return rng.uniform(-INIT_SCALE, INIT_SCALE, size=(rows, cols))

    def cell():
        return GruCellParams(
            W_z=uniform(hidden_dim, input_dim),
            U_z=uniform(hidden_dim, hidden_dim),
            W_r=uniform(hidden_dim, input_dim),
            U_r=uniform(hidden_dim, hidden_dim),
            W=uniform(hidden_dim, input_dim),
            U=uniform(hidden_dim, hidden_dim),
        )

    return GruModel(
        vocab=vocab,
        embedding=uniform(len(vocab), input_dim),
        encoder=cell(),
        decoder=cell(),
        output_proj=uniform(len(vocab), hidden_dim),
        hidden_dim=hidden_dim,
        input_dim=input_dim,
    )
