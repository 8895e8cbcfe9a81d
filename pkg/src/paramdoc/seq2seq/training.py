"""Teacher-forced training and numerical gradient validation.

The objective for one (source, target) pair is the mean cross-entropy
per emitted symbol: decoder inputs are the BOS-shifted target, the last
supervised symbol is EOS. Updates are plain per-pair gradient descent in
the given pair order with global-norm clipping, so a fixed seed and pair
order reproduce the loss series bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from ._fastpath import run_decoder, run_encoder, seq_backward
from .gru import GruModel
from .vocab import BOS, EOS

GRAD_CLIP_NORM = 5.0
STALL_WINDOW = 5
STALL_RELATIVE_IMPROVEMENT = 0.01
LR_DECAY = 0.5
GRADIENT_CHECK_SAMPLES = 200
_GRADIENT_CHECK_SEED = 20230517

PARAM_NAMES = (
    "embedding",
    "encoder.W_z",
    "encoder.U_z",
    "encoder.W_r",
    "encoder.U_r",
    "encoder.W",
    "encoder.U",
    "decoder.W_z",
    "decoder.U_z",
    "decoder.W_r",
    "decoder.U_r",
    "decoder.W",
    "decoder.U",
    "output_proj",
)


def _param_arrays(model: GruModel) -> dict[str, np.ndarray]:
    out = {"embedding": model.embedding, "output_proj": model.output_proj}
    for prefix, cell in (("encoder", model.encoder), ("decoder", model.decoder)):
        for name in ("W_z", "U_z", "W_r", "U_r", "W", "U"):
            out[f"{prefix}.{name}"] = getattr(cell, name)
    return out


def _teacher_forced_logits(model: GruModel, source_ids, target_ids):
    """Forward pass; returns everything backward needs."""
    enc = run_encoder(model, source_ids)
    inputs = [BOS] + list(target_ids)
    targets = list(target_ids) + [EOS]
    dec = run_decoder(model, inputs, enc[2][-1])
    logits = dec[2][1:] @ model.output_proj.T  # steps x |vocab|
    return enc, dec, inputs, targets, logits


def _mean_cross_entropy(logits: np.ndarray, targets) -> float:
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(len(targets)), targets]
    return float(np.mean(log_z - picked))


def pair_loss(model: GruModel, pair) -> float:
    """Mean per-symbol cross-entropy of one pair under teacher forcing."""
    source_ids, target_ids = pair
    source_ids = list(source_ids)
    if not source_ids:
        raise ValueError("source ids must be non-empty")
    _, _, _, targets, logits = _teacher_forced_logits(model, source_ids, target_ids)
    return _mean_cross_entropy(logits, targets)


def loss_and_grads(model: GruModel, pair):
    """Loss of one pair plus gradients for every parameter array."""
    source_ids, target_ids = pair
    source_ids = list(source_ids)
    if not source_ids:
        raise ValueError("source ids must be non-empty")
    enc, dec, inputs, targets, logits = _teacher_forced_logits(model, source_ids, target_ids)
    loss = _mean_cross_entropy(logits, targets)

    n_steps = len(targets)
    shifted = logits - logits.max(axis=1, keepdims=True)
    probs = np.exp(shifted)
    probs /= probs.sum(axis=1, keepdims=True)
    probs[np.arange(n_steps), targets] -= 1.0
    probs /= n_steps

    dec_cell, dec_xs, dec_states, dec_caches = dec
    enc_cell, enc_xs, enc_states, enc_caches = enc
    d_output_proj = probs.T @ dec_states[1:]
    dh_steps = probs @ model.output_proj
    dec_grads, dec_dxs, dh_enc = seq_backward(
        dec_cell, dec_xs, dec_states, dec_caches, dh_steps, None
    )
    enc_grads, enc_dxs, _ = seq_backward(
        enc_cell, enc_xs, enc_states, enc_caches, None, dh_enc
    )
    d_embedding = np.zeros_like(model.embedding)
    np.add.at(d_embedding, inputs, dec_dxs)
    np.add.at(d_embedding, source_ids, enc_dxs)

    grads = {"embedding": d_embedding, "output_proj": d_output_proj}
    for name, g in enc_grads.items():
        grads[f"encoder.{name}"] = g
    for name, g in dec_grads.items():
        grads[f"decoder.{name}"] = g
    return loss, grads


def _clip_global_norm(grads: dict, max_norm: float) -> None:
    norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale


def corpus_loss(model: GruModel, pairs) -> float:
    """Mean of the per-pair losses (each already per-symbol)."""
    return float(np.mean([pair_loss(model, p) for p in pairs]))


@dataclass
class TrainResult:
    model: GruModel
    losses: list[float]
    final_learning_rate: float


def train(
    model: GruModel,
    pairs,
    epochs: int,
    learning_rate: float = 0.1,
) -> TrainResult:
    """Gradient-descent training over the pairs, one update per pair per
    epoch, visiting pairs in the given order.

    The loss series holds one entry per epoch: the corpus loss measured
    before that epoch's updates. The learning rate halves whenever the
    series improves by less than 1% over the last 5 epochs.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("pairs must be non-empty")
    n_symbols = len(model.vocab)
    for src, tgt in pairs:
        ids = list(src) + list(tgt)
        if not list(src):
            raise ValueError("source ids must be non-empty")
        if any(not 0 <= i < n_symbols for i in ids):
            raise ValueError("pair contains ids outside the vocabulary")

    model = model.copy()
    params = _param_arrays(model)
    lr = learning_rate
    losses: list[float] = []
    last_decay = 0
    for epoch in range(epochs):
        epoch_loss = corpus_loss(model, pairs)
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"non-finite loss at epoch {epoch}")
        losses.append(epoch_loss)
        window_ago = losses[epoch - STALL_WINDOW] if epoch >= STALL_WINDOW else None
        stalled = (
            epoch - last_decay >= STALL_WINDOW
            and window_ago is not None
            and window_ago > 0
            and (window_ago - epoch_loss) < STALL_RELATIVE_IMPROVEMENT * window_ago
            # A stall needs a true plateau: slow but steady descent keeps
            # setting new minima and must not trigger decay.
            and min(losses[-STALL_WINDOW:]) >= min(losses[:-STALL_WINDOW])
        )
        if stalled:
            lr *= LR_DECAY
            last_decay = epoch
        if lr == 0.0:
            continue
        for pair in pairs:
            loss, grads = loss_and_grads(model, pair)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            _clip_global_norm(grads, GRAD_CLIP_NORM)
            for name, arr in params.items():
                arr -= lr * grads[name]
    return TrainResult(model=model, losses=losses, final_learning_rate=lr)


@dataclass(frozen=True)
class GradientCheckReport:
    max_rel_error: float
    n_checked: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def gradient_check(
    model: GruModel,
    pair,
    epsilon: float = 1e-5,
    tolerance: float = 1e-4,
) -> GradientCheckReport:
    """Compare analytic gradients against central finite differences on a
    random subsample of parameter coordinates.

    Relative error per coordinate is |ga - gf| / max(|ga|, |gf|, 1e-8);
    the floor keeps saturated near-zero gradients from blowing up the
    ratio.
    """
    if not 1e-6 <= epsilon <= 1e-4:
        raise ValueError("epsilon must lie in [1e-6, 1e-4]")
    model = model.copy()
    params = _param_arrays(model)
    _, grads = loss_and_grads(model, pair)

    sizes = [(name, params[name].size) for name in PARAM_NAMES]
    total = sum(s for _, s in sizes)
    rng = np.random.default_rng(_GRADIENT_CHECK_SEED)
    n_samples = min(GRADIENT_CHECK_SAMPLES, total)
    flat_choices = rng.choice(total, size=n_samples, replace=False)

    max_rel = 0.0
    for flat in sorted(int(c) for c in flat_choices):
        offset = flat
        for name, size in sizes:
            if offset < size:
                break
            offset -= size
        arr = params[name]
        original = arr.flat[offset]
        arr.flat[offset] = original + epsilon
        loss_plus = pair_loss(model, pair)
        arr.flat[offset] = original - epsilon
        loss_minus = pair_loss(model, pair)
        arr.flat[offset] = original
        g_fd = (loss_plus - loss_minus) / (2.0 * epsilon)
        g_an = grads[name].flat[offset]
        rel = abs(g_an - g_fd) / max(abs(g_an), abs(g_fd), 1e-8)
        max_rel = max(max_rel, rel)
    return GradientCheckReport(max_rel_error=max_rel, n_checked=n_samples, tolerance=tolerance)
