"""Sequence-level forward/backward used by training and loss evaluation.

Mathematically identical to folding the cell step, but the three input
projections run as one matmul over the whole sequence and the two gate
recurrences share one stacked matrix. The per-step loops come from the
compiled kernel when it is available (PARAMDOC_PURE=1 forces the numpy
loops); the batched matmuls stay in numpy either way. Gradients come
back keyed by the individual cell matrix names (views into the stacked
accumulators).
"""

from __future__ import annotations

import os

import numpy as np

from .gru import GruCellParams, GruModel, _sigmoid

if os.environ.get("PARAMDOC_PURE") == "1":
    _kernels = None
else:
    try:
        from . import _gru_speedups as _kernels  # type: ignore[attr-defined]
    except ImportError:
        _kernels = None

BACKEND = "cython" if _kernels is not None else "python"


class StackedCell:
    """Cell matrices in stacked layout: a_in rows are [W_z; W_r; W],
    a_zr rows are [U_z; U_r]; u is the candidate recurrence."""

    __slots__ = ("a_in", "a_zr", "u", "hidden")

    def __init__(self, params: GruCellParams):
        self.hidden = params.W_z.shape[0]
        self.a_in = np.vstack((params.W_z, params.W_r, params.W))
        self.a_zr = np.vstack((params.U_z, params.U_r))
        self.u = np.ascontiguousarray(params.U)


def seq_forward(cell: StackedCell, xs: np.ndarray, h0: np.ndarray):
    """Run the cell over xs (steps x input); returns the state history
    (states[t] is the state before step t, final state last) and the
    per-step gate caches."""
    n = xs.shape[0]
    hidden = cell.hidden
    proj_in = xs @ cell.a_in.T  # n x 3H
    states = np.empty((n + 1, hidden))
    states[0] = h0
    zs = np.empty((n, hidden))
    rs = np.empty((n, hidden))
    rhs = np.empty((n, hidden))
    cs = np.empty((n, hidden))
    if _kernels is not None:
        _kernels.seq_forward_steps(proj_in, cell.a_zr, cell.u, states, zs, rs, rhs, cs)
        return states, (zs, rs, rhs, cs)
    h = states[0]
    for t in range(n):
        zr = _sigmoid(proj_in[t, : 2 * hidden] + cell.a_zr @ h)
        z = zr[:hidden]
        r = zr[hidden:]
        rh = r * h
        c = np.tanh(proj_in[t, 2 * hidden :] + cell.u @ rh)
        h = (1.0 - z) * h + z * c
        zs[t] = z
        rs[t] = r
        rhs[t] = rh
        cs[t] = c
        states[t + 1] = h
    return states, (zs, rs, rhs, cs)


def seq_backward(
    cell: StackedCell,
    xs: np.ndarray,
    states: np.ndarray,
    caches,
    dh_steps: np.ndarray | None,
    dh_final: np.ndarray | None,
):
    """Backward over one sequence.

    dh_steps[t] is the external gradient arriving at the state after
    step t (decoder logits); dh_final arrives at the last state only
    (encoder). Returns (gradient dict with per-matrix names, dxs,
    dh_into_h0).
    """
    zs, rs, rhs, cs = caches
    n, hidden = zs.shape
    dazr = np.empty((n, 2 * hidden))
    das = np.empty((n, hidden))
    carry = np.array(dh_final, dtype=float) if dh_final is not None else np.zeros(hidden)
    if _kernels is not None:
        steps = dh_steps if dh_steps is not None else np.zeros((n, hidden))
        _kernels.seq_backward_steps(
            cell.a_zr, cell.u, states, zs, rs, cs,
            np.ascontiguousarray(steps), carry, dazr, das,
        )
    else:
        for t in range(n - 1, -1, -1):
            dh = carry + dh_steps[t] if dh_steps is not None else carry
            z = zs[t]
            r = rs[t]
            c = cs[t]
            h_prev = states[t]
            daz = dh * (c - h_prev) * z * (1.0 - z)
            da = dh * z * (1.0 - c * c)
            drh = cell.u.T @ da
            dar = drh * h_prev * r * (1.0 - r)
            dazr[t, :hidden] = daz
            dazr[t, hidden:] = dar
            das[t] = da
            carry = dh * (1.0 - z) + cell.a_zr.T @ dazr[t] + drh * r
    d_all = np.hstack((dazr, das))  # n x 3H, columns [daz | dar | da]
    da_in = d_all.T @ xs
    da_zr = dazr.T @ states[:n]
    du = das.T @ rhs
    dxs = d_all @ cell.a_in
    grads = {
        "W_z": da_in[:hidden],
        "W_r": da_in[hidden : 2 * hidden],
        "W": da_in[2 * hidden :],
        "U_z": da_zr[:hidden],
        "U_r": da_zr[hidden:],
        "U": du,
    }
    return grads, dxs, carry


def run_encoder(model: GruModel, source_ids):
    cell = StackedCell(model.encoder)
    xs = model.embedding[source_ids]
    states, caches = seq_forward(cell, xs, np.zeros(model.hidden_dim))
    return cell, xs, states, caches


def run_decoder(model: GruModel, input_ids, h0: np.ndarray):
    cell = StackedCell(model.decoder)
    xs = model.embedding[input_ids]
    states, caches = seq_forward(cell, xs, h0)
    return cell, xs, states, caches
