# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled time-step loops for the GRU recurrence.

Only the sequential per-step work lives here (gate activations and the
two recurrent matrix-vector products); the sequence-level matmuls stay
in numpy where BLAS handles them. Mirrors the numpy loops in
_fastpath.py.
"""

from libc.math cimport tanh

BACKEND = "cython"


cdef inline double sigmoid(double a) nogil:
    return 0.5 * (1.0 + tanh(0.5 * a))


def seq_forward_steps(
    double[:, ::1] proj_in,   # n x 3H: precomputed [W_z x; W_r x; W x]
    double[:, ::1] a_zr,      # 2H x H: stacked [U_z; U_r]
    double[:, ::1] u,         # H x H
    double[:, ::1] states,    # (n+1) x H, states[0] preloaded with h0
    double[:, ::1] zs,
    double[:, ::1] rs,
    double[:, ::1] rhs,
    double[:, ::1] cs,
):
    cdef Py_ssize_t n = proj_in.shape[0]
    cdef Py_ssize_t hidden = u.shape[0]
    cdef Py_ssize_t t, i, j
    cdef double acc, z, r, c, h_i
    with nogil:
        for t in range(n):
            for i in range(2 * hidden):
                acc = 0.0
                for j in range(hidden):
                    acc += a_zr[i, j] * states[t, j]
                if i < hidden:
                    zs[t, i] = sigmoid(proj_in[t, i] + acc)
                else:
                    rs[t, i - hidden] = sigmoid(proj_in[t, i] + acc)
            for i in range(hidden):
                rhs[t, i] = rs[t, i] * states[t, i]
            for i in range(hidden):
                acc = 0.0
                for j in range(hidden):
                    acc += u[i, j] * rhs[t, j]
                c = tanh(proj_in[t, 2 * hidden + i] + acc)
                cs[t, i] = c
                z = zs[t, i]
                states[t + 1, i] = (1.0 - z) * states[t, i] + z * c


def seq_backward_steps(
    double[:, ::1] a_zr,
    double[:, ::1] u,
    double[:, ::1] states,
    double[:, ::1] zs,
    double[:, ::1] rs,
    double[:, ::1] cs,
    double[:, ::1] dh_steps,  # n x H external per-step gradients (may be all-zero)
    double[::1] carry,        # in: gradient at the final state; out: gradient at h0
    double[:, ::1] dazr,      # n x 2H out
    double[:, ::1] das,       # n x H out
):
    cdef Py_ssize_t n = zs.shape[0]
    cdef Py_ssize_t hidden = u.shape[0]
    cdef Py_ssize_t t, i, j
    cdef double acc, dh_i, z, r, c, da_i, d
    with nogil:
        for t in range(n - 1, -1, -1):
            # da = dh * z * (1 - c^2); daz = dh * (c - h_prev) * z * (1 - z)
            for i in range(hidden):
                dh_i = carry[i] + dh_steps[t, i]
                z = zs[t, i]
                c = cs[t, i]
                das[t, i] = dh_i * z * (1.0 - c * c)
                dazr[t, i] = dh_i * (c - states[t, i]) * z * (1.0 - z)
                carry[i] = dh_i * (1.0 - z)
            # drh = U^T da, reused for dar and the r-gated carry term
            for i in range(hidden):
                dazr[t, hidden + i] = 0.0
            for i in range(hidden):
                da_i = das[t, i]
                for j in range(hidden):
                    dazr[t, hidden + j] += u[i, j] * da_i
            for i in range(hidden):
                acc = dazr[t, hidden + i]  # still drh here
                r = rs[t, i]
                carry[i] += acc * r
                dazr[t, hidden + i] = acc * states[t, i] * r * (1.0 - r)
            # carry += A_zr^T dazr
            for i in range(2 * hidden):
                d = dazr[t, i]
                for j in range(hidden):
                    carry[j] += a_zr[i, j] * d
