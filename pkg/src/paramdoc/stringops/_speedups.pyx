# cython: boundscheck=False, wraparound=False
"""Compiled string kernels. Mirrors _pure.py exactly; selected at import time."""

from libc.stdlib cimport free, malloc

from cpython.unicode cimport PyUnicode_Contains

BACKEND = "cython"

DEF CJK_LO = 0x4E00
DEF CJK_HI = 0x9FFF


def levenshtein(str a, str b):
    """Edit distance (insert/delete/substitute, unit costs) between a and b."""
    cdef Py_ssize_t n = len(a), m = len(b)
    cdef Py_ssize_t i, j
    cdef int cost, ins, dele, sub
    cdef int *prev
    cdef int *curr
    cdef int *tmp
    cdef Py_UCS4 *ca
    cdef Py_UCS4 bc
    if a == b:
        return 0
    if n == 0:
        return m
    if m == 0:
        return n
    if n > m:
        a, b = b, a
        n, m = m, n
    prev = <int *> malloc((n + 1) * sizeof(int))
    curr = <int *> malloc((n + 1) * sizeof(int))
    ca = <Py_UCS4 *> malloc(n * sizeof(Py_UCS4))
    if prev == NULL or curr == NULL or ca == NULL:
        free(prev)
        free(curr)
        free(ca)
        raise MemoryError()
    try:
        for j in range(n):
            ca[j] = a[j]
        for j in range(n + 1):
            prev[j] = <int> j
        for i in range(1, m + 1):
            curr[0] = <int> i
            bc = b[i - 1]
            for j in range(1, n + 1):
                cost = prev[j - 1] + (ca[j - 1] != bc)
                ins = prev[j] + 1
                dele = curr[j - 1] + 1
                if ins < cost:
                    cost = ins
                if dele < cost:
                    cost = dele
                curr[j] = cost
            tmp = prev
            prev = curr
            curr = tmp
        return prev[n]
    finally:
        free(prev)
        free(curr)
        free(ca)


def char_classes(str value):
    """Map each character to its class letter: CJK ideograph -> 'z',
    [a-z] -> 'x', [A-Z] -> 'X', [0-9] -> 'd'; anything else is kept as is."""
    cdef Py_ssize_t n = len(value)
    cdef Py_ssize_t i
    cdef Py_UCS4 ch
    cdef list out = []
    for i in range(n):
        ch = value[i]
        if 0x61 <= ch <= 0x7A:
            out.append("x")
        elif 0x41 <= ch <= 0x5A:
            out.append("X")
        elif 0x30 <= ch <= 0x39:
            out.append("d")
        elif CJK_LO <= ch <= CJK_HI:
            out.append("z")
        else:
            out.append(value[i])
    return "".join(out)


def collapse_runs(str s):
    """Collapse every maximal run of one repeated character to a single copy."""
    cdef Py_ssize_t n = len(s)
    cdef Py_ssize_t i
    cdef Py_UCS4 ch, prev
    cdef list out
    if n < 2:
        return s
    out = [s[0]]
    prev = s[0]
    for i in range(1, n):
        ch = s[i]
        if ch != prev:
            out.append(s[i])
            prev = ch
    return "".join(out)


def count_containing(values, str needle):
    """Number of strings in values that contain needle as a substring."""
    cdef Py_ssize_t count = 0
    cdef int hit
    for v in values:
        hit = PyUnicode_Contains(v, needle)
        if hit < 0:
            raise TypeError("values must be strings")
        count += hit
    return count


def weighted_count_containing(values, weights, str needle):
    """Sum of weights over strings that contain needle as a substring."""
    cdef long long total = 0
    cdef int hit
    for v, w in zip(values, weights):
        hit = PyUnicode_Contains(v, needle)
        if hit < 0:
            raise TypeError("values must be strings")
        if hit:
            total += <long long> w
    return total
