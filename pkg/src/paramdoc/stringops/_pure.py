"""Pure-Python string kernels (fallback when the compiled extension is absent)."""

BACKEND = "python"

_CJK_LO = 0x4E00
_CJK_HI = 0x9FFF


def levenshtein(a: str, b: str) -> int:
    """Edit distance (insert/delete/substitute, unit costs) between a and b."""
    if a == b:
        return 0
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    if n > m:
        a, b = b, a
        n, m = m, n
    previous = list(range(n + 1))
    for i in range(1, m + 1):
        current = [i] + [0] * n
        bc = b[i - 1]
        for j in range(1, n + 1):
            cost = previous[j - 1] + (a[j - 1] != bc)
            current[j] = min(previous[j] + 1, current[j - 1] + 1, cost)
        previous = current
    return previous[n]


def char_classes(value: str) -> str:
    """Map each character to its class letter: CJK ideograph -> 'z',
    [a-z] -> 'x', [A-Z] -> 'X', [0-9] -> 'd'; anything else is kept as is."""
    out = []
    for ch in value:
        o = ord(ch)
        if 0x61 <= o <= 0x7A:
            out.append("x")
        elif 0x41 <= o <= 0x5A:
            out.append("X")
        elif 0x30 <= o <= 0x39:
            out.append("d")
        elif _CJK_LO <= o <= _CJK_HI:
            out.append("z")
        else:
            out.append(ch)
    return "".join(out)


def collapse_runs(s: str) -> str:
    """Collapse every maximal run of one repeated character to a single copy."""
    if len(s) < 2:
        return s
    out = [s[0]]
    prev = s[0]
    for ch in s[1:]:
        if ch != prev:
            out.append(ch)
            prev = ch
    return "".join(out)


def count_containing(values, needle: str) -> int:
    """Number of strings in values that contain needle as a substring."""
    count = 0
    for v in values:
        if needle in v:
            count += 1
    return count


def weighted_count_containing(values, weights, needle: str) -> int:
    """Sum of weights over strings that contain needle as a substring."""
    total = 0
    for v, w in zip(values, weights):
        if needle in v:
            total += w
    return total
