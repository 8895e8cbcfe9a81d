"""Pattern mining over logged parameter values.

A two-stage map/merge pipeline condenses a multiset of raw values into a
dominant character-class pattern, coverage-thresholded common strings,
and a length histogram, then picks representative example values. Shard
summaries merge associatively and commutatively, so the mapper may run
over any partition of the input and any merge tree.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import stringops
from .errors import ParseError, ValidationError

ValueShard = Sequence[str]

SUBSTRING_LENGTH_CAP = 32
DEFAULT_CANDIDATE_CAP = 4096
PROFILE_EXAMPLE_COUNT = 6
COVERAGE_THRESHOLDS = (100, 80, 60)


def transform(value: str) -> str:
    """Per-character class string: CJK -> 'z', [a-z] -> 'x', [A-Z] -> 'X',
    [0-9] -> 'd', everything else kept verbatim."""
    return stringops.char_classes(value)


def compress(class_string: str) -> str:
    """Collapse each run of one repeated character to a single character."""
    return stringops.collapse_runs(class_string)


@dataclass(frozen=True)
class ShardSummary:
    """Mergeable per-shard aggregate of the three mined feature families."""

    substring_counts: dict[str, int]
    pattern_counts: dict[str, int]
    length_hist: dict[int, int]
    value_counts: dict[str, int]
    total: int

    @staticmethod
    def neutral() -> "ShardSummary":
        return ShardSummary({}, {}, {}, {}, 0)


@dataclass(frozen=True)
class PatternProfile:
    """Mined profile for one parameter: dominant pattern, its coverage
    rate, example values, and coverage-thresholded common strings."""

    parameter_pattern: str
    rate: float
    examples: tuple[str, ...]
    common_100: str
    common_80: str
    common_60: str
    length_hist: dict[int, int] = field(default_factory=dict, compare=False)


def _medoid(value_counts: Mapping[str, int], length_hist: Mapping[int, int]) -> str:
    """Representative value: lexicographically smallest value whose length
    is the modal length (ties between lengths go to the smaller length)."""
    modal_length = min(length_hist, key=lambda n: (-length_hist[n], n))
    return min(v for v in value_counts if len(v) == modal_length)


def _candidate_substrings(medoid: str, candidate_cap: int) -> list[str]:
    """Distinct substrings of the medoid up to the length cap, longest
    first (ties lexicographic), truncated at candidate_cap."""
    seen = set()
    for length in range(min(len(medoid), SUBSTRING_LENGTH_CAP), 0, -1):
        for start in range(len(medoid) - length + 1):
            seen.add(medoid[start : start + length])
    ordered = sorted(seen, key=lambda s: (-len(s), s))
    return ordered[:candidate_cap]


def map_shard(shard: ValueShard, candidate_cap: int = DEFAULT_CANDIDATE_CAP) -> ShardSummary:
    """Mapper: per-value pattern and length counting, plus containment
    counts for common-substring candidates drawn from the shard medoid."""
    if candidate_cap <= 0:
        raise ValueError("candidate_cap must be positive")
    pattern_counts: dict[str, int] = {}
    length_hist: dict[int, int] = {}
    value_counts: dict[str, int] = {}
    for v in shard:
        pattern = compress(transform(v))
        pattern_counts[pattern] = pattern_counts.get(pattern, 0) + 1
        length_hist[len(v)] = length_hist.get(len(v), 0) + 1
        value_counts[v] = value_counts.get(v, 0) + 1
    substring_counts: dict[str, int] = {}
    if value_counts:
        medoid = _medoid(value_counts, length_hist)
        values = list(shard)
        for cand in _candidate_substrings(medoid, candidate_cap):
            substring_counts[cand] = stringops.count_containing(values, cand)
    return ShardSummary(
        substring_counts=substring_counts,
        pattern_counts=pattern_counts,
        length_hist=length_hist,
        value_counts=value_counts,
        total=len(shard),
    )


def _merge_counts(a: Mapping, b: Mapping) -> dict:
    out = dict(a)
    for key, count in b.items():
        out[key] = out.get(key, 0) + count
    return out


def merge(a: ShardSummary, b: ShardSummary) -> ShardSummary:
    """Reducer: pointwise sum of every count map. A substring candidate
    known to only one side keeps its one-sided count; finalize recounts
    candidates against the merged value multiset before emitting."""
    return ShardSummary(
        substring_counts=_merge_counts(a.substring_counts, b.substring_counts),
        pattern_counts=_merge_counts(a.pattern_counts, b.pattern_counts),
        length_hist=_merge_counts(a.length_hist, b.length_hist),
        value_counts=_merge_counts(a.value_counts, b.value_counts),
        total=a.total + b.total,
    )


def _coverage_counts(
    summary: ShardSummary, candidate_cap: int
) -> list[tuple[str, int]]:
    """Candidates from the merged multiset's medoid with exact containment
    counts (weighted by value multiplicity), longest first.

    Recounting against value_counts keeps the emitted profile independent
    of how the input was sharded and guarantees the coverage invariants.
    """
    medoid = _medoid(summary.value_counts, summary.length_hist)
    values = list(summary.value_counts.keys())
    weights = list(summary.value_counts.values())
    return [
        (cand, stringops.weighted_count_containing(values, weights, cand))
        for cand in _candidate_substrings(medoid, candidate_cap)
    ]


def _matching_values(value_counts: Mapping[str, int], pattern: str) -> list[str]:
    """Values whose compressed class string equals the pattern, most
    frequent first, ties lexicographic."""
    matching = [v for v in value_counts if compress(transform(v)) == pattern]
    matching.sort(key=lambda v: (-value_counts[v], v))
    return matching


def finalize(
    summary: ShardSummary,
    grand_total: int,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
) -> PatternProfile:
    """Turn the fully merged summary into an emitted profile."""
    if summary.total == 0:
        raise ValidationError("cannot profile an empty value multiset")
    if grand_total != summary.total:
        raise ValidationError(
            f"grand total {grand_total} does not match summary total {summary.total}"
        )
    pattern, pattern_count = min(
        summary.pattern_counts.items(), key=lambda kv: (-kv[1], kv[0])
    )
    commons = {}
    counted = _coverage_counts(summary, candidate_cap)
    for threshold in COVERAGE_THRESHOLDS:
        needed = math.ceil(threshold / 100 * summary.total)
        commons[threshold] = next((c for c, n in counted if n >= needed), "")
    examples = tuple(_matching_values(summary.value_counts, pattern)[:PROFILE_EXAMPLE_COUNT])
    return PatternProfile(
        parameter_pattern=pattern,
        rate=pattern_count / summary.total,
        examples=examples,
        common_100=commons[100],
        common_80=commons[80],
        common_60=commons[60],
        length_hist=dict(summary.length_hist),
    )


def select_examples(
    value_counts: Mapping[str, int], profile: PatternProfile, k: int
) -> list[str]:
    """Up to k values matching the dominant pattern, most frequent first.

    Never returns a value outside the dominant pattern; [] when nothing
    matches.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    return _matching_values(value_counts, profile.parameter_pattern)[:k]


def _format_rate(rate: float) -> str:
    """Up to 3 decimal places, trailing zeros (and a bare point) trimmed."""
    text = f"{rate:.3f}".rstrip("0").rstrip(".")
    return text or "0"


def profile_to_document(profile: PatternProfile) -> str:
    """Emit the profile document: fixed key order, rate as a trimmed
    3-decimal number."""
    obj = {
        "parameter_pattern": profile.parameter_pattern,
        "rate": "\x00rate\x00",
        "examples": list(profile.examples),
        "common_100": profile.common_100,
        "common_80": profile.common_80,
        "common_60": profile.common_60,
    }
    text = json.dumps(obj, ensure_ascii=False, indent=1)
    # json always escapes the NUL sentinel, so the marker is unambiguous;
    # anchoring on the key keeps a pathological example value from matching.
    return text.replace(
        '"rate": "\\u0000rate\\u0000"', f'"rate": {_format_rate(profile.rate)}'
    ) + "\n"


def parse_profile_document(text: str) -> PatternProfile:
    """Inverse of profile_to_document (the length histogram is not part
    of the document schema and comes back empty)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid profile document: {exc.msg}")
    try:
        return PatternProfile(
            parameter_pattern=obj["parameter_pattern"],
            rate=float(obj["rate"]),
            examples=tuple(obj["examples"]),
            common_100=obj["common_100"],
            common_80=obj["common_80"],
            common_60=obj["common_60"],
        )
    except KeyError as exc:
        raise ParseError(f"profile document missing key {exc}")


def split_shards(values: Sequence[str], n_shards: int) -> list[list[str]]:
    """Deterministic contiguous partition into at most n_shards pieces."""
    if n_shards < 1:
        raise ValueError("n_shards must be at least 1")
    n = len(values)
    n_shards = min(n_shards, n) or 1
    base, extra = divmod(n, n_shards)
    shards = []
    start = 0
    for i in range(n_shards):
        size = base + (1 if i < extra else 0)
        shards.append(list(values[start : start + size]))
        start += size
    return shards


def profile_values(
    values: Sequence[str],
    n_shards: int = 1,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
) -> PatternProfile:
    """Full pipeline over one value multiset: map each shard, fold the
    merges, finalize."""
    summary = ShardSummary.neutral()
    for shard in split_shards(values, n_shards):
        summary = merge(summary, map_shard(shard, candidate_cap))
    return finalize(summary, summary.total, candidate_cap)


def read_value_log(lines: Iterable[str], source: str = "log") -> list[tuple[str, str, str]]:
    """Parse tab-separated log records: api_name, param_name, raw value.

    The value field may itself contain tabs; blank lines are skipped.
    """
    records = []
    for i, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t", 2)
        if len(parts) != 3:
            raise ParseError("expected api_name<TAB>param_name<TAB>value", f"{source}:{i}")
        records.append((parts[0], parts[1], parts[2]))
    return records


def group_values(
    records: Iterable[tuple[str, str, str]], by: str = "param"
) -> dict[str, list[str]]:
    """Group logged values per parameter name, or per (api, parameter)
    when by='api-param'."""
    if by not in ("param", "api-param"):
        raise ValueError(f"unknown grouping {by!r}")
    groups: dict[str, list[str]] = {}
    for api_name, param_name, value in records:
        key = param_name if by == "param" else f"{api_name}.{param_name}"
        groups.setdefault(key, []).append(value)
    return groups
