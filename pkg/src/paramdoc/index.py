"""Inverted index over parameter names, description clustering, and
cross-document recommendation.

A parameter name that appears in several API documents usually means the
same thing in each; the index makes those other occurrences retrievable
so their description/example can be offered for a blank field.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from . import stringops
from .corpus import Corpus, Direction, ParameterRecord
from .errors import NotFoundError, ValidationError

SAME_PRODUCT_WEIGHT = 1.0
SAME_CATEGORY_WEIGHT = 0.8
DEFAULT_WEIGHT = 0.6

INDEX_FORMAT_VERSION = 1


class CandidateKind(str, Enum):
    SEARCH_BASED = "SearchBased"
    TRANSLATION_BASED = "TranslationBased"


@dataclass(frozen=True)
class Candidate:
    """One recommendable content bundle for a blank parameter field."""

    kind: CandidateKind
    description: str
    example: str
    ptype: str
    required: bool
    score: float
    provenance: tuple[str, ...]

    def __post_init__(self):
        if not 0.0 < self.score <= 1.0:
            raise ValidationError(f"candidate score {self.score} outside (0, 1]")
        if self.kind is CandidateKind.SEARCH_BASED and not self.provenance:
            raise ValidationError("search-based candidate needs at least one source api_id")


class Posting(NamedTuple):
    api_id: str
    product: str
    category: str
    record: ParameterRecord


@dataclass(frozen=True)
class ParamIndex:
    """Immutable map from parameter name to every occurrence in the corpus."""

    postings: dict[str, tuple[Posting, ...]]
    api_scopes: dict[str, tuple[str, str]]  # api_id -> (product, category)
    corpus_digest: str

    def __len__(self) -> int:
        return len(self.postings)

    def names(self):
        return self.postings.keys()


@dataclass(frozen=True)
class ParameterCluster:
    """Distinct non-blank descriptions recorded for one parameter name."""

    name: str
    descriptions: tuple[tuple[str, int], ...]  # (text, occurrence count)
    set_similarity: float | None = field(default=None)


def build_index(corpus: Corpus) -> ParamIndex:
    """Index every parameter occurrence; posting lists ordered by
    (product, api_id), then document order within one API."""
    postings: dict[str, list[Posting]] = {}
    scopes: dict[str, tuple[str, str]] = {}
    for spec in sorted(corpus, key=lambda s: (s.product, s.api_id)):
        scopes[spec.api_id] = (spec.product, spec.category)
        for record in spec.parameters:
            postings.setdefault(record.name, []).append(
                Posting(spec.api_id, spec.product, spec.category, record)
            )
    return ParamIndex(
        postings={name: tuple(posts) for name, posts in postings.items()},
        api_scopes=scopes,
        corpus_digest=corpus.digest(),
    )


def string_similarity(a: str, b: str) -> float:
    """Normalized edit-distance similarity in [0, 1] on trimmed strings.

    1.0 iff the trimmed strings are equal (two empty strings included);
    otherwise 1 - levenshtein(a, b) / max(len(a), len(b)).
    """
    a = a.strip()
    b = b.strip()
    if a == b:
        return 1.0
    return 1.0 - stringops.levenshtein(a, b) / max(len(a), len(b))


def cluster_descriptions(index: ParamIndex, name: str) -> ParameterCluster:
    """Group the distinct non-blank descriptions recorded under one name.

    set_similarity is the maximum pairwise similarity (the two most
    similar descriptions); undefined unless at least two are distinct.
    """
    if name not in index.postings:
        raise NotFoundError(f"parameter name {name!r} not in index")
    counts: dict[str, int] = {}
    for post in index.postings[name]:
        desc = post.record.description
        if desc.strip():
            counts[desc] = counts.get(desc, 0) + 1
    ordered = tuple(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
    similarity = None
    if len(ordered) >= 2:
        texts = [d for d, _ in ordered]
        similarity = max(
            string_similarity(texts[i], texts[j])
            for i in range(len(texts))
            for j in range(i + 1, len(texts))
        )
    return ParameterCluster(name=name, descriptions=ordered, set_similarity=similarity)


def consistency_report(index: ParamIndex) -> float | None:
    """Mean set_similarity over all names where it is defined.

    Measures how consistently a shared name is described across
    documents; None when no name has two distinct descriptions.
    """
    if not index.postings:
        raise ValidationError("consistency report over an empty index")
    values = []
    for name in index.postings:
        cluster = cluster_descriptions(index, name)
        if cluster.set_similarity is not None:
            values.append(cluster.set_similarity)
    if not values:
        return None
    return sum(values) / len(values)


def _scope_weight(query_scope: tuple[str, str], product: str, category: str) -> float:
    if product == query_scope[0]:
        return SAME_PRODUCT_WEIGHT
    if category == query_scope[1]:
        return SAME_CATEGORY_WEIGHT
    return DEFAULT_WEIGHT


def recommend(index: ParamIndex, api_id: str, param_name: str, k: int = 5) -> list[Candidate]:
    """Ranked content candidates for (api_id, param_name) drawn from the
    other documents that define the same name.

    Occurrences are grouped by identical (description, example, type,
    required); score = scope_weight * group_size / postings_outside_query.
    Returns [] when no other API documents the name.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if not param_name:
        raise ValueError("param_name must be non-empty")
    if api_id not in index.api_scopes:
        raise NotFoundError(f"unknown api_id {api_id!r}")
    query_scope = index.api_scopes[api_id]

    others = [p for p in index.postings.get(param_name, ()) if p.api_id != api_id]
    if not others:
        return []

    groups: dict[tuple[str, str, str, bool], list[Posting]] = {}
    for post in others:
        r = post.record
        key = (r.description, r.example, r.ptype, r.required)
        groups.setdefault(key, []).append(post)

    candidates = []
    for (description, example, ptype, required), members in groups.items():
        if not description.strip() and not example.strip():
            continue
        weight = max(_scope_weight(query_scope, m.product, m.category) for m in members)
        provenance = tuple(dict.fromkeys(m.api_id for m in members))
        candidates.append(
            Candidate(
                kind=CandidateKind.SEARCH_BASED,
                description=description,
                example=example,
                ptype=ptype,
                required=required,
                score=weight * len(members) / len(others),
                provenance=provenance,
            )
        )
    candidates.sort(key=lambda c: (-c.score, c.provenance[0], c.description, c.example))
    return candidates[:k]


def save_index(index: ParamIndex, path: str) -> None:
    """Write the index cache (versioned, carries the corpus digest)."""
    obj = {
        "format_version": INDEX_FORMAT_VERSION,
        "corpus_digest": index.corpus_digest,
        "api_scopes": {a: list(s) for a, s in sorted(index.api_scopes.items())},
        "postings": {
            name: [
                {
                    "api_id": p.api_id,
                    "product": p.product,
                    "category": p.category,
                    "name": p.record.name,
                    "type": p.record.ptype,
                    "required": p.record.required,
                    "description": p.record.description,
                    "example": p.record.example,
                    "direction": p.record.direction.value,
                }
                for p in posts
            ]
            for name, posts in sorted(index.postings.items())
        },
    }
    payload = json.dumps(obj, ensure_ascii=False, separators=(",", ":"), sort_keys=False)
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"sha256": digest}) + "\n")
        fh.write(payload + "\n")


def load_index(path: str, expected_corpus_digest: str | None = None) -> ParamIndex:
    """Read an index cache; validates integrity and optional corpus digest."""
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        payload = fh.readline().rstrip("\n")
    if hashlib.sha256(payload.encode("utf-8")).hexdigest() != header.get("sha256"):
        raise ValidationError(f"index cache {path}: integrity digest mismatch")
    obj = json.loads(payload)
    if obj.get("format_version") != INDEX_FORMAT_VERSION:
        raise ValidationError(f"index cache {path}: unsupported version {obj.get('format_version')}")
    if expected_corpus_digest is not None and obj["corpus_digest"] != expected_corpus_digest:
        raise ValidationError(f"index cache {path}: stale (corpus digest mismatch)")
    postings = {
        name: tuple(
            Posting(
                e["api_id"],
                e["product"],
                e["category"],
                ParameterRecord(
                    name=e["name"],
                    direction=Direction(e["direction"]),
                    ptype=e["type"],
                    required=e["required"],
                    description=e["description"],
                    example=e["example"],
                ),
            )
            for e in entries
        )
        for name, entries in obj["postings"].items()
    }
    return ParamIndex(
        postings=postings,
        api_scopes={a: (s[0], s[1]) for a, s in obj["api_scopes"].items()},
        corpus_digest=obj["corpus_digest"],
    )
