"""Corpus of structured API documents.

One API document is a flat list of named, typed input/output parameters
(no nested schemas). The corpus file format is newline-delimited JSON,
one API object per line.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .errors import ConflictError, ParseError, ValidationError

PTYPES = ("String", "Integer", "Boolean", "Number", "Array", "Object")


class Direction(str, Enum):
    INPUT = "Input"
    OUTPUT = "Output"


@dataclass(frozen=True)
class ParameterRecord:
    """One documented parameter: identity plus its editable content fields."""

    name: str
    direction: Direction
    ptype: str = "String"
    required: bool = False
    description: str = ""
    example: str = ""

    def __post_init__(self):
        if not self.name:
            raise ValidationError("parameter name must be non-empty")
        if any(c.isspace() for c in self.name):
            raise ValidationError(f"parameter name {self.name!r} contains whitespace")
        if self.ptype not in PTYPES:
            raise ValidationError(f"parameter {self.name!r}: unknown type {self.ptype!r}")
        if not isinstance(self.direction, Direction):
            raise ValidationError(f"parameter {self.name!r}: bad direction {self.direction!r}")


@dataclass(frozen=True)
class ApiSpec:
    """One API document: identity, grouping, and its ordered parameters."""

    api_id: str
    api_name: str
    product: str
    category: str
    parameters: tuple[ParameterRecord, ...]

    def __post_init__(self):
        if not self.api_id:
            raise ValidationError("api_id must be non-empty")
        seen = set()
        for p in self.parameters:
            key = (p.name, p.direction)
            if key in seen:
                raise ValidationError(
                    f"api {self.api_id!r}: duplicate {p.direction.value} parameter {p.name!r}"
                )
            seen.add(key)


@dataclass(frozen=True)
class DedupStats:
    """Corpus-wide parameter reuse: occurrences vs distinct names."""

    total_parameter_occurrences: int
    unique_parameter_names: int

    @property
    def compression_ratio(self) -> float | None:
        """total/unique, or None for an empty corpus."""
        if self.unique_parameter_names == 0:
            return None
        return self.total_parameter_occurrences / self.unique_parameter_names


@dataclass(frozen=True)
class Corpus:
    """Immutable set of ApiSpecs keyed by api_id, in load order."""

    specs: tuple[ApiSpec, ...]
    by_id: dict[str, ApiSpec] = field(compare=False, default_factory=dict)

    def __post_init__(self):
        index = {}
        for spec in self.specs:
            if spec.api_id in index:
                raise ConflictError(f"duplicate api_id {spec.api_id!r}")
            index[spec.api_id] = spec
        object.__setattr__(self, "by_id", index)

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self) -> Iterator[ApiSpec]:
        return iter(self.specs)

    def __contains__(self, api_id: str) -> bool:
        return api_id in self.by_id

    def get(self, api_id: str) -> ApiSpec | None:
        return self.by_id.get(api_id)

    def digest(self) -> str:
        """Content hash of the canonical serialization, for cache staleness checks."""
        return hashlib.sha256(serialize_corpus(self).encode("utf-8")).hexdigest()


def _require_str(obj: dict, key: str, locus: str, default: str | None = None) -> str:
    if key not in obj:
        if default is not None:
            return default
        raise ParseError(f"missing key {key!r}", locus)
    val = obj[key]
    if not isinstance(val, str):
        raise ParseError(f"key {key!r} must be a string, got {type(val).__name__}", locus)
    return val


def _parse_parameter(obj, locus: str) -> ParameterRecord:
    if not isinstance(obj, dict):
        raise ParseError("parameter entry must be an object", locus)
    name = _require_str(obj, "name", locus)
    direction_raw = _require_str(obj, "direction", locus)
    try:
        direction = Direction(direction_raw)
    except ValueError:
        raise ParseError(f"direction must be Input or Output, got {direction_raw!r}", locus)
    ptype = obj.get("type", "String")
    if not isinstance(ptype, str) or ptype not in PTYPES:
        raise ParseError(f"unknown parameter type {ptype!r}", locus)
    required = obj.get("required", False)
    if not isinstance(required, bool):
        raise ParseError(f"key 'required' must be a boolean, got {required!r}", locus)
    description = obj.get("description", "")
    example = obj.get("example", "")
    if not isinstance(description, str) or not isinstance(example, str):
        raise ParseError("description and example must be strings", locus)
    try:
        return ParameterRecord(
            name=name,
            direction=direction,
            ptype=ptype,
            required=required,
            description=description,
            example=example,
        )
    except ValidationError as exc:
        raise ParseError(str(exc), locus)


def parse_spec(raw: str, locus: str = "document") -> ApiSpec:
    """Parse one JSON API document into a validated ApiSpec.

    Parameter order is preserved. Raises ParseError with a locus for
    malformed input, ValidationError for duplicate (name, direction).
    """
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno} col {exc.colno}: {exc.msg}", locus)
    if not isinstance(obj, dict):
        raise ParseError("top level must be a JSON object", locus)
    api_id = _require_str(obj, "api_id", locus)
    api_name = _require_str(obj, "api_name", locus)
    product = _require_str(obj, "product", locus, default="")
    category = _require_str(obj, "category", locus, default="")
    params_raw = obj.get("parameters", [])
    if not isinstance(params_raw, list):
        raise ParseError("key 'parameters' must be an array", locus)
    params = tuple(
        _parse_parameter(p, f"{locus}: parameters[{i}]") for i, p in enumerate(params_raw)
    )
    try:
        return ApiSpec(
            api_id=api_id,
            api_name=api_name,
            product=product,
            category=category,
            parameters=params,
        )
    except ValidationError as exc:
        raise ValidationError(f"{locus}: {exc}")


def load_corpus(documents: Iterable[str], source: str = "corpus") -> Corpus:
    """Parse a sequence of documents into a Corpus; rejects duplicate api_id.

    The first failing document aborts the load with its locus.
    """
    specs = []
    seen: set[str] = set()
    for i, doc in enumerate(documents):
        locus = f"{source}:{i + 1}"
        spec = parse_spec(doc, locus=locus)
        if spec.api_id in seen:
            raise ConflictError(f"{locus}: duplicate api_id {spec.api_id!r}")
        seen.add(spec.api_id)
        specs.append(spec)
    return Corpus(specs=tuple(specs))


def read_corpus_file(path: str) -> Corpus:
    """Load a newline-delimited JSON corpus file (blank lines ignored)."""
    with open(path, encoding="utf-8") as fh:
        lines = [(i, line) for i, line in enumerate(fh, start=1) if line.strip()]
    specs = []
    seen: set[str] = set()
    for lineno, line in lines:
        locus = f"{path}:{lineno}"
        spec = parse_spec(line, locus=locus)
        if spec.api_id in seen:
            raise ConflictError(f"{locus}: duplicate api_id {spec.api_id!r}")
        seen.add(spec.api_id)
        specs.append(spec)
    return Corpus(specs=tuple(specs))


def corpus_stats(corpus: Corpus) -> DedupStats:
    """Count parameter occurrences and distinct names (case-sensitive,
    cross-direction) over the whole corpus."""
    total = 0
    names: set[str] = set()
    for spec in corpus:
        total += len(spec.parameters)
        names.update(p.name for p in spec.parameters)
    return DedupStats(total_parameter_occurrences=total, unique_parameter_names=len(names))


def serialize_spec(spec: ApiSpec) -> str:
    """One-line JSON in the corpus file schema; inverse of parse_spec."""
    obj = {
        "api_id": spec.api_id,
        "api_name": spec.api_name,
        "product": spec.product,
        "category": spec.category,
        "parameters": [
            {
                "name": p.name,
                "type": p.ptype,
                "required": p.required,
                "description": p.description,
                "example": p.example,
                "direction": p.direction.value,
            }
            for p in spec.parameters
        ],
    }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def serialize_corpus(corpus: Corpus) -> str:
    """Newline-delimited JSON for the whole corpus (one API per line)."""
    return "".join(serialize_spec(spec) + "\n" for spec in corpus)
