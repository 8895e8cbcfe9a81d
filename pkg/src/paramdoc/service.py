"""HTTP service: merged per-field candidates, feedback events, and the
acceptance-rate metric.

Candidates for a blank field come from up to three sources: other
documents sharing the parameter name, the trained translator, and value
patterns mined from request logs. Every display/accept/reject round
trip is recorded as one event; the acceptance rate is the fraction of
events whose chosen fingerprint is present.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Iterable, Mapping, Optional

from .abstraction import PatternProfile, parse_profile_document
from .corpus import Corpus
from .errors import ConflictError, NotFoundError, ValidationError
from .index import Candidate, CandidateKind, ParamIndex, recommend
from .seq2seq import GruModel, generate_description

EVENT_FIELDS = ("Description", "Example", "Type", "Required")

# Wire labels for candidate sources; the third source exists only at the
# service layer (mined examples are not index Candidates).
KIND_SEARCH = "search"
KIND_TRANSLATION = "translation"
KIND_LOG_PATTERN = "log-pattern"

_KIND_LABELS = {
    CandidateKind.SEARCH_BASED: KIND_SEARCH,
    CandidateKind.TRANSLATION_BASED: KIND_TRANSLATION,
}


def candidate_fingerprint(kind: str, description: str, example: str, ptype: str, required: bool) -> str:
    """Stable content id: kind label plus a hash of the recommendable content."""
    payload = json.dumps(
        [description, example, ptype, required], ensure_ascii=True, separators=(",", ":")
    )
    return f"{kind}:{hashlib.sha256(payload.encode('utf-8')).hexdigest()[:16]}"


@dataclass(frozen=True)
class ServedCandidate:
    """One wire-format candidate: content plus fingerprint and provenance."""

    kind: str
    description: str
    example: str
    ptype: str
    required: bool
    score: float
    provenance: tuple[str, ...]

    @property
    def fingerprint(self) -> str:
        return candidate_fingerprint(
            self.kind, self.description, self.example, self.ptype, self.required
        )

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "description": self.description,
            "example": self.example,
            "type": self.ptype,
            "required": self.required,
            "score": self.score,
            "provenance": list(self.provenance),
            "fingerprint": self.fingerprint,
        }


def _from_index_candidate(c: Candidate) -> ServedCandidate:
    return ServedCandidate(
        kind=_KIND_LABELS[c.kind],
        description=c.description,
        example=c.example,
        ptype=c.ptype,
        required=c.required,
        score=c.score,
        provenance=tuple(c.provenance),
    )


@dataclass(frozen=True)
class RecommendationEvent:
    """One recorded recommendation round trip. chosen is None when the
    engineer dismissed every shown candidate."""

    event_id: str
    api_id: str
    param_name: str
    field: str
    shown: tuple[str, ...]
    chosen: Optional[str]
    timestamp: datetime

    def __post_init__(self):
        if not self.event_id:
            raise ValidationError("event_id must be non-empty")
        if self.field not in EVENT_FIELDS:
            raise ValidationError(f"unknown field {self.field!r}")
        if self.chosen is not None and self.chosen not in self.shown:
            raise ValidationError("chosen fingerprint is not among the shown ones")
        if self.timestamp.tzinfo is None:
            raise ValidationError("timestamp must be timezone-aware (UTC)")

    @property
    def valid(self) -> bool:
        return self.chosen is not None

    def to_payload(self) -> dict:
        return {
            "event_id": self.event_id,
            "api_id": self.api_id,
            "param_name": self.param_name,
            "field": self.field,
            "shown": list(self.shown),
            "chosen": self.chosen,
            "timestamp": format_timestamp(self.timestamp),
        }

    @staticmethod
    def from_payload(obj: Mapping) -> "RecommendationEvent":
        try:
            return RecommendationEvent(
                event_id=obj["event_id"],
                api_id=obj["api_id"],
                param_name=obj["param_name"],
                field=obj["field"],
                shown=tuple(obj["shown"]),
                chosen=obj.get("chosen"),
                timestamp=parse_timestamp(obj["timestamp"]),
            )
        except KeyError as exc:
            raise ValidationError(f"event missing key {exc}")


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_timestamp(text: str) -> datetime:
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise ValidationError(f"bad timestamp {text!r}")
    if dt.tzinfo is None:
        raise ValidationError(f"timestamp {text!r} must carry a timezone")
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class AcceptanceStats:
    """Valid (accepted) over total recommendations; rate undefined at 0."""

    valid: int
    total: int

    @property
    def rate(self) -> float | None:
        if self.total == 0:
            return None
        return self.valid / self.total


class EventLog:
    """Append-only newline-delimited event store, idempotent on event_id.

    The in-memory map is derived state: replaying the file rebuilds it,
    so counters survive crashes. Appends are serialized by a lock.
    """

    def __init__(self, path: str | None = None):
        self.path = path
        self._lock = threading.Lock()
        self._events: dict[str, RecommendationEvent] = {}
        self._order: list[str] = []
        if path is not None and os.path.exists(path):
            self._replay(path)

    def _replay(self, path: str) -> None:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                event = RecommendationEvent.from_payload(json.loads(line))
                if event.event_id not in self._events:
                    self._events[event.event_id] = event
                    self._order.append(event.event_id)

    def __len__(self) -> int:
        return len(self._events)

    def events(self) -> list[RecommendationEvent]:
        return [self._events[e] for e in self._order]

    def record(self, event: RecommendationEvent) -> str:
        """Append durably; replays of the same event are no-ops, a reused
        id with different content is a conflict."""
        with self._lock:
            existing = self._events.get(event.event_id)
            if existing is not None:
                if existing != event:
                    raise ConflictError(f"event {event.event_id!r} already stored with different content")
                return event.event_id
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(event.to_payload(), ensure_ascii=False) + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
            self._events[event.event_id] = event
            self._order.append(event.event_id)
            return event.event_id

    def compact(self) -> None:
        """Rewrite the file with one line per distinct event."""
        if self.path is None:
            return
        with self._lock:
            tmp = self.path + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                for event in (self._events[e] for e in self._order):
                    fh.write(json.dumps(event.to_payload(), ensure_ascii=False) + "\n")
            os.replace(tmp, self.path)


def _iso_week_key(dt: datetime) -> str:
    year, week, _ = dt.astimezone(timezone.utc).isocalendar()
    return f"{year:04d}-W{week:02d}"


def _week_monday(dt: datetime) -> datetime:
    dt = dt.astimezone(timezone.utc)
    monday = dt.date() - timedelta(days=dt.isocalendar()[2] - 1)
    return datetime(monday.year, monday.month, monday.day, tzinfo=timezone.utc)


def acceptance_rate(
    events: Iterable[RecommendationEvent],
    window: tuple[datetime | None, datetime | None] | None = None,
    bucket: str | None = None,
):
    """Overall AcceptanceStats, or a weekly series when bucket='weekly'.

    The window is half-open [start, end); weekly buckets are ISO weeks in
    UTC, and gap weeks inside the series appear with total 0 and an
    undefined rate.
    """
    start, end = window if window is not None else (None, None)
    if start is not None and end is not None and end < start:
        raise ValueError("window end precedes start")
    if bucket not in (None, "weekly"):
        raise ValueError(f"unsupported bucket {bucket!r}")

    selected = [
        e
        for e in events
        if (start is None or e.timestamp >= start) and (end is None or e.timestamp < end)
    ]
    if bucket is None:
        return AcceptanceStats(valid=sum(e.valid for e in selected), total=len(selected))

    if not selected:
        return []
    counts: dict[str, list[int]] = {}
    for e in selected:
        c = counts.setdefault(_iso_week_key(e.timestamp), [0, 0])
        c[0] += e.valid
        c[1] += 1
    first = _week_monday(min(e.timestamp for e in selected))
    last = _week_monday(max(e.timestamp for e in selected))
    series = []
    cursor = first
    while cursor <= last:
        key = _iso_week_key(cursor)
        valid, total = counts.get(key, (0, 0))
        series.append((key, AcceptanceStats(valid=valid, total=total)))
        cursor += timedelta(days=7)
    return series


def per_kind_acceptance(events: Iterable[RecommendationEvent]) -> dict[str, AcceptanceStats]:
    """Acceptance broken down by candidate source, recovered from the
    fingerprint kind prefixes: an event counts toward every kind it
    showed, and its choice credits the chosen kind."""
    stats: dict[str, list[int]] = {}
    for e in events:
        kinds_shown = {fp.split(":", 1)[0] for fp in e.shown}
        for kind in kinds_shown:
            c = stats.setdefault(kind, [0, 0])
            c[1] += 1
            if e.chosen is not None and e.chosen.split(":", 1)[0] == kind:
                c[0] += 1
    return {k: AcceptanceStats(valid=v, total=t) for k, (v, t) in sorted(stats.items())}


@dataclass
class ServiceState:
    """Loaded artifacts the service answers from. Corpus and index are
    immutable; the event log is the only mutable piece."""

    corpus: Corpus
    index: ParamIndex
    events: EventLog
    model: GruModel | None = None
    profiles: dict[str, PatternProfile] = field(default_factory=dict)


def load_profiles(directory: str) -> dict[str, PatternProfile]:
    """Read every profile document in a directory; keys are file stems
    (parameter name, or api.parameter when grouped per API)."""
    profiles = {}
    for name in sorted(os.listdir(directory)):
        if not name.endswith(".json"):
            continue
        with open(os.path.join(directory, name), encoding="utf-8") as fh:
            profiles[name[: -len(".json")]] = parse_profile_document(fh.read())
    return profiles


def _profile_for(state: ServiceState, api_id: str, param_name: str) -> PatternProfile | None:
    spec = state.corpus.get(api_id)
    if spec is not None:
        scoped = state.profiles.get(f"{spec.api_name}.{param_name}")
        if scoped is not None:
            return scoped
    return state.profiles.get(param_name)


def get_candidates(
    state: ServiceState, api_id: str, param_name: str, field_name: str, k: int
) -> list[ServedCandidate]:
    """Merged, deduplicated, ranked candidates for one blank cell.

    Description cells: cross-document candidates first (score order),
    then one translation candidate when a model is loaded. Example
    cells: mined log examples first, then cross-document examples.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if field_name not in ("Description", "Example"):
        raise ValueError(f"no candidate source for field {field_name!r}")
    if api_id not in state.corpus:
        raise NotFoundError(f"unknown api_id {api_id!r}")

    search = [
        _from_index_candidate(c)
        for c in recommend(state.index, api_id, param_name, k=max(k, 16))
    ]
    merged: list[ServedCandidate] = []
    if field_name == "Description":
        merged.extend(c for c in search if c.description.strip())
        if state.model is not None:
            translated = generate_description(state.model, _api_name(state, api_id), param_name)
            if translated.description.strip():
                merged.append(_from_index_candidate(translated))
    else:
        profile = _profile_for(state, api_id, param_name)
        if profile is not None:
            for value in profile.examples:
                merged.append(
                    ServedCandidate(
                        kind=KIND_LOG_PATTERN,
                        description="",
                        example=value,
                        ptype="String",
                        required=False,
                        score=profile.rate,
                        provenance=(),
                    )
                )
        merged.extend(c for c in search if c.example.strip())

    content_key = (lambda c: c.description) if field_name == "Description" else (lambda c: c.example)
    seen: set[str] = set()
    unique: list[ServedCandidate] = []
    for c in merged:
        key = content_key(c)
        if key in seen:
            continue
        seen.add(key)
        unique.append(c)
    return unique[:k]


def _api_name(state: ServiceState, api_id: str) -> str:
    spec = state.corpus.get(api_id)
    return spec.api_name if spec is not None else api_id


def record_event(state: ServiceState, event: RecommendationEvent) -> str:
    return state.events.record(event)


def create_app(state: ServiceState):
    """FastAPI application exposing the three service endpoints."""
    from fastapi import FastAPI, HTTPException, Query
    from fastapi.responses import JSONResponse

    app = FastAPI(title="paramdoc", version="0.1.0")
    app.state.service = state

    @app.get("/v1/apis/{api_id}/params/{param_name}/candidates")
    def candidates_endpoint(
        api_id: str,
        param_name: str,
        field: str = Query("description"),
        k: int = Query(5, ge=1, le=100),
    ):
        field_map = {"description": "Description", "example": "Example"}
        if field not in field_map:
            raise HTTPException(status_code=422, detail="field must be description or example")
        try:
            found = get_candidates(state, api_id, param_name, field_map[field], k)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {
            "api_id": api_id,
            "param_name": param_name,
            "field": field,
            "candidates": [c.to_payload() for c in found],
        }

    @app.post("/v1/events")
    def events_endpoint(payload: dict):
        try:
            event = RecommendationEvent.from_payload(payload)
            event_id = record_event(state, event)
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"event_id": event_id, "stored": True}

    @app.get("/v1/metrics/acceptance")
    def metrics_endpoint(
        from_: str | None = Query(None, alias="from"),
        to: str | None = Query(None, alias="to"),
        bucket: str | None = Query(None),
    ):
        try:
            start = parse_timestamp(from_) if from_ else None
            end = parse_timestamp(to) if to else None
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            all_events = state.events.events()
            overall = acceptance_rate(all_events, window=(start, end))
            result = {
                "valid": overall.valid,
                "total": overall.total,
                "rate": overall.rate,
                "by_kind": {
                    kind: {"valid": s.valid, "total": s.total, "rate": s.rate}
                    for kind, s in per_kind_acceptance(
                        e for e in all_events
                        if (start is None or e.timestamp >= start)
                        and (end is None or e.timestamp < end)
                    ).items()
                },
            }
            if bucket == "weekly":
                series = acceptance_rate(all_events, window=(start, end), bucket="weekly")
                result["weekly"] = [
                    {"week": week, "valid": s.valid, "total": s.total, "rate": s.rate}
                    for week, s in series
                ]
            elif bucket is not None:
                raise HTTPException(status_code=422, detail=f"unsupported bucket {bucket!r}")
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return JSONResponse(result)

    return app
