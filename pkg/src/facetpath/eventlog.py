"""Clickstream data model: sessions, search events, and training examples.

A session is a time-ordered run of product views and searches. Every
(search event, clicked product) pair becomes one labeled example whose
target is the clicked product's catalog path and whose context is the
products viewed earlier in the same session.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .taxonomy import Path, TaxonomyTree

__all__ = [
    "SessionEvent",
    "LabeledExample",
    "DatasetSplit",
    "IngestResult",
    "LogError",
    "ingest",
    "build_examples",
    "chronological_split",
    "session_view_sequences",
]


class LogError(ValueError):
    """Raised for malformed event-log files."""


@dataclass(frozen=True)
class SessionEvent:
    session_id: str
    timestamp: int
    kind: str  # "view" | "search"
    product_id: str | None = None
    query: str | None = None
    result_set: tuple[str, ...] | None = None
    clicked: tuple[str, ...] | None = None

    def to_json(self) -> dict:
        row = {"session_id": self.session_id, "timestamp": self.timestamp, "kind": self.kind}
        if self.kind == "view":
            row["product_id"] = self.product_id
        else:
            row["query"] = self.query
            row["result_set"] = list(self.result_set or ())
            row["clicked"] = list(self.clicked or ())
        return row


@dataclass(frozen=True)
class LabeledExample:
    session_id: str
    event_id: str  # one search event may yield several examples
    timestamp: int
    session_products: tuple[str, ...]
    query: str
    clicked_product: str  # the click this example was expanded from
    target_path: Path
    result_set: tuple[str, ...]
    clicked: tuple[str, ...]


@dataclass
class DatasetSplit:
    train: list[LabeledExample]
    test: list[LabeledExample]
    split_boundary: int
    # Test examples whose exact query string never occurs in train.
    unseen_query_test: list[LabeledExample] = field(default_factory=list)

    @property
    def seen_query_test(self) -> list[LabeledExample]:
        unseen = {id(x) for x in self.unseen_query_test}
        return [x for x in self.test if id(x) not in unseen]


@dataclass
class IngestResult:
    events: list[SessionEvent]
    dropped_view_products: int = 0
    rejected_search_events: int = 0

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)


def _parse_event(row: dict, lineno: int) -> SessionEvent:
    try:
        kind = row["kind"]
        session_id = str(row["session_id"])
        timestamp = int(row["timestamp"])
        if kind == "view":
            return SessionEvent(session_id, timestamp, "view", product_id=str(row["product_id"]))
        if kind == "search":
            result_set = tuple(str(p) for p in row["result_set"])
            clicked = tuple(str(p) for p in row.get("clicked", []))
            return SessionEvent(
                session_id,
                timestamp,
                "search",
                query=str(row["query"]),
                result_set=result_set,
                clicked=clicked,
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise LogError(f"malformed event at line {lineno}: {exc}") from exc
    raise LogError(f"malformed event at line {lineno}: unknown kind {row.get('kind')!r}")


def ingest(log_file: str, tree: TaxonomyTree) -> IngestResult:
    """Read a JSON Lines event log, grouped by session and time-sorted.

    View events for products missing from the catalog are dropped (counted);
    search events whose clicks are not a subset of their result set are
    rejected outright (counted).
    """
    events: list[SessionEvent] = []
    dropped = 0
    rejected = 0
    with open(log_file, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogError(f"malformed event at line {lineno}: {exc}") from exc
            ev = _parse_event(row, lineno)
            if ev.kind == "view":
                if ev.product_id not in tree:
                    dropped += 1
                    continue
            else:
                if not set(ev.clicked or ()) <= set(ev.result_set or ()):
                    rejected += 1
                    continue
            events.append(ev)
    # Stable sort keeps same-timestamp events in file order within a session.
    events.sort(key=lambda e: (e.session_id, e.timestamp))
    return IngestResult(events, dropped_view_products=dropped, rejected_search_events=rejected)


def build_examples(
    events: list[SessionEvent] | IngestResult,
    tree: TaxonomyTree,
) -> list[LabeledExample]:
    """One example per (search event, clicked catalog product).

    Session context is every product viewed strictly before the search in
    the same session; nothing after the search event is ever consulted.
    Clicked products missing from the catalog are skipped.
    """
    if isinstance(events, IngestResult):
        events = events.events
    examples: list[LabeledExample] = []
    prior_views: dict[str, list[str]] = {}
    search_counter: dict[str, int] = {}
    for ev in events:
        if ev.kind == "view":
            prior_views.setdefault(ev.session_id, []).append(ev.product_id)  # type: ignore[arg-type]
            continue
        seq = search_counter.get(ev.session_id, 0)
        search_counter[ev.session_id] = seq + 1
        event_id = f"{ev.session_id}#{seq}"
        context = tuple(prior_views.get(ev.session_id, ()))
        for pid in ev.clicked or ():
            target = tree.path_of(pid)
            if target is None:
                continue
            examples.append(
                LabeledExample(
                    session_id=ev.session_id,
                    event_id=event_id,
                    timestamp=ev.timestamp,
                    session_products=context,
                    query=ev.query or "",
                    clicked_product=pid,
                    target_path=target,
                    result_set=ev.result_set or (),
                    clicked=ev.clicked or (),
                )
            )
    examples.sort(key=lambda x: (x.timestamp, x.session_id, x.event_id))
    return examples


def chronological_split(examples: list[LabeledExample], fraction: float) -> DatasetSplit:
    """Earliest ``fraction`` of examples by time goes to train, rest to test.

    The boundary falls between distinct timestamps, so the two sides never
    share a point in time. Also computes the test subset whose queries never
    occur verbatim in train.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    if not examples:
        raise ValueError("cannot split an empty example list")
    ordered = sorted(examples, key=lambda x: x.timestamp)
    timestamps = [x.timestamp for x in ordered]
    if timestamps[0] == timestamps[-1]:
        raise ValueError("cannot split degenerate timeline: all timestamps identical")
    cut = int(round(len(ordered) * fraction))
    cut = min(max(cut, 1), len(ordered) - 1)
    boundary = timestamps[cut]
    # Never split inside one timestamp: move the boundary left to the first
    # index carrying it. If that empties train, the timeline is too skewed.
    lo = timestamps.index(boundary)
    if lo == 0:
        raise ValueError("fraction produces an empty train side")
    train = ordered[:lo]
    test = ordered[lo:]
    if not train or not test:
        raise ValueError("fraction produces an empty split side")
    train_queries = {x.query for x in train}
    unseen = [x for x in test if x.query not in train_queries]
    return DatasetSplit(train=train, test=test, split_boundary=boundary, unseen_query_test=unseen)


def session_view_sequences(events) -> list[list[str]]:
    """Per-session product view sequences, the co-view embedding corpus."""
    by_session: dict[str, list[str]] = {}
    for ev in events:
        if ev.kind == "view":
            by_session.setdefault(ev.session_id, []).append(ev.product_id)
    return [by_session[sid] for sid in sorted(by_session)]
