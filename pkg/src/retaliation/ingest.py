"""Reorg log parsing, double-spend classification and episode grouping.

Log schema (CSV with header, or a JSON array of objects with the same keys)::

    chain,timestamp,height,depth,blocks_added,conflicting_spend,value_usd,beneficiary

``timestamp`` is UTC seconds or an ISO-8601 string (normalized to UTC seconds).
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Iterable, Literal, Optional, Sequence

from ._num import as_fraction, format_number

FIELDS = (
    "chain",
    "timestamp",
    "height",
    "depth",
    "blocks_added",
    "conflicting_spend",
    "value_usd",
    "beneficiary",
)

RANDOM = "Random"
DOUBLE_SPEND = "DoubleSpend"
Label = Literal["Random", "DoubleSpend"]

DEFAULT_DEPTH_THRESHOLD = 10
DEFAULT_WINDOW_SECONDS = 48 * 3600


class ParseError(ValueError):
    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        where = ""
        if row is not None:
            where = f"row {row}"
            if column is not None:
                where += f", column {column!r}"
            where += ": "
        super().__init__(where + message)
        self.row = row
        self.column = column


@dataclass(frozen=True)
class ReorgEvent:
    chain_id: str
    timestamp: int
    height: int
    depth: int
    blocks_added: int
    conflicting_spend: bool
    value_usd: Fraction = Fraction(0)
    beneficiary: str = ""

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.blocks_added < self.depth:
            raise ValueError("blocks_added must be >= depth")
        if self.value_usd < 0:
            raise ValueError("value_usd must be >= 0")
        if self.value_usd > 0 and not self.conflicting_spend:
            raise ValueError("an event carrying value must be flagged as a conflicting spend")

    def to_row(self) -> dict:
        return {
            "chain": self.chain_id,
            "timestamp": str(self.timestamp),
            "height": str(self.height),
            "depth": str(self.depth),
            "blocks_added": str(self.blocks_added),
            "conflicting_spend": "true" if self.conflicting_spend else "false",
            "value_usd": format_number(self.value_usd),
            "beneficiary": self.beneficiary,
        }


# --- parsing ------------------------------------------------------------------

_TRUE = {"true", "1", "yes", "y", "t"}
_FALSE = {"false", "0", "no", "n", "f", ""}


def _parse_timestamp(raw) -> int:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return int(raw)
    text = str(raw).strip()
    try:
        return int(Fraction(text))
    except (ValueError, ZeroDivisionError):
        pass
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.astimezone(timezone.utc).timestamp())


def _parse_bool(raw) -> bool:
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_int(raw) -> int:
    if isinstance(raw, bool):
        raise ValueError("boolean where an integer was expected")
    if isinstance(raw, int):
        return raw
    value = Fraction(str(raw).strip())
    if value.denominator != 1:
        raise ValueError(f"not an integer: {raw!r}")
    return int(value)


def _event_from_record(rec: dict, row: int) -> ReorgEvent:
    parsers = {
        "chain": lambda x: str(x),
        "timestamp": _parse_timestamp,
        "height": _parse_int,
        "depth": _parse_int,
        "blocks_added": _parse_int,
        "conflicting_spend": _parse_bool,
        "value_usd": lambda x: as_fraction(x if x not in (None, "") else 0),
        "beneficiary": lambda x: "" if x is None else str(x),
    }
    values = {}
    for name in FIELDS:
        if name not in rec:
            raise ParseError("missing field", row, name)
        try:
            values[name] = parsers[name](rec[name])
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ParseError(str(exc), row, name) from None
    if values["depth"] < 1:
        raise ParseError(f"depth must be >= 1, got {values['depth']}", row, "depth")
    try:
        return ReorgEvent(
            chain_id=values["chain"],
            timestamp=values["timestamp"],
            height=values["height"],
            depth=values["depth"],
            blocks_added=values["blocks_added"],
            conflicting_spend=values["conflicting_spend"],
            value_usd=values["value_usd"],
            beneficiary=values["beneficiary"],
        )
    except ValueError as exc:
        raise ParseError(str(exc), row) from None


def parse_reorg_log(data, fmt: str = "csv") -> list:
    """Parse a log given as ``bytes`` or ``str``.

    Rows are numbered from 1 (the first data row) in error messages.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    fmt = fmt.lower()
    if fmt == "json":
        try:
            records = json.loads(data) if data.strip() else []
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
        if not isinstance(records, list):
            raise ParseError("JSON log must be an array of objects")
        out = []
        for i, rec in enumerate(records, start=1):
            if not isinstance(rec, dict):
                raise ParseError("expected an object", i)
            extra = set(rec) - set(FIELDS)
            if extra:
                raise ParseError(f"unknown fields {sorted(extra)}", i)
            out.append(_event_from_record(rec, i))
        return out
    if fmt != "csv":
        raise ValueError(f"unknown log format {fmt!r}")
    reader = csv.reader(io.StringIO(data))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("missing header") from None
    header = [h.strip() for h in header]
    if tuple(header) != FIELDS:
        raise ParseError(f"header must be {','.join(FIELDS)}; got {','.join(header)}", 0)
    out = []
    for i, cells in enumerate(reader, start=1):
        if not cells:
            continue
        if len(cells) != len(FIELDS):
            raise ParseError(f"expected {len(FIELDS)} columns, got {len(cells)}", i)
        out.append(_event_from_record(dict(zip(FIELDS, cells)), i))
    return out


def write_reorg_log(events: Iterable[ReorgEvent], fmt: str = "csv") -> str:
    rows = [e.to_row() for e in events]
    if fmt == "json":
        recs = []
        for row in rows:
            rec = dict(row)
            for key in ("timestamp", "height", "depth", "blocks_added"):
                rec[key] = int(rec[key])
            rec["conflicting_spend"] = rec["conflicting_spend"] == "true"
            recs.append(rec)
        return json.dumps(recs, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# --- classification and grouping ----------------------------------------------


def classify_events(
    events: Sequence[ReorgEvent],
    depth_threshold: int = DEFAULT_DEPTH_THRESHOLD,
    require_conflict: bool = True,
) -> list:
    """Label each event ``Random`` (shallow noise) or ``DoubleSpend`` (deep attack)."""
    if depth_threshold < 2:
        raise ValueError("depth_threshold must be >= 2")
    return [
        DOUBLE_SPEND
        if e.depth >= depth_threshold and (e.conflicting_spend or not require_conflict)
        else RANDOM
        for e in events
    ]


@dataclass
class Episode:
    events: list = field(default_factory=list)
    alternation_verified: bool = True

    @property
    def length(self) -> int:
        return len(self.events)

    @property
    def chain_id(self) -> str:
        return self.events[0].chain_id

    @property
    def classification(self) -> str:
        return "SingleAttack" if self.length == 1 else "Retaliation"

    @property
    def moves(self) -> int:
        return self.length


def _continues(ep: Episode, ev: ReorgEvent, window: float) -> bool:
    last = ep.events[-1]
    if ev.chain_id != last.chain_id or ev.timestamp - last.timestamp > window:
        return False
    if not ev.beneficiary or not last.beneficiary:
        return True
    if ev.beneficiary == last.beneficiary:
        return False
    # A, B, A, B ...: a third party cannot join an ongoing exchange
    if len(ep.events) >= 2 and ep.events[-2].beneficiary:
        return ev.beneficiary == ep.events[-2].beneficiary
    return True


def _sort_key(e: ReorgEvent):
    return (e.chain_id, e.timestamp, e.height)


def group_retaliation_episodes(
    events: Sequence[ReorgEvent],
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    labels: Optional[Sequence[str]] = None,
) -> list:
    """Merge consecutive double-spends into attack/counterattack episodes.

    ``labels`` defaults to :func:`classify_events` with its defaults. Random
    events are dropped. Events without beneficiary tags group by time alone
    and mark the episode ``alternation_verified = False``.
    """
    if labels is None:
        labels = classify_events(events)
    deep = sorted((e for e, lab in zip(events, labels) if lab == DOUBLE_SPEND), key=_sort_key)
    episodes = []
    for ev in deep:
        if episodes and _continues(episodes[-1], ev, window_seconds):
            ep = episodes[-1]
            if not ev.beneficiary or not ep.events[-1].beneficiary:
                ep.alternation_verified = False
            ep.events.append(ev)
        else:
            episodes.append(Episode([ev], alternation_verified=bool(ev.beneficiary)))
    return episodes


# --- summaries ----------------------------------------------------------------


@dataclass(frozen=True)
class ChainSummary:
    chain_id: str
    first_timestamp: int
    last_timestamp: int
    attack_count: int
    total_value_usd: Fraction

    def to_row(self) -> dict:
        return {
            "chain": self.chain_id,
            "first_date": _iso_date(self.first_timestamp),
            "last_date": _iso_date(self.last_timestamp),
            "attacks": str(self.attack_count),
            "usd": format_number(self.total_value_usd),
        }


SUMMARY_FIELDS = ("chain", "first_date", "last_date", "attacks", "usd")


def _iso_date(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d")


def summarize(
    events: Sequence[ReorgEvent],
    labels: Optional[Sequence[str]] = None,
    split_gap_seconds: Optional[float] = None,
) -> list:
    """Per-chain double-spend counts and USD totals.

    With ``split_gap_seconds`` a chain's attacks separated by a longer quiet
    period get separate rows, one per campaign.
    """
    if labels is None:
        labels = classify_events(events)
    by_chain = defaultdict(list)
    for e, lab in zip(events, labels):
        if lab == DOUBLE_SPEND:
            by_chain[e.chain_id].append(e)
    rows = []
    for chain in sorted(by_chain):
        evs = sorted(by_chain[chain], key=lambda e: (e.timestamp, e.height))
        groups = [[evs[0]]]
        for e in evs[1:]:
            if split_gap_seconds is not None and e.timestamp - groups[-1][-1].timestamp > split_gap_seconds:
                groups.append([e])
            else:
                groups[-1].append(e)
        for grp in groups:
            rows.append(
                ChainSummary(
                    chain_id=chain,
                    first_timestamp=grp[0].timestamp,
                    last_timestamp=grp[-1].timestamp,
                    attack_count=len(grp),
                    total_value_usd=sum((e.value_usd for e in grp), Fraction(0)),
                )
            )
    return rows


def summary_csv(rows: Sequence[ChainSummary]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(r.to_row() for r in rows)
    return buf.getvalue()


def plot_rows(
    events: Sequence[ReorgEvent], labels: Sequence[str], x: str = "height"
) -> list:
    """Scatter points ``(x, depth, series)`` sorted by x, for depth-over-time charts."""
    if x not in ("height", "timestamp"):
        raise ValueError("x must be 'height' or 'timestamp'")
    pts = [(getattr(e, x), e.depth, lab) for e, lab in zip(events, labels)]
    return sorted(pts, key=lambda p: (p[0], p[2], p[1]))
