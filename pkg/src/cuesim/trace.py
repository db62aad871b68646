"""Trace events, their JSON Lines form, replay comparison and run reports."""

from __future__ import annotations

import json
from collections import Counter
from typing import IO, Iterable, NamedTuple, Optional

SENSORY_FRAME = "SensoryFrame"
RECALL_ATTEMPT = "RecallAttempt"
MATCH = "Match"
NO_MATCH = "NoMatch"
ATTENTION_TRANSFER = "AttentionTransfer"
MEMORIZE_TRIGGER = "MemorizeTrigger"
MEMORIZATION_WRITE = "MemorizationWrite"
MEMORY_CLEARED = "MemoryCleared"
FEATURE_LEARNED = "FeatureLearned"
PROCEDURE_STEP = "ProcedureStep"
WARNING = "Warning"

KINDS = (
    SENSORY_FRAME, RECALL_ATTEMPT, MATCH, NO_MATCH, ATTENTION_TRANSFER, MEMORIZE_TRIGGER,
    MEMORIZATION_WRITE, MEMORY_CLEARED, FEATURE_LEARNED, PROCEDURE_STEP, WARNING,
)


class TraceEvent(NamedTuple):
    cycle: int
    kind: str
    payload: dict

    def wall_ms(self, rate_hz: float):
        ms = self.cycle * 1000 / rate_hz
        return int(ms) if ms.is_integer() else round(ms, 6)

    def to_json(self, rate_hz: float) -> str:
        return json.dumps(
            {"cycle": self.cycle, "wallMs": self.wall_ms(rate_hz), "kind": self.kind, "payload": self.payload},
            separators=(",", ":"),
        )


def write_trace(events: Iterable[TraceEvent], fp: IO[str], rate_hz: float) -> None:
    for ev in events:
        fp.write(ev.to_json(rate_hz))
        fp.write("\n")


def read_trace(fp: IO[str]) -> list[TraceEvent]:
    events = []
    for lineno, line in enumerate(fp, 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            events.append(TraceEvent(int(d["cycle"]), d["kind"], d["payload"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"trace line {lineno}: {exc}") from None
    return events


class Divergence(NamedTuple):
    line: int
    cycle: Optional[int]
    expected: Optional[str]
    actual: Optional[str]


def _line_cycle(line: Optional[str]) -> Optional[int]:
    if line is None:
        return None
    try:
        return int(json.loads(line)["cycle"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
        return None


def first_divergence(expected: list[str], actual: list[str]) -> Optional[Divergence]:
    """Compare trace lines byte for byte; report the first mismatch."""
    for i in range(max(len(expected), len(actual))):
        e = expected[i] if i < len(expected) else None
        a = actual[i] if i < len(actual) else None
        if e != a:
            cycle = _line_cycle(e)
            if cycle is None:
                cycle = _line_cycle(a)
            return Divergence(i + 1, cycle, e, a)
    return None


def build_report(events: Iterable[TraceEvent], cycles: int, initial_ltm: int = 0) -> dict:
    totals = Counter()
    cue_sum = 0
    learned = []
    for ev in events:
        totals[ev.kind] += 1
        if ev.kind == MATCH:
            cue_sum += ev.payload["cues"]
        elif ev.kind == FEATURE_LEARNED:
            learned.append({"bit": ev.payload["bit"], "definition": ev.payload["names"]})
        elif ev.kind == MEMORY_CLEARED:
            totals["_cleared"] += len(ev.payload["wordIds"])
    cleared = totals.pop("_cleared", 0)
    matches = totals[MATCH]
    return {
        "cycles": cycles,
        "totals": {k: totals[k] for k in KINDS},
        "finalLtmSize": initial_ltm + totals[MEMORIZATION_WRITE] - cleared,
        "transfersPer1000Cycles": round(1000 * totals[ATTENTION_TRANSFER] / cycles, 6) if cycles else 0.0,
        "meanMatchedCues": round(cue_sum / matches, 6) if matches else 0.0,
        "learnedFeatures": learned,
    }
