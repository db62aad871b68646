"""Memorization enable: rehearsal filter, novelty trigger, single-write guard."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .memory import LongTermMemory

PRUNE_AT = 1024

REHEARSAL = "rehearsal"
NOVELTY = "novelty"


@dataclass(frozen=True)
class MemorizeTrigger:
    reason: str
    bits: int
    cycle: int
    paired_cycle: Optional[int] = None  # earlier STM entry, for rehearsal


class RehearsalFilter:
    """Two-tap delay filter over STM entries.

    An entry pairs with an earlier, unconsumed entry of the identical image
    whose cycle gap lies in ``[delay - tolerance, delay + tolerance]``.  The
    earlier entry is consumed so each pair fires once.  History holds the last
    ``depth`` entries; vectors are compared in full (no digests).
    """

    def __init__(self, delay: int = 20, tolerance: int = 2, depth: int = 64):
        if delay <= 0 or tolerance < 0 or depth <= 0 or tolerance >= delay:
            raise ValueError("need delay > tolerance >= 0 and depth > 0")
        self.delay = delay
        self.tolerance = tolerance
        self.depth = depth
        self.history: deque[list] = deque(maxlen=depth)  # [bits, cycle, consumed]

    def observe(self, bits: int, cycle: int) -> Optional[MemorizeTrigger]:
        if self.history and self.history[-1][1] > cycle:
            raise ValueError("STM entries must arrive in cycle order")
        lo = cycle - self.delay - self.tolerance
        hi = cycle - self.delay + self.tolerance
        trigger = None
        for entry in self.history:
            c = entry[1]
            if c > hi:
                break
            if c >= lo and not entry[2] and entry[0] == bits:
                entry[2] = True
                trigger = MemorizeTrigger(REHEARSAL, bits, cycle, c)
                break
        self.history.append([bits, cycle, False])
        return trigger

    def state(self) -> list:
        return [list(e) for e in self.history]

    def load_state(self, entries) -> None:
        self.history = deque(([int(b), int(c), bool(k)] for b, c, k in entries), maxlen=self.depth)


def novelty_trigger(cue_was_presented: bool, match_found: bool) -> bool:
    return cue_was_presented and not match_found


class Memorizer:
    """Commits triggered images, one word per trigger.

    A trigger is suppressed when the identical image was committed within the
    last ``window`` cycles.
    """

    def __init__(self, window: int):
        self.window = window
        self.last_commit: dict[int, int] = {}

    def commit_guarded(self, store: LongTermMemory, trigger: MemorizeTrigger) -> Optional[int]:
        prev = self.last_commit.get(trigger.bits)
        if prev is not None and trigger.cycle - prev <= self.window:
            return None
        self.last_commit[trigger.bits] = trigger.cycle
        if len(self.last_commit) > PRUNE_AT:
            self.prune(trigger.cycle)
        return store.write_bits(trigger.bits, trigger.cycle)

    def prune(self, cycle: int) -> None:
        self.last_commit = {b: c for b, c in self.last_commit.items() if cycle - c <= self.window}
