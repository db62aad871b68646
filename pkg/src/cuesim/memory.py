"""Associative long-term memory.

Words are appended with dense, never-reused identifiers and are recalled by
exact masked comparison.  Matching is done against a per-bit inverted index:
for every bit position we keep a Python int whose bit ``i`` is set when word
``i`` has that feature asserted, so a cue costs one big-int AND per masked
position regardless of store size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterator, Optional

from .vector import FeatureLayout, FeatureVector, LayoutError, from_hex, iter_bits, to_hex

NEVER = None  # retention sentinel: clear-on-disuse disabled
SURVIVOR_CHECK = 4


class CueError(ValueError):
    """A cue violates the query invariants (empty, stray values, non-general bits)."""


class UnknownWordError(KeyError):
    pass


@dataclass(frozen=True)
class CueQuery:
    mask: int
    values: int

    def popcount(self) -> int:
        return self.mask.bit_count()


@dataclass(slots=True)
class MemoryWord:
    word_id: int
    bits: int
    write_cycle: int
    last_match_cycle: int
    successor: Optional[int] = None

    def last_use(self) -> int:
        return max(self.write_cycle, self.last_match_cycle)


@dataclass(frozen=True)
class RecallResult:
    word_id: int
    vector: FeatureVector
    match_count: int
    cue: CueQuery


class LongTermMemory:
    def __init__(self, layout: FeatureLayout):
        self.layout = layout
        self._words: dict[int, MemoryWord] = {}
        self._ones = [0] * layout.width
        self._present = 0
        self.next_id = 0

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, word_id) -> bool:
        return word_id in self._words

    def __iter__(self) -> Iterator[MemoryWord]:
        return iter(self._words.values())

    def word(self, word_id: int) -> MemoryWord:
        try:
            return self._words[word_id]
        except KeyError:
            raise UnknownWordError(word_id) from None

    def check_cue(self, cue: CueQuery) -> None:
        if cue.mask == 0:
            raise CueError("empty cue mask: a completely empty subset cannot be used as a cue")
        if cue.values & ~cue.mask:
            raise CueError("cue values set outside the mask")
        if cue.mask & ~self.layout.general_mask:
            raise CueError("cue mask touches brightness/emotion subfields or exceeds word width")

    # -- writes -----------------------------------------------------------

    def write(self, vector: FeatureVector, cycle: int) -> int:
        if vector.width != self.layout.width:
            raise LayoutError(f"vector width {vector.width} != store width {self.layout.width}")
        return self.write_bits(vector.bits, cycle)

    def write_bits(self, bits: int, cycle: int) -> int:
        word_id = self.next_id
        self._insert(MemoryWord(word_id, bits, cycle, cycle))
        self.next_id += 1
        return word_id

    def _insert(self, word: MemoryWord) -> None:
        flag = 1 << word.word_id
        ones = self._ones
        for b in iter_bits(word.bits):
            ones[b] |= flag
        self._present |= flag
        self._words[word.word_id] = word

    def _remove(self, word_id: int) -> None:
        word = self._words.pop(word_id)
        keep = ~(1 << word_id)
        ones = self._ones
        for b in iter_bits(word.bits):
            ones[b] &= keep
        self._present &= keep

    # -- reads ------------------------------------------------------------

    def candidates(self, mask: int, values: int) -> int:
        """Bitset over word ids whose masked bits equal ``values``."""
        hit = self._present
        ones = self._ones
        m = mask
        n = 0
        while m:
            low = m & -m
            if values & low:
                hit &= ones[low.bit_length() - 1]
            else:
                hit &= ~ones[low.bit_length() - 1]
            m ^= low
            n += 1
            if n > 1 and hit.bit_count() <= SURVIVOR_CHECK:
                break
        if not m or not hit:
            return hit
        # few survivors: verifying them directly beats more wide ANDs
        words = self._words
        want = values & m
        rest = 0
        while hit:
            wid = hit.bit_length() - 1
            flag = 1 << wid
            hit ^= flag
            if words[wid].bits & m == want:
                rest |= flag
        return rest

    def recall_bits(self, mask: int, values: int, cycle: int):
        """Unchecked recall; returns ``(winning word, match count)`` or None."""
        hit = self.candidates(mask, values)
        if not hit:
            return None
        winner = self._words[hit.bit_length() - 1]
        winner.last_match_cycle = cycle
        return winner, hit.bit_count()

    def recall(self, cue: CueQuery, cycle: int) -> Optional[RecallResult]:
        self.check_cue(cue)
        found = self.recall_bits(cue.mask, cue.values, cycle)
        if found is None:
            return None
        word, count = found
        return RecallResult(word.word_id, self.layout.vector(word.bits), count, cue)

    def matches_all(self, cue: CueQuery) -> list[int]:
        """Exhaustive scan; independent of the bitset index and side-effect free."""
        self.check_cue(cue)
        return [w.word_id for w in self._words.values() if w.bits & cue.mask == cue.values]

    # -- eviction ---------------------------------------------------------

    def clear_unused(self, cycle: int, retention: Optional[int]) -> int:
        """Remove words idle for longer than ``retention`` cycles; returns how many."""
        return len(self.sweep(cycle, retention))

    def sweep(self, cycle: int, retention: Optional[int]) -> list[int]:
        if retention is NEVER:
            return []
        if retention <= 0:
            raise ValueError("retention must be positive")
        stale = [w.word_id for w in self._words.values() if w.last_use() + retention < cycle]
        for word_id in stale:
            self._remove(word_id)
        return stale

    # -- serialization ----------------------------------------------------

    def word_record(self, word: MemoryWord) -> dict:
        return {
            "wordId": word.word_id,
            "bits": to_hex(word.bits, self.layout.width),
            "writeCycle": word.write_cycle,
            "lastMatchCycle": word.last_match_cycle,
            "successor": word.successor,
        }

    def records(self) -> list[dict]:
        return [self.word_record(w) for w in self._words.values()]

    def dump(self, fp: IO[str]) -> None:
        for rec in self.records():
            fp.write(json.dumps(rec, separators=(",", ":")) + "\n")

    @classmethod
    def from_records(cls, records, layout: FeatureLayout, next_id: Optional[int] = None) -> "LongTermMemory":
        store = cls(layout)
        last = -1
        for rec in records:
            try:
                word = MemoryWord(
                    int(rec["wordId"]),
                    from_hex(rec["bits"], layout.width),
                    int(rec["writeCycle"]),
                    int(rec["lastMatchCycle"]),
                    None if rec.get("successor") is None else int(rec["successor"]),
                )
            except (KeyError, TypeError) as exc:
                raise ValueError(f"malformed memory record {rec!r}") from exc
            if word.word_id <= last:
                raise ValueError("memory records must have strictly increasing wordId")
            last = word.word_id
            store._insert(word)
        store.next_id = last + 1 if next_id is None else next_id
        if store.next_id <= last:
            raise ValueError("next_id would reuse a stored wordId")
        return store

    @classmethod
    def load(cls, fp: IO[str], layout: FeatureLayout) -> "LongTermMemory":
        records = []
        for lineno, line in enumerate(fp, 1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls.from_records(records, layout)
