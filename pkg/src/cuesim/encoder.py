"""Sensory encoder and combinational feature learning.

Named features own fixed positions in the named region.  A learned feature is
a bit in the learned region defined as the AND of other bits; encoding closes
the asserted set under those definitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .vector import FeatureLayout, bits_of, iter_bits


class PerceptError(ValueError):
    pass


@dataclass(frozen=True)
class RawPercept:
    cycle: int
    features: tuple[str, ...]
    brightness: int = 0
    emotion: int = 0


@dataclass
class SymbolTable:
    layout: FeatureLayout
    auto_register: bool = True
    name_to_bit: dict[str, int] = field(default_factory=dict)
    learned_defs: dict[int, int] = field(default_factory=dict)  # bit -> AND of these bits
    next_free_learned: int = -1
    learning_enabled: bool = True

    def __post_init__(self):
        if self.next_free_learned < 0:
            self.next_free_learned = self.layout.learned_start
        self._next_named = self.layout.general_start + len(self.name_to_bit)

    def register(self, name: str) -> int:
        bit = self.name_to_bit.get(name)
        if bit is not None:
            return bit
        if self._next_named >= self.layout.learned_start:
            raise PerceptError(f"named-feature region full, cannot register {name!r}")
        bit = self._next_named
        self.name_to_bit[name] = bit
        self._next_named += 1
        return bit

    def lookup(self, name: str) -> int:
        bit = self.name_to_bit.get(name)
        if bit is None:
            if not self.auto_register:
                raise PerceptError(f"unknown feature {name!r}")
            bit = self.register(name)
        return bit

    def names(self, bits: int) -> list[str]:
        inv = {b: n for n, b in self.name_to_bit.items()}
        return [inv.get(b, f"L{b - self.layout.learned_start}") for b in iter_bits(self.layout.general(bits))]

    @property
    def region_full(self) -> bool:
        return self.next_free_learned >= self.layout.width

    def close(self, bits: int) -> int:
        """Assert every learned bit whose definition is fully asserted, to a fixpoint."""
        changed = True
        while changed:
            changed = False
            for bit, definition in self.learned_defs.items():
                flag = 1 << bit
                if not bits & flag and bits & definition == definition:
                    bits |= flag
                    changed = True
        return bits

    def has_definition(self, definition: int) -> bool:
        return definition in self.learned_defs.values()

    def to_dict(self) -> dict:
        return {
            "names": dict(self.name_to_bit),
            "learned": {str(b): sorted(iter_bits(d)) for b, d in self.learned_defs.items()},
            "nextFreeLearned": self.next_free_learned,
            "learningEnabled": self.learning_enabled,
        }

    @classmethod
    def from_dict(cls, layout: FeatureLayout, auto_register: bool, d: dict) -> "SymbolTable":
        return cls(
            layout,
            auto_register,
            {str(k): int(v) for k, v in d["names"].items()},
            {int(b): bits_of(ps) for b, ps in d["learned"].items()},
            int(d["nextFreeLearned"]),
            bool(d["learningEnabled"]),
        )


def encode(table: SymbolTable, percept: RawPercept) -> tuple[int, list[str]]:
    """Return the closed feature word and any warnings raised while encoding."""
    layout = table.layout
    warnings = []
    bits = 0
    for name in percept.features:
        bits |= 1 << table.lookup(name)
    brightness, emotion = percept.brightness, percept.emotion
    if brightness < 0 or emotion < 0:
        raise PerceptError("brightness and emotion must be nonnegative")
    if brightness > layout.brightness_max:
        warnings.append(f"brightness {brightness} clamped to {layout.brightness_max}")
        brightness = layout.brightness_max
    if emotion > layout.emotion_max:
        warnings.append(f"emotion {emotion} clamped to {layout.emotion_max}")
        emotion = layout.emotion_max
    bits = layout.with_fields(bits, brightness, emotion)
    return table.close(bits), warnings


def learn_feature(table: SymbolTable, definition: int) -> Optional[int]:
    """Allocate a learned bit for AND(definition); None once the region is exhausted."""
    if definition.bit_count() < 2:
        raise ValueError("a learned feature needs at least two constituents")
    layout = table.layout
    if definition & ~layout.general_mask:
        raise ValueError("definitions may only use general features")
    for b in iter_bits(definition):
        if b >= layout.learned_start and b not in table.learned_defs:
            raise ValueError(f"definition uses unallocated learned bit {b}")
    if not table.learning_enabled or table.region_full:
        table.learning_enabled = False
        return None
    bit = table.next_free_learned
    table.learned_defs[bit] = definition
    table.next_free_learned += 1
    return bit


class CombinationDetector:
    """Counts exact sets of asserted named features across sensory frames."""

    def __init__(self, threshold: int = 3):
        if threshold < 1:
            raise ValueError("threshold must be at least 1")
        self.threshold = threshold
        self.counts: dict[int, int] = {}
        self.proposed: set[int] = set()

    def observe(self, named_bits: int, table: SymbolTable) -> Optional[int]:
        n = self.counts.get(named_bits, 0) + 1
        self.counts[named_bits] = n
        if (n >= self.threshold and named_bits.bit_count() >= 2
                and named_bits not in self.proposed and not table.has_definition(named_bits)):
            self.proposed.add(named_bits)
            return named_bits
        return None

    def to_dict(self) -> dict:
        return {
            "counts": [[format(k, "x"), v] for k, v in self.counts.items()],
            "proposed": sorted(format(k, "x") for k in self.proposed),
        }

    def load_state(self, d: dict) -> None:
        self.counts = {int(k, 16): int(v) for k, v in d["counts"]}
        self.proposed = {int(k, 16) for k in d["proposed"]}
