"""Pseudorandom cue selection.

A Fibonacci (external XOR) shift register counter walks through every nonzero
state of an ``m``-bit register.  Each state is read as a mask over the
asserted general features of the current short-term image: feature ``A[i]``
joins the cue when register bit ``i mod m`` is set.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .memory import CueQuery
from .vector import FeatureLayout, iter_bits

DEFAULT_WIDTH = 16
DEFAULT_TAPS = (16, 15, 13, 4)
ENUMERATION_LIMIT = 20

# Maximal-length tap sets for widths too large to enumerate at construction.
TRUSTED_TAPS = {
    21: (21, 19),
    22: (22, 21),
    23: (23, 18),
    24: (24, 23, 22, 17),
    25: (25, 22),
    26: (26, 6, 2, 1),
    27: (27, 5, 2, 1),
    28: (28, 25),
    29: (29, 27),
    30: (30, 6, 4, 1),
    31: (31, 28),
    32: (32, 22, 2, 1),
}


class LfsrError(ValueError):
    pass


def tap_mask(width: int, taps: tuple[int, ...]) -> int:
    # tap p reads register bit (width - p); tap `width` is always bit 0
    mask = 0
    for p in taps:
        mask |= 1 << (width - p)
    return mask


def lfsr_next(state: int, width: int, taps: tuple[int, ...]) -> int:
    fb = (state & tap_mask(width, taps)).bit_count() & 1
    return (state >> 1) | (fb << (width - 1))


def orbit_length(width: int, taps: tuple[int, ...], start: int = 1, limit: Optional[int] = None) -> int:
    """Steps until ``start`` recurs, or 0 if it does not within ``limit`` steps."""
    limit = (1 << width) if limit is None else limit
    tm, top = tap_mask(width, taps), width - 1
    state = (start >> 1) | (((start & tm).bit_count() & 1) << top)
    n = 1
    while state != start:
        if n >= limit:
            return 0
        state = (state >> 1) | (((state & tm).bit_count() & 1) << top)
        n += 1
    return n


@lru_cache(maxsize=None)
def is_maximal(width: int, taps: tuple[int, ...]) -> bool:
    if width <= ENUMERATION_LIMIT:
        return orbit_length(width, taps) == (1 << width) - 1
    trusted = TRUSTED_TAPS.get(width)
    return trusted is not None and tuple(sorted(trusted, reverse=True)) == taps


@dataclass(frozen=True)
class LfsrState:
    width: int
    taps: tuple[int, ...]
    state: int

    def __post_init__(self):
        taps = tuple(sorted(set(self.taps), reverse=True))
        object.__setattr__(self, "taps", taps)
        if self.width < 2:
            raise LfsrError("register width must be at least 2")
        if not taps or taps[0] != self.width or taps[-1] < 1:
            raise LfsrError(f"taps {taps} must lie in 1..{self.width} and include {self.width}")
        if not 0 < self.state < (1 << self.width):
            raise LfsrError(f"state must be a nonzero {self.width}-bit value")
        if not is_maximal(self.width, taps):
            raise LfsrError(f"taps {taps} are not maximal-length for width {self.width}")


def lfsr_step(s: LfsrState) -> LfsrState:
    return LfsrState(s.width, s.taps, lfsr_next(s.state, s.width, s.taps))


class CueEditor:
    """Turns the current short-term image into a fresh cue on every call."""

    def __init__(self, layout: FeatureLayout, width: int = DEFAULT_WIDTH,
                 taps=DEFAULT_TAPS, seed: int = 1):
        self.layout = layout
        self.register = LfsrState(width, tuple(taps), seed)
        self.width = width
        self.taps = self.register.taps
        self._tap_mask = tap_mask(width, self.taps)
        self.state = seed
        self._stm_bits = None
        self._positions: list[int] = []
        self._tables: list[list[int]] = []
        self._live = 0

    @classmethod
    def reset(cls, seed: int, layout: Optional[FeatureLayout] = None, **kw) -> "CueEditor":
        return cls(layout or FeatureLayout(), seed=seed, **kw)

    def reseed(self, seed: int) -> None:
        LfsrState(self.width, self.taps, seed)
        self.state = seed

    def asserted(self, stm_bits: int) -> list[int]:
        if stm_bits != self._stm_bits:
            self._stm_bits = stm_bits
            self._positions = list(iter_bits(self.layout.general(stm_bits)))
            groups = [0] * self.width
            for i, pos in enumerate(self._positions):
                groups[i % self.width] |= 1 << pos
            self._live = sum(1 << r for r, g in enumerate(groups) if g)
            # one 256-entry table per register byte: table[k][byte] = OR of selected groups
            tables = []
            for base in range(0, self.width, 8):
                table = [0]
                for g in groups[base:base + 8]:
                    table += [t | g for t in table]
                tables.append(table)
            self._tables = tables
        return self._positions

    def mask_for(self, state: int) -> int:
        """Feature mask selected by register ``state`` for the cached STM image."""
        mask = 0
        for table in self._tables:
            mask |= table[state & 0xFF]
            state >>= 8
        return mask

    def next_mask(self, stm_bits: int) -> int:
        """Mask for the next cue, or 0 when the image has no general features."""
        if not self.asserted(stm_bits):
            return 0
        tm, top, live = self._tap_mask, self.width - 1, self._live
        state = self.state
        for _ in range((1 << self.width) - 1):
            state = (state >> 1) | (((state & tm).bit_count() & 1) << top)
            if state & live:
                self.state = state
                return self.mask_for(state)
        raise AssertionError("maximal-length register produced no usable mask")

    def next_cue(self, stm_bits: int) -> Optional[CueQuery]:
        mask = self.next_mask(stm_bits)
        return CueQuery(mask, mask) if mask else None
