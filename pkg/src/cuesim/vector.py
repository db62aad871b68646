"""Fixed-width feature words.

A feature word is an unsigned integer of ``width`` bits.  The low bits hold two
small unsigned subfields (brightness, then emotion); everything above them is
the general-feature region, split into a named region and, at the top, a
region reserved for learned (combinational) features::

    bit 0                                                        bit W-1
    | brightness | emotion | named features ........ | learned features |
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property


class LayoutError(ValueError):
    """A vector or operand does not fit the simulation's word layout."""


@dataclass(frozen=True)
class FeatureVector:
    bits: int
    width: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.width:
            raise LayoutError(f"bits do not fit in {self.width}-bit word")

    def to_hex(self) -> str:
        return to_hex(self.bits, self.width)

    def popcount(self) -> int:
        return self.bits.bit_count()


def to_hex(bits: int, width: int) -> str:
    """Big-endian hex, bit 0 is the LSB of the last character."""
    return format(bits, f"0{(width + 3) // 4}x")


def from_hex(text: str, width: int) -> int:
    if len(text) != (width + 3) // 4:
        raise LayoutError(f"expected {(width + 3) // 4} hex chars for width {width}, got {len(text)}")
    try:
        value = int(text, 16)
    except ValueError:
        raise LayoutError(f"not a hex string: {text!r}") from None
    if value >> width:
        raise LayoutError(f"hex value exceeds {width} bits")
    return value


def iter_bits(value: int):
    """Yield set-bit positions in ascending order."""
    while value:
        low = value & -value
        yield low.bit_length() - 1
        value ^= low


def bits_of(positions) -> int:
    value = 0
    for p in positions:
        value |= 1 << p
    return value


@dataclass(frozen=True)
class FeatureLayout:
    width: int = 256
    brightness_bits: int = 4
    emotion_bits: int = 4
    learned_bits: int = 32

    def __post_init__(self):
        if min(self.width, self.brightness_bits, self.emotion_bits) <= 0 or self.learned_bits < 0:
            raise LayoutError("layout sizes must be positive")
        if self.brightness_bits + self.emotion_bits + self.learned_bits >= self.width:
            raise LayoutError("subfields and learned region leave no room for named features")

    @cached_property
    def general_start(self) -> int:
        return self.brightness_bits + self.emotion_bits

    @cached_property
    def learned_start(self) -> int:
        return self.width - self.learned_bits

    @cached_property
    def brightness_max(self) -> int:
        return (1 << self.brightness_bits) - 1

    @cached_property
    def emotion_max(self) -> int:
        return (1 << self.emotion_bits) - 1

    @cached_property
    def general_mask(self) -> int:
        return ((1 << self.width) - 1) ^ ((1 << self.general_start) - 1)

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.width) - 1

    def brightness(self, bits: int) -> int:
        return bits & self.brightness_max

    def emotion(self, bits: int) -> int:
        return (bits >> self.brightness_bits) & self.emotion_max

    def with_fields(self, bits: int, brightness: int, emotion: int) -> int:
        low = brightness | (emotion << self.brightness_bits)
        return (bits & self.general_mask) | low

    def general(self, bits: int) -> int:
        return bits & self.general_mask

    def vector(self, bits: int) -> FeatureVector:
        return FeatureVector(bits, self.width)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "brightnessBits": self.brightness_bits,
            "emotionBits": self.emotion_bits,
        }
