"""Importance scoring, short-term memory fade and the attention gate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .vector import FeatureLayout

IMPORTANCE_CAP = (1 << 16) - 1


@dataclass(frozen=True)
class AnalyzerConfig:
    w_brightness: int = 1
    w_emotion: int = 1
    w_match: int = 1
    w_recency: int = 1
    match_cap: int = 15
    recency_max: int = 15
    recency_scale: int = 100
    fade_period: int = 8
    margin: int = 0
    recognition_cues: int = 8

    def __post_init__(self):
        for name in ("w_brightness", "w_emotion", "w_match", "w_recency",
                     "match_cap", "recency_max", "margin", "recognition_cues"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.recency_scale <= 0 or self.fade_period <= 0:
            raise ValueError("recency_scale and fade_period must be positive")


class ImportanceIndex(NamedTuple):
    total: int
    brightness: int
    emotion: int
    matched: int
    recency: int

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "brightness": self.brightness,
            "emotion": self.emotion,
            "matched": self.matched,
            "recency": self.recency,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ImportanceIndex":
        return cls(d["total"], d["brightness"], d["emotion"], d["matched"], d["recency"])


@dataclass(frozen=True)
class StmState:
    bits: int
    entry_cycle: int
    entry_importance: ImportanceIndex
    source: str  # "sensory" | "recall"
    source_word_id: Optional[int] = None


def importance(bits: int, match_count: int, source_write_cycle: Optional[int],
               current_cycle: int, cfg: AnalyzerConfig, layout: FeatureLayout,
               sensory: bool = False) -> ImportanceIndex:
    """Weighted saturating sum of brightness, emotion, matched cues and recency.

    Sensory frames count as maximally recent.  A recall without a known write
    cycle contributes no recency.
    """
    if sensory:
        r = cfg.recency_max
    elif source_write_cycle is None:
        r = 0
    else:
        if current_cycle < source_write_cycle:
            raise ValueError("current cycle precedes the source write cycle")
        r = max(0, cfg.recency_max - (current_cycle - source_write_cycle) // cfg.recency_scale)
    b = cfg.w_brightness * layout.brightness(bits)
    e = cfg.w_emotion * layout.emotion(bits)
    m = cfg.w_match * min(match_count, cfg.match_cap)
    r = cfg.w_recency * r
    return ImportanceIndex(min(IMPORTANCE_CAP, b + e + m + r), b, e, m, r)


class Scorer:
    """:func:`importance` with the config and layout constants bound once.

    The engine scores a recall on almost every cycle, so the per-call lookups
    matter.  Results are identical to :func:`importance`.
    """

    __slots__ = ("wb", "we", "wm", "wr", "cap", "rmax", "rscale", "bmax", "ebits", "emax")

    def __init__(self, cfg: AnalyzerConfig, layout: FeatureLayout):
        self.wb, self.we, self.wm, self.wr = cfg.w_brightness, cfg.w_emotion, cfg.w_match, cfg.w_recency
        self.cap, self.rmax, self.rscale = cfg.match_cap, cfg.recency_max, cfg.recency_scale
        self.bmax, self.ebits, self.emax = layout.brightness_max, layout.brightness_bits, layout.emotion_max

    def recall(self, bits: int, match_count: int, write_cycle: int, cycle: int) -> ImportanceIndex:
        age = cycle - write_cycle
        if age < 0:
            raise ValueError("current cycle precedes the source write cycle")
        r = self.rmax - age // self.rscale
        b = self.wb * (bits & self.bmax)
        e = self.we * ((bits >> self.ebits) & self.emax)
        m = self.wm * (match_count if match_count < self.cap else self.cap)
        r = self.wr * r if r > 0 else 0
        t = b + e + m + r
        return ImportanceIndex(t if t < IMPORTANCE_CAP else IMPORTANCE_CAP, b, e, m, r)


def stm_effective_importance(stm: Optional[StmState], current_cycle: int, cfg: AnalyzerConfig) -> int:
    # an empty STM has nothing to defend
    if stm is None:
        return 0
    elapsed = current_cycle - stm.entry_cycle
    if elapsed < 0:
        raise ValueError("current cycle precedes STM entry")
    return max(0, stm.entry_importance.total - elapsed // cfg.fade_period)


def attention_gate(candidate: ImportanceIndex | int, stm_effective: int, cfg: AnalyzerConfig) -> bool:
    total = candidate if isinstance(candidate, int) else candidate.total
    return total + cfg.margin >= stm_effective


def recognition_flag(result, cfg: AnalyzerConfig) -> bool:
    """Clear recall: enough matched cues to count as recognition.

    ``result`` is a recall result (its cue is counted) or a plain cue count.
    """
    cues = result if isinstance(result, int) else result.cue.popcount()
    return cues >= cfg.recognition_cues
