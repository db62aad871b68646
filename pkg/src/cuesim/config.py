"""Engine configuration and its JSON form."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .analyzer import AnalyzerConfig
from .cue_editor import DEFAULT_TAPS, DEFAULT_WIDTH, LfsrState
from .vector import FeatureLayout

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    layout: FeatureLayout = field(default_factory=FeatureLayout)
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    lfsr_width: int = DEFAULT_WIDTH
    lfsr_taps: tuple[int, ...] = DEFAULT_TAPS
    seed: int = 1
    rehearsal_delay: int = 20
    rehearsal_tolerance: int = 2
    rehearsal_depth: int = 64
    novelty_enabled: bool = True
    learn_threshold: int = 3
    auto_register: bool = True
    features: tuple[str, ...] = ()
    step_per_cycle: bool = False
    max_procedure_steps: int = 1024
    retention: Optional[int] = None
    cycle_rate_hz: float = 40.0
    max_cycles: int = 100_000

    def __post_init__(self):
        if self.cycle_rate_hz <= 0:
            raise ConfigError("cycleRateHz must be positive")
        if self.retention is not None and self.retention <= 0:
            raise ConfigError("retention must be positive or null (disabled)")
        if self.max_cycles < 0 or self.max_procedure_steps < 1 or self.learn_threshold < 1:
            raise ConfigError("maxCycles, procedure.maxSteps and learn.threshold out of range")
        if not (0 <= self.rehearsal_tolerance < self.rehearsal_delay) or self.rehearsal_depth < 1:
            raise ConfigError("rehearsal needs 0 <= tolerance < delay and historyDepth >= 1")
        if len(set(self.features)) != len(self.features):
            raise ConfigError("duplicate names in encoder.features")
        if len(self.features) > self.layout.learned_start - self.layout.general_start:
            raise ConfigError("encoder.features exceed the named-feature region")
        try:
            LfsrState(self.lfsr_width, self.lfsr_taps, self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        a = self.analyzer
        return {
            "version": SCHEMA_VERSION,
            "layout": self.layout.to_dict(),
            "lfsr": {"width": self.lfsr_width, "taps": list(self.lfsr_taps)},
            "seed": self.seed,
            "weights": {
                "brightness": a.w_brightness,
                "emotion": a.w_emotion,
                "match": a.w_match,
                "recency": a.w_recency,
            },
            "matchCap": a.match_cap,
            "recencyMax": a.recency_max,
            "recencyScale": a.recency_scale,
            "fadePeriod": a.fade_period,
            "margin": a.margin,
            "recognitionCues": a.recognition_cues,
            "rehearsal": {
                "delay": self.rehearsal_delay,
                "tolerance": self.rehearsal_tolerance,
                "historyDepth": self.rehearsal_depth,
            },
            "novelty": {"enabled": self.novelty_enabled},
            "learn": {"threshold": self.learn_threshold, "regionBits": self.layout.learned_bits},
            "encoder": {"autoRegister": self.auto_register, "features": list(self.features)},
            "procedure": {"stepPerCycle": self.step_per_cycle, "maxSteps": self.max_procedure_steps},
            "retention": self.retention,
            "cycleRateHz": self.cycle_rate_hz,
            "maxCycles": self.max_cycles,
        }

    def fingerprint(self) -> str:
        """Hash of everything that shapes the trajectory (run length excluded)."""
        d = self.to_dict()
        del d["maxCycles"]
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def with_overrides(self, seed: Optional[int] = None, max_cycles: Optional[int] = None) -> "EngineConfig":
        changes = {}
        if seed is not None:
            changes["seed"] = seed
        if max_cycles is not None:
            changes["max_cycles"] = max_cycles
        return replace(self, **changes) if changes else self


_TOP_KEYS = {
    "version", "layout", "lfsr", "seed", "weights", "matchCap", "recencyMax", "recencyScale",
    "fadePeriod", "margin", "recognitionCues", "rehearsal", "novelty", "learn", "encoder",
    "procedure", "retention", "cycleRateHz", "maxCycles",
}


def _section(d: dict, key: str, allowed: set[str]) -> dict:
    sec = d.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"{key} must be an object")
    extra = set(sec) - allowed
    if extra:
        raise ConfigError(f"unknown keys in {key}: {sorted(extra)}")
    return sec


def _int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer")
    return value


def config_from_dict(d: dict) -> EngineConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(d) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    version = d.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config version {version!r}")
    dflt = EngineConfig()
    lay = _section(d, "layout", {"width", "brightnessBits", "emotionBits"})
    lfsr = _section(d, "lfsr", {"width", "taps", "seed"})
    weights = _section(d, "weights", {"brightness", "emotion", "match", "recency"})
    reh = _section(d, "rehearsal", {"delay", "tolerance", "historyDepth"})
    nov = _section(d, "novelty", {"enabled"})
    learn = _section(d, "learn", {"threshold", "regionBits"})
    enc = _section(d, "encoder", {"autoRegister", "features"})
    proc = _section(d, "procedure", {"stepPerCycle", "maxSteps"})

    if "seed" in d and "seed" in lfsr and d["seed"] != lfsr["seed"]:
        raise ConfigError("seed and lfsr.seed disagree")
    seed = d.get("seed", lfsr.get("seed", dflt.seed))

    def get(sec, key, default, name):
        return _int(sec.get(key, default), name)

    try:
        layout = FeatureLayout(
            get(lay, "width", dflt.layout.width, "layout.width"),
            get(lay, "brightnessBits", dflt.layout.brightness_bits, "layout.brightnessBits"),
            get(lay, "emotionBits", dflt.layout.emotion_bits, "layout.emotionBits"),
            get(learn, "regionBits", dflt.layout.learned_bits, "learn.regionBits"),
        )
        da = dflt.analyzer
        analyzer = AnalyzerConfig(
            get(weights, "brightness", da.w_brightness, "weights.brightness"),
            get(weights, "emotion", da.w_emotion, "weights.emotion"),
            get(weights, "match", da.w_match, "weights.match"),
            get(weights, "recency", da.w_recency, "weights.recency"),
            get(d, "matchCap", da.match_cap, "matchCap"),
            get(d, "recencyMax", da.recency_max, "recencyMax"),
            get(d, "recencyScale", da.recency_scale, "recencyScale"),
            get(d, "fadePeriod", da.fade_period, "fadePeriod"),
            get(d, "margin", da.margin, "margin"),
            get(d, "recognitionCues", da.recognition_cues, "recognitionCues"),
        )
        taps = lfsr.get("taps", list(dflt.lfsr_taps))
        if not isinstance(taps, list):
            raise ConfigError("lfsr.taps must be an array")
        retention = d.get("retention")
        features = enc.get("features", [])
        if not isinstance(features, list) or not all(isinstance(f, str) for f in features):
            raise ConfigError("encoder.features must be an array of strings")
        rate = d.get("cycleRateHz", dflt.cycle_rate_hz)
        if isinstance(rate, bool) or not isinstance(rate, (int, float)):
            raise ConfigError("cycleRateHz must be a number")
        return EngineConfig(
            layout=layout,
            analyzer=analyzer,
            lfsr_width=get(lfsr, "width", dflt.lfsr_width, "lfsr.width"),
            lfsr_taps=tuple(_int(t, "lfsr.taps[]") for t in taps),
            seed=_int(seed, "seed"),
            rehearsal_delay=get(reh, "delay", dflt.rehearsal_delay, "rehearsal.delay"),
            rehearsal_tolerance=get(reh, "tolerance", dflt.rehearsal_tolerance, "rehearsal.tolerance"),
            rehearsal_depth=get(reh, "historyDepth", dflt.rehearsal_depth, "rehearsal.historyDepth"),
            novelty_enabled=bool(nov.get("enabled", dflt.novelty_enabled)),
            learn_threshold=get(learn, "threshold", dflt.learn_threshold, "learn.threshold"),
            auto_register=bool(enc.get("autoRegister", dflt.auto_register)),
            features=tuple(features),
            step_per_cycle=bool(proc.get("stepPerCycle", dflt.step_per_cycle)),
            max_procedure_steps=get(proc, "maxSteps", dflt.max_procedure_steps, "procedure.maxSteps"),
            retention=None if retention is None else _int(retention, "retention"),
            cycle_rate_hz=float(rate),
            max_cycles=get(d, "maxCycles", dflt.max_cycles, "maxCycles"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> EngineConfig:
    with open(path) as fp:
        try:
            data = json.load(fp)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data)
