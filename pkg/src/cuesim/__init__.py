"""Cycle-accurate simulator of pseudorandom cue search over associative memory,
with importance-gated short-term memory, rehearsal memorization and
combinational feature learning."""

from .analyzer import AnalyzerConfig, ImportanceIndex, StmState
from .config import ConfigError, EngineConfig, config_from_dict, load_config
from .cue_editor import CueEditor, LfsrState, lfsr_step
from .encoder import RawPercept, SymbolTable
from .engine import Engine, SnapshotError
from .memory import CueError, CueQuery, LongTermMemory, MemoryWord, RecallResult
from .script import StimulusScript
from .trace import TraceEvent
from .vector import FeatureLayout, FeatureVector

__version__ = "0.1.0"

__all__ = [
    "AnalyzerConfig", "ConfigError", "CueEditor", "CueError", "CueQuery", "Engine", "EngineConfig",
    "FeatureLayout", "FeatureVector", "ImportanceIndex", "LfsrState", "LongTermMemory", "MemoryWord",
    "RawPercept", "RecallResult", "SnapshotError", "StimulusScript", "StmState", "SymbolTable",
    "TraceEvent", "config_from_dict", "lfsr_step", "load_config",
]
