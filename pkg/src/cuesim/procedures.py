"""Unconscious procedures: chains of successor-linked memory words.

Execution follows links word to word without touching short-term memory, the
analyzer or the memorizer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .memory import LongTermMemory, UnknownWordError

COMPLETED = "completed"
STEP_LIMIT = "step-limit"


@dataclass(frozen=True)
class ProcedureResult:
    steps: list[int]
    halted: str


def link_words(store: LongTermMemory, from_id: int, to_id: int) -> None:
    if to_id not in store:
        raise UnknownWordError(to_id)
    store.word(from_id).successor = to_id


def next_step(store: LongTermMemory, word_id: int):
    """Successor of ``word_id`` or None at the end of the chain (or a dangling link)."""
    successor = store.word(word_id).successor
    if successor is None or successor not in store:
        return None
    return successor


def run_procedure(store: LongTermMemory, start_id: int, max_steps: int = 1024) -> ProcedureResult:
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    store.word(start_id)
    steps = [start_id]
    current = start_id
    while len(steps) < max_steps:
        current = next_step(store, current)
        if current is None:
            return ProcedureResult(steps, COMPLETED)
        steps.append(current)
    halted = COMPLETED if next_step(store, current) is None else STEP_LIMIT
    return ProcedureResult(steps, halted)
