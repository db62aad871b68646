"""The deterministic cycle loop.

Even cycles are sensory frames, odd cycles are recall frames.  Every
observable action is appended to the trace as a :class:`TraceEvent`; the
trace is a pure function of (config, script, initial memory).
"""

from __future__ import annotations

import gc
from typing import Optional

from . import trace as T
from .analyzer import (
    ImportanceIndex, Scorer, StmState, attention_gate, importance, recognition_flag, stm_effective_importance,
)
from .config import EngineConfig
from .cue_editor import CueEditor
from .encoder import CombinationDetector, PerceptError, SymbolTable, encode, learn_feature
from .memorizer import NOVELTY, Memorizer, MemorizeTrigger, RehearsalFilter, novelty_trigger
from .memory import LongTermMemory
from .procedures import COMPLETED, STEP_LIMIT, next_step
from .script import StimulusScript
from .trace import TraceEvent
from .vector import from_hex, iter_bits, to_hex

SNAPSHOT_VERSION = 1


class SnapshotError(ValueError):
    pass


class Engine:
    def __init__(self, config: EngineConfig, script: Optional[StimulusScript] = None,
                 memory: Optional[LongTermMemory] = None):
        self.config = config
        self.layout = layout = config.layout
        self.script = script or StimulusScript()
        if memory is not None and memory.layout != layout:
            raise ValueError("initial memory layout differs from config layout")
        self.store = memory if memory is not None else LongTermMemory(layout)
        self.editor = CueEditor(layout, config.lfsr_width, config.lfsr_taps, config.seed)
        self.rehearsal = RehearsalFilter(config.rehearsal_delay, config.rehearsal_tolerance, config.rehearsal_depth)
        self.memorizer = Memorizer(config.rehearsal_delay + config.rehearsal_tolerance)
        self.table = SymbolTable(layout, config.auto_register)
        for name in config.features:
            self.table.register(name)
        self.detector = CombinationDetector(config.learn_threshold)
        self.stm: Optional[StmState] = None
        self.cycle = 0
        # [start word, next word, steps taken] while a stepped procedure runs
        self.procedure: Optional[list] = None
        self._named_mask = layout.general_mask & ((1 << layout.learned_start) - 1)
        self._hex = f"0{(layout.width + 3) // 4}x"
        self._scorer = Scorer(config.analyzer, layout)

    # -- public loop ------------------------------------------------------

    def run(self, until_cycle: int) -> list[TraceEvent]:
        if until_cycle > self.config.max_cycles:
            raise ValueError(f"until_cycle {until_cycle} exceeds maxCycles {self.config.max_cycles}")
        events: list[TraceEvent] = []
        # the loop makes no reference cycles; generational scans over a
        # growing trace would only cost time
        collecting = gc.isenabled()
        gc.disable()
        try:
            while self.cycle < until_cycle:
                self._step_into(events)
        finally:
            if collecting:
                gc.enable()
        return events

    def step(self) -> list[TraceEvent]:
        events: list[TraceEvent] = []
        self._step_into(events)
        return events

    # -- one cycle --------------------------------------------------------

    def _step_into(self, out: list) -> None:
        c = self.cycle
        cfg = self.config
        if cfg.retention is not None:
            cleared = self.store.sweep(c, cfg.retention)
            if cleared:
                out.append(TraceEvent(c, T.MEMORY_CLEARED, {"wordIds": cleared, "ltmSize": len(self.store)}))
        script = self.script
        if script.problems:
            for msg in script.problems.get(c, ()):
                out.append(TraceEvent(c, T.WARNING, {"message": msg}))
        if self.procedure is not None:
            self._continue_procedure(c, out)
        elif c & 1:
            self._recall_frame(c, out)
        else:
            self._sensory_frame(c, out)
        if script.directives:
            for d in script.directives.get(c, ()):
                self._start_procedure(c, d.start_word_id, out)
        self.cycle = c + 1

    def _sensory_frame(self, c: int, out: list) -> None:
        percept = self.script.percepts.get(c)
        if percept is None:
            return
        layout = self.layout
        try:
            bits, warnings = encode(self.table, percept)
        except PerceptError as exc:
            out.append(TraceEvent(c, T.WARNING, {"message": f"percept rejected: {exc}"}))
            return
        for msg in warnings:
            out.append(TraceEvent(c, T.WARNING, {"message": msg}))
        imp = importance(bits, 0, None, c, self.config.analyzer, layout, sensory=True)
        out.append(TraceEvent(c, T.SENSORY_FRAME, {
            "vector": to_hex(bits, layout.width),
            "features": self.table.names(bits),
            "importance": imp.to_dict(),
        }))
        proposal = self.detector.observe(bits & self._named_mask, self.table)
        if proposal is not None:
            was_enabled = self.table.learning_enabled
            bit = learn_feature(self.table, proposal)
            if bit is not None:
                out.append(TraceEvent(c, T.FEATURE_LEARNED, {
                    "bit": bit,
                    "definition": list(iter_bits(proposal)),
                    "names": self.table.names(proposal),
                }))
            elif was_enabled:
                out.append(TraceEvent(c, T.WARNING, {"message": "learned-feature region exhausted, learning disabled"}))
        self._offer(c, bits, imp, "sensory", None, out)

    def _recall_frame(self, c: int, out: list) -> None:
        stm = self.stm
        if stm is None:
            return
        mask = self.editor.next_mask(stm.bits)
        if not mask:
            return
        cues = mask.bit_count()
        out.append(TraceEvent(c, T.RECALL_ATTEMPT, {"mask": format(mask, self._hex), "cues": cues}))
        found = self.store.recall_bits(mask, mask, c)
        if found is None:
            out.append(TraceEvent(c, T.NO_MATCH, {}))
            if self.config.novelty_enabled and novelty_trigger(True, False):
                self._memorize(MemorizeTrigger(NOVELTY, stm.bits, c), out)
            return
        word, count = found
        acfg = self.config.analyzer
        imp = self._scorer.recall(word.bits, count, word.write_cycle, c)
        out.append(TraceEvent(c, T.MATCH, {
            "wordId": word.word_id,
            "matchCount": count,
            "cues": cues,
            "importance": imp.to_dict(),
            "recognition": recognition_flag(cues, acfg),
            "inStm": word.bits == stm.bits,
        }))
        # the image already in STM is not a new thought; it cannot re-enter itself
        if word.bits != stm.bits:
            self._offer(c, word.bits, imp, "recall", word.word_id, out)

    def _offer(self, c: int, bits: int, imp: ImportanceIndex, source: str,
               word_id: Optional[int], out: list) -> None:
        acfg = self.config.analyzer
        displaced = stm_effective_importance(self.stm, c, acfg)
        if not attention_gate(imp, displaced, acfg):
            return
        out.append(TraceEvent(c, T.ATTENTION_TRANSFER, {
            "source": source,
            "wordId": word_id,
            "vector": to_hex(bits, self.layout.width),
            "candidate": imp.to_dict(),
            "displaced": displaced,
            "margin": acfg.margin,
        }))
        self.stm = StmState(bits, c, imp, source, word_id)
        trigger = self.rehearsal.observe(bits, c)
        if trigger is not None:
            self._memorize(trigger, out)

    def _memorize(self, trigger: MemorizeTrigger, out: list) -> None:
        c = trigger.cycle
        word_id = self.memorizer.commit_guarded(self.store, trigger)
        hexbits = to_hex(trigger.bits, self.layout.width)
        out.append(TraceEvent(c, T.MEMORIZE_TRIGGER, {
            "reason": trigger.reason,
            "vector": hexbits,
            "pairedCycle": trigger.paired_cycle,
            "suppressed": word_id is None,
        }))
        if word_id is not None:
            out.append(TraceEvent(c, T.MEMORIZATION_WRITE, {
                "reason": trigger.reason,
                "wordId": word_id,
                "vector": hexbits,
                "ltmSize": len(self.store),
            }))

    # -- procedures -------------------------------------------------------

    def _start_procedure(self, c: int, start: int, out: list) -> None:
        if self.procedure is not None:
            out.append(TraceEvent(c, T.WARNING, {"message": f"procedure already running, start {start} ignored"}))
            return
        if start not in self.store:
            out.append(TraceEvent(c, T.WARNING, {"message": f"runProcedure: unknown word {start}"}))
            return
        self.procedure = [start, start, 0]
        if self.config.step_per_cycle:
            self._procedure_step(c, out)
        else:
            while self.procedure is not None:
                self._procedure_step(c, out)

    def _continue_procedure(self, c: int, out: list) -> None:
        if c in self.script.percepts:
            out.append(TraceEvent(c, T.WARNING, {"message": "percept dropped while a procedure runs"}))
        self._procedure_step(c, out)

    def _procedure_step(self, c: int, out: list) -> None:
        start, current, taken = self.procedure
        taken += 1
        nxt = next_step(self.store, current) if current in self.store else None
        payload = {"start": start, "step": taken - 1, "wordId": current}
        if nxt is None:
            payload["halted"] = COMPLETED
            self.procedure = None
        elif taken >= self.config.max_procedure_steps:
            payload["halted"] = STEP_LIMIT
            self.procedure = None
        else:
            self.procedure = [start, nxt, taken]
        out.append(TraceEvent(c, T.PROCEDURE_STEP, payload))

    # -- snapshot / restore ----------------------------------------------

    def snapshot(self) -> dict:
        w = self.layout.width
        stm = self.stm
        return {
            "version": SNAPSHOT_VERSION,
            "configHash": self.config.fingerprint(),
            "cycle": self.cycle,
            "memory": {"nextId": self.store.next_id, "words": self.store.records()},
            "stm": None if stm is None else {
                "vector": to_hex(stm.bits, w),
                "entryCycle": stm.entry_cycle,
                "entryImportance": stm.entry_importance.to_dict(),
                "source": stm.source,
                "sourceWordId": stm.source_word_id,
            },
            "lfsr": {"state": format(self.editor.state, "x")},
            "rehearsal": [[to_hex(b, w), cyc, used] for b, cyc, used in self.rehearsal.state()],
            "memorizer": [[to_hex(b, w), cyc] for b, cyc in self.memorizer.last_commit.items()],
            "symbols": self.table.to_dict(),
            "detector": self.detector.to_dict(),
            "procedure": self.procedure,
        }

    @classmethod
    def restore(cls, image: dict, config: EngineConfig,
                script: Optional[StimulusScript] = None) -> "Engine":
        if image.get("version") != SNAPSHOT_VERSION:
            raise SnapshotError(f"unsupported snapshot version {image.get('version')!r}")
        if image.get("configHash") != config.fingerprint():
            raise SnapshotError("snapshot was taken under a different config")
        layout = config.layout
        w = layout.width
        mem = image["memory"]
        store = LongTermMemory.from_records(mem["words"], layout, mem["nextId"])
        eng = cls(config, script, store)
        eng.cycle = int(image["cycle"])
        s = image["stm"]
        if s is not None:
            eng.stm = StmState(from_hex(s["vector"], w), s["entryCycle"],
                               ImportanceIndex.from_dict(s["entryImportance"]), s["source"], s["sourceWordId"])
        eng.editor.reseed(int(image["lfsr"]["state"], 16))
        eng.rehearsal.load_state([(from_hex(b, w), cyc, used) for b, cyc, used in image["rehearsal"]])
        eng.memorizer.last_commit = {from_hex(b, w): cyc for b, cyc in image["memorizer"]}
        eng.table = SymbolTable.from_dict(layout, config.auto_register, image["symbols"])
        eng.detector.load_state(image["detector"])
        eng.procedure = image["procedure"]
        return eng

    def report(self, events, initial_ltm: int = 0) -> dict:
        rep = T.build_report(events, self.cycle, initial_ltm)
        rep["finalLtmSize"] = len(self.store)
        return rep
