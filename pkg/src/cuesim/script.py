"""Stimulus scripts: percepts and directives keyed by cycle.

A script file is either a JSON document ``{"version": 1, "records": [...]}``
or JSON Lines with one record per line.  Records are

    {"cycle": 4, "features": ["yellow", "green"], "brightness": 3, "emotion": 1}
    {"cycle": 9, "runProcedure": {"startWordId": 0}}

Records that are well-formed JSON but semantically bad are kept as problems
and surface as Warning events at their cycle; only files that cannot be read
at all raise ``ScriptError``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from .encoder import RawPercept

SCHEMA_VERSION = 1


class ScriptError(ValueError):
    pass


@dataclass(frozen=True)
class RunProcedure:
    cycle: int
    start_word_id: int


@dataclass
class StimulusScript:
    percepts: dict[int, RawPercept] = field(default_factory=dict)
    directives: dict[int, list[RunProcedure]] = field(default_factory=dict)
    problems: dict[int, list[str]] = field(default_factory=dict)

    @property
    def last_cycle(self) -> int:
        cycles = [*self.percepts, *self.directives, *self.problems]
        return max(cycles, default=-1)

    def _problem(self, cycle: int, msg: str) -> None:
        self.problems.setdefault(cycle, []).append(msg)

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "StimulusScript":
        script = cls()
        last = -1
        for n, rec in enumerate(records):
            if not isinstance(rec, dict):
                raise ScriptError(f"record {n} is not an object")
            cycle = rec.get("cycle")
            if isinstance(cycle, bool) or not isinstance(cycle, int) or cycle < 0:
                raise ScriptError(f"record {n} has no valid cycle")
            if cycle < last:
                script._problem(cycle, f"record {n}: cycle {cycle} out of order, skipped")
                continue
            last = cycle
            try:
                if "runProcedure" in rec:
                    script._add_directive(rec)
                elif "features" in rec:
                    script._add_percept(rec)
                else:
                    raise ValueError("neither a percept nor a directive")
            except (ValueError, TypeError, KeyError) as exc:
                script._problem(cycle, f"record {n}: {exc}, skipped")
        return script

    def _add_directive(self, rec: dict) -> None:
        if set(rec) - {"cycle", "runProcedure"}:
            raise ValueError(f"unexpected keys {sorted(set(rec) - {'cycle', 'runProcedure'})}")
        start = rec["runProcedure"]["startWordId"]
        if isinstance(start, bool) or not isinstance(start, int) or start < 0:
            raise ValueError("startWordId must be a nonnegative integer")
        self.directives.setdefault(rec["cycle"], []).append(RunProcedure(rec["cycle"], start))

    def _add_percept(self, rec: dict) -> None:
        allowed = {"cycle", "features", "brightness", "emotion"}
        if set(rec) - allowed:
            raise ValueError(f"unexpected keys {sorted(set(rec) - allowed)}")
        cycle = rec["cycle"]
        if cycle % 2:
            raise ValueError(f"percept at odd cycle {cycle} (recall frame)")
        if cycle in self.percepts:
            raise ValueError(f"second percept at cycle {cycle}")
        features = rec["features"]
        if not isinstance(features, list) or not all(isinstance(f, str) for f in features):
            raise ValueError("features must be an array of names")
        levels = []
        for key in ("brightness", "emotion"):
            v = rec.get(key, 0)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ValueError(f"{key} must be a nonnegative integer")
            levels.append(v)
        self.percepts[cycle] = RawPercept(cycle, tuple(features), *levels)

    @classmethod
    def parse(cls, text: str) -> "StimulusScript":
        stripped = text.strip()
        if not stripped:
            return cls()
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError:
            doc = None
        if isinstance(doc, dict) and "records" in doc:
            if doc.get("version", SCHEMA_VERSION) != SCHEMA_VERSION:
                raise ScriptError(f"unsupported script version {doc.get('version')!r}")
            records = doc["records"]
            if not isinstance(records, list):
                raise ScriptError("records must be an array")
            return cls.from_records(records)
        records = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ScriptError(f"line {lineno}: {exc}") from None
        return cls.from_records(records)

    @classmethod
    def load(cls, path) -> "StimulusScript":
        with open(path) as fp:
            return cls.parse(fp.read())
