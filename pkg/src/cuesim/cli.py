"""Command-line front end.

Exit codes: 0 success or verified, 1 replay divergence, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path
from typing import Optional

from .config import EngineConfig, load_config
from .engine import Engine
from .memory import CueQuery, LongTermMemory, UnknownWordError
from .procedures import link_words
from .script import StimulusScript
from .trace import build_report, first_divergence, read_trace, write_trace
from .vector import FeatureLayout, from_hex

EXIT_OK = 0
EXIT_DIVERGED = 1
EXIT_USAGE = 2


class InputError(Exception):
    pass


def _fail(msg: str) -> int:
    print(f"cuesim: error: {msg}", file=sys.stderr)
    return EXIT_USAGE


def _config(args) -> EngineConfig:
    cfg = load_config(args.config) if args.config else EngineConfig()
    return cfg.with_overrides(seed=args.seed, max_cycles=args.max_cycles)


def _script(path: Optional[str]) -> StimulusScript:
    return StimulusScript.load(path) if path else StimulusScript()


def _memory(path: Optional[str], layout: FeatureLayout) -> Optional[LongTermMemory]:
    if not path:
        return None
    with open(path) as fp:
        return LongTermMemory.load(fp, layout)


def _engine(args, cfg: EngineConfig) -> Engine:
    script = _script(args.script)
    if getattr(args, "resume", None):
        with open(args.resume) as fp:
            return Engine.restore(json.load(fp), cfg, script)
    return Engine(cfg, script, _memory(args.memory, cfg.layout))


def _until(args, cfg: EngineConfig) -> int:
    until = cfg.max_cycles if args.until is None else args.until
    if until > cfg.max_cycles:
        raise InputError(f"--until {until} exceeds maxCycles {cfg.max_cycles}")
    return until


def _trace_text(events, cfg: EngineConfig) -> str:
    buf = io.StringIO()
    write_trace(events, buf, cfg.cycle_rate_hz)
    return buf.getvalue()


# -- subcommands ----------------------------------------------------------

def cmd_run(args) -> int:
    cfg = _config(args)
    eng = _engine(args, cfg)
    initial = len(eng.store)
    events = eng.run(_until(args, cfg))
    Path(args.out).write_text(_trace_text(events, cfg))
    if args.snapshot_out:
        Path(args.snapshot_out).write_text(json.dumps(eng.snapshot(), separators=(",", ":")))
    if args.memory_out:
        with open(args.memory_out, "w") as fp:
            eng.store.dump(fp)
    if not args.quiet:
        print(json.dumps(eng.report(events, initial), indent=2))
    return EXIT_OK


def cmd_replay_verify(args) -> int:
    cfg = _config(args)
    recorded = Path(args.trace).read_text().splitlines()
    eng = _engine(args, cfg)
    fresh = _trace_text(eng.run(_until(args, cfg)), cfg).splitlines()
    div = first_divergence(recorded, fresh)
    if div is None:
        if not args.quiet:
            print(f"verified: {len(fresh)} events identical")
        return EXIT_OK
    print(f"diverged at line {div.line}, cycle {div.cycle}", file=sys.stderr)
    print(f"  recorded: {div.expected}", file=sys.stderr)
    print(f"  replayed: {div.actual}", file=sys.stderr)
    return EXIT_DIVERGED


def _dump_width(path: str) -> int:
    with open(path) as fp:
        for line in fp:
            if line.strip():
                return 4 * len(json.loads(line)["bits"])
    raise InputError("memory dump is empty; pass --config to give the word width")


def cmd_oracle(args) -> int:
    if args.config:
        layout = _config(args).layout
    else:
        d = FeatureLayout()
        layout = FeatureLayout(_dump_width(args.memory), d.brightness_bits, d.emotion_bits, d.learned_bits)
    store = _memory(args.memory, layout)
    cue = CueQuery(from_hex(args.mask, layout.width), from_hex(args.values, layout.width))
    matches = store.matches_all(cue)
    print(json.dumps({"matches": matches, "winner": matches[-1] if matches else None}))
    return EXIT_OK


def cmd_dump_memory(args) -> int:
    cfg = _config(args)
    if args.snapshot:
        with open(args.snapshot) as fp:
            image = json.load(fp)
        store = Engine.restore(image, cfg).store
    else:
        eng = _engine(args, cfg)
        eng.run(_until(args, cfg))
        store = eng.store
    if args.out:
        with open(args.out, "w") as fp:
            store.dump(fp)
    else:
        store.dump(sys.stdout)
    return EXIT_OK


def cmd_link(args) -> int:
    layout = _config(args).layout if args.config else None
    if layout is None:
        d = FeatureLayout()
        layout = FeatureLayout(_dump_width(args.memory), d.brightness_bits, d.emotion_bits, d.learned_bits)
    store = _memory(args.memory, layout)
    try:
        link_words(store, args.from_id, args.to_id)
    except UnknownWordError as exc:
        raise InputError(f"unknown word id {exc.args[0]}") from None
    with open(args.out or args.memory, "w") as fp:
        store.dump(fp)
    if not args.quiet:
        print(f"linked {args.from_id} -> {args.to_id}")
    return EXIT_OK


def cmd_stats(args) -> int:
    with open(args.trace) as fp:
        events = read_trace(fp)
    if args.cycles is not None:
        cycles = args.cycles
    elif args.config or args.max_cycles is not None:
        cycles = _config(args).max_cycles
    else:
        cycles = events[-1].cycle + 1 if events else 0
    print(json.dumps(build_report(events, cycles, args.initial_ltm), indent=2))
    return EXIT_OK


# -- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="engine config JSON")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the register seed")
    common.add_argument("--max-cycles", type=int, default=argparse.SUPPRESS, help="override maxCycles")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="cuesim", parents=[common],
                                     description="Pseudorandom cue-search attention simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=fn)
        return p

    def sim_inputs(p):
        p.add_argument("--script", help="stimulus script (JSON or JSON Lines)")
        p.add_argument("--memory", help="initial long-term memory dump (JSON Lines)")
        p.add_argument("--resume", help="continue from a snapshot")
        p.add_argument("--until", type=int, help="stop at this cycle (default maxCycles)")

    p = add("run", cmd_run, "run a simulation and write its trace")
    sim_inputs(p)
    p.add_argument("--out", required=True, help="trace output path (JSON Lines)")
    p.add_argument("--snapshot-out", help="write the final engine snapshot here")
    p.add_argument("--memory-out", help="write the final long-term memory dump here")

    p = add("replay-verify", cmd_replay_verify, "re-run and compare against a recorded trace")
    sim_inputs(p)
    p.add_argument("--trace", required=True)

    p = add("oracle", cmd_oracle, "list every stored word matching a cue (brute force)")
    p.add_argument("memory")
    p.add_argument("mask", help="cue mask, hex")
    p.add_argument("values", help="cue values, hex")

    p = add("dump-memory", cmd_dump_memory, "dump long-term memory after a run or from a snapshot")
    sim_inputs(p)
    p.add_argument("--snapshot")
    p.add_argument("--out")

    p = add("link", cmd_link, "link two words of a memory dump into a procedure step")
    p.add_argument("memory")
    p.add_argument("--from", dest="from_id", type=int, required=True)
    p.add_argument("--to", dest="to_id", type=int, required=True)
    p.add_argument("--out", help="write here instead of in place")

    p = add("stats", cmd_stats, "summarize a trace")
    p.add_argument("trace")
    p.add_argument("--initial-ltm", type=int, default=0, help="LTM size before the run")
    p.add_argument("--cycles", type=int, help="cycles covered by the trace")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    for name, default in (("config", None), ("seed", None), ("max_cycles", None), ("quiet", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, InputError) as exc:
        return _fail(str(exc) or type(exc).__name__)


if __name__ == "__main__":
    sys.exit(main())
