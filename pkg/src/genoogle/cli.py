"""Text-mode interface.

    genoogle [--config PATH] <command> [args]

Commands: format, search, list, parameters, set, prev, batch.  With no
command an interactive read-eval loop starts; `prev` re-runs the last
successfully parsed command and exists only in the loop and in batch
files.
"""

from __future__ import annotations

import argparse
import dataclasses
import shlex
import sys
from pathlib import Path

from .config import RunConfig, coerce_param, load_config
from .encoding import SpacedSeedMask
from .engine import Engine, fragment_bank
from .errors import GenoogleError
from .fasta import read_fasta
from .model import EngineConfig, SearchParams
from .xmlout import write_results_xml

_SEARCH_FLAGS = {
    "--max-results": ("params", "max_results"),
    "--min-hsp-length": ("params", "min_hsp_length"),
    "--max-entry-distance": ("params", "max_entry_distance"),
    "--dropoff": ("params", "extension_dropoff"),
    "--query-splits": ("engine", "query_splits"),
    "--workers": ("engine", "align_workers"),
}


class CommandError(Exception):
    """A diagnostic that should reach the user with a nonzero status."""


class Session:
    """Command dispatch state: config, current parameters, history."""

    def __init__(self, config: RunConfig, interactive: bool = False):
        self.config = config
        self.params = config.params
        self.engine_cfg = config.engine
        self.interactive = interactive
        self.last_command: list[str] | None = None
        self._engines: dict[str, Engine] = {}

    def engine_for(self, bank_name: str) -> Engine:
        bank = self.config.banks.get(bank_name)
        if bank is None:
            raise CommandError(f"unknown bank {bank_name!r}; declare it in the config")
        cached = self._engines.get(bank_name)
        if cached is not None:
            return cached
        if not bank.manifest_path.exists():
            raise CommandError(
                f"bank {bank_name!r} is not formatted (run: format {bank_name})"
            )
        engine = Engine.open(bank.manifest_path)
        self._engines[bank_name] = engine
        return engine

    def drop_engine(self, bank_name: str) -> None:
        engine = self._engines.pop(bank_name, None)
        if engine is not None:
            engine.close()


def _cmd_format(session: Session, args: list[str]) -> int:
    if len(args) != 1:
        raise CommandError("usage: format <bank>")
    bank = session.config.banks.get(args[0])
    if bank is None:
        raise CommandError(f"unknown bank {args[0]!r}; declare it in the config")
    session.drop_engine(bank.name)
    result = fragment_bank(
        bank.fasta, bank.fragments, SpacedSeedMask(bank.mask), bank.path, bank.name
    )
    total = sum(m.total_bases for m in result.metas)
    count = sum(m.sequence_count for m in result.metas)
    print(
        f"formatted {bank.name}: {count} sequences, {total} bases, "
        f"{bank.fragments} fragment(s) -> {result.manifest_path}"
    )
    return 0


def _cmd_search(session: Session, args: list[str]) -> int:
    positional: list[str] = []
    params = session.params
    engine_cfg = session.engine_cfg
    it = iter(args)
    for arg in it:
        if arg in _SEARCH_FLAGS:
            group, name = _SEARCH_FLAGS[arg]
            try:
                value = int(next(it))
            except StopIteration:
                raise CommandError(f"{arg} needs a value") from None
            except ValueError:
                raise CommandError(f"{arg} needs an integer value") from None
            if group == "params":
                params = params.with_overrides(**{name: value})
            else:
                engine_cfg = dataclasses.replace(engine_cfg, **{name: value})
        elif arg.startswith("--"):
            raise CommandError(f"unknown search flag {arg}")
        else:
            positional.append(arg)
    if len(positional) != 3:
        raise CommandError("usage: search <bank> <query.fasta> <out.xml> [flags]")
    bank_name, query_path, out_path = positional
    engine = session.engine_for(bank_name)
    queries = list(read_fasta(query_path))
    results = [
        engine.parallel_search(rec.sequence, params, engine_cfg, query_id=rec.name)
        for rec in queries
    ]
    write_results_xml(results, out_path)
    total_hsps = sum(r.hsp_count for r in results)
    print(f"{len(results)} quer{'y' if len(results) == 1 else 'ies'}, "
          f"{total_hsps} HSP(s) -> {out_path}")
    return 0


def _cmd_list(session: Session, args: list[str]) -> int:
    if args:
        raise CommandError("usage: list")
    for name in sorted(session.config.banks):
        bank = session.config.banks[name]
        manifest = bank.manifest_path
        if manifest.exists():
            engine = session.engine_for(name)
            print(f"{name}\t{engine.sequence_count}\t{engine.total_bases}")
        else:
            print(f"{name}\t(not formatted)")
    return 0


def _cmd_parameters(session: Session, args: list[str]) -> int:
    if args:
        raise CommandError("usage: parameters")
    for f in dataclasses.fields(SearchParams):
        print(f"{f.name} = {getattr(session.params, f.name)}")
    for f in dataclasses.fields(EngineConfig):
        print(f"{f.name} = {getattr(session.engine_cfg, f.name)}")
    return 0


def _cmd_set(session: Session, args: list[str]) -> int:
    if len(args) != 2:
        raise CommandError("usage: set <parameter> <value>")
    name, raw = args
    value = coerce_param(name, raw)
    if name in {f.name for f in dataclasses.fields(EngineConfig)}:
        session.engine_cfg = dataclasses.replace(session.engine_cfg, **{name: value})
    else:
        session.params = session.params.with_overrides(**{name: value})
    print(f"{name} = {value}")
    return 0


def _cmd_batch(session: Session, args: list[str]) -> int:
    keep_going = False
    paths = []
    for arg in args:
        if arg == "--keep-going":
            keep_going = True
        elif arg.startswith("--"):
            raise CommandError(f"unknown batch flag {arg}")
        else:
            paths.append(arg)
    if len(paths) != 1:
        raise CommandError("usage: batch <file> [--keep-going]")
    path = Path(paths[0])
    if not path.exists():
        raise CommandError(f"batch file {path} does not exist")
    failures = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            rc = dispatch(session, shlex.split(line), in_batch=True)
            status = "ok" if rc == 0 else f"failed (exit {rc})"
            print(f"batch line {lineno}: {status}: {line}")
            if rc != 0:
                failures += 1
                if not keep_going:
                    return rc
    return 1 if failures else 0


_COMMANDS = {
    "format": _cmd_format,
    "search": _cmd_search,
    "list": _cmd_list,
    "parameters": _cmd_parameters,
    "set": _cmd_set,
    "batch": _cmd_batch,
}


def dispatch(session: Session, argv: list[str], in_batch: bool = False) -> int:
    """Run one command line; returns its exit status."""
    if not argv:
        return 0
    name, args = argv[0], argv[1:]
    if name == "prev":
        if not (session.interactive or in_batch):
            print("prev is only available in the interactive loop and in batch files",
                  file=sys.stderr)
            return 2
        if session.last_command is None:
            print("no previous command", file=sys.stderr)
            return 1
        return dispatch(session, list(session.last_command), in_batch=in_batch)
    handler = _COMMANDS.get(name)
    if handler is None:
        print(f"unknown command {name!r}; commands: "
              f"{', '.join(sorted(_COMMANDS))}, prev", file=sys.stderr)
        return 2
    session.last_command = list(argv)
    try:
        return handler(session, args)
    except CommandError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (GenoogleError, OSError) as exc:
        print(f"{name}: {exc}", file=sys.stderr)
        return 1


def repl(session: Session) -> int:
    """Read-eval loop; quits on EOF, 'quit' or 'exit'."""
    rc = 0
    while True:
        try:
            line = input("genoogle> ")
        except EOFError:
            print()
            return rc
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line in ("quit", "exit"):
            return rc
        rc = dispatch(session, shlex.split(line))
    return rc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="genoogle",
        description="Indexed, parallel similarity search over DNA sequence banks.",
    )
    parser.add_argument("--config", help="run configuration file")
    parser.add_argument("command", nargs=argparse.REMAINDER,
                        help="command and its arguments; none starts the shell")
    opts = parser.parse_args(argv)
    try:
        config = load_config(opts.config) if opts.config else RunConfig()
    except (GenoogleError, OSError) as exc:
        print(f"config: {exc}", file=sys.stderr)
        return 1
    session = Session(config, interactive=not opts.command)
    if not opts.command:
        return repl(session)
    return dispatch(session, opts.command)


if __name__ == "__main__":
    sys.exit(main())
