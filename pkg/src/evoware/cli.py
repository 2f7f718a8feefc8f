"""Command-line entry points.

  evoware repl --root DIR [--llm live|replay --replay-script FILE] ...
  evoware serve --root DIR --port P ...
  evoware replay --scenario FILE [--root DIR]
  evoware report --root DIR --out DIR
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import EvowareError
from .report import render_report
from .scenario import load_scenario, run_scenario
from .server import serve
from .session import Runtime


def _add_runtime_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--root", type=Path, required=True, help="managed root directory")
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")
    parser.add_argument("--llm", choices=["live", "replay"], default=None, help="backend kind")
    parser.add_argument("--replay-script", type=Path, default=None)
    parser.add_argument("--model", default=None)
    parser.add_argument("--candidates", type=int, default=None, help="pool size per evolution")
    parser.add_argument("--tests", type=int, default=None, help="suite size per evolution")
    parser.add_argument("--timeout-secs", type=float, default=None)
    parser.add_argument("--max-repair-rounds", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--network", choices=["allow", "deny"], default=None)


def _config_from_args(args: argparse.Namespace):
    flags = {
        "managed_root": args.root,
        "backend": args.llm,
        "replay_script": args.replay_script,
        "model": args.model,
        "candidates": args.candidates,
        "tests": args.tests,
        "timeout_secs": args.timeout_secs,
        "max_repair_rounds": args.max_repair_rounds,
        "worker_limit": args.workers,
        "network": args.network,
    }
    if getattr(args, "port", None) is not None:
        flags["http_port"] = args.port
    return load_config(flags=flags, config_file=args.config)


def repl(runtime: Runtime, in_stream=None, out_stream=None) -> int:
    """Interactive loop; `:tree`, `:events`, `:quit` are meta-commands."""
    in_stream = in_stream if in_stream is not None else sys.stdin
    out_stream = out_stream if out_stream is not None else sys.stdout
    session = runtime.new_session()
    print(f"evoware session {session.session_id} on {runtime.config.managed_root}", file=out_stream)
    while True:
        print("> ", end="", file=out_stream, flush=True)
        line = in_stream.readline()
        if not line:
            break
        line = line.strip()
        if not line:
            continue
        if line == ":quit":
            break
        if line == ":tree":
            print(runtime.data_manager.serialized_snapshot(), file=out_stream)
            continue
        if line == ":events":
            for event in runtime.event_log.events():
                print(event.to_json(), file=out_stream)
            continue
        reply = session.handle_line(line)
        print(reply, file=out_stream)
    return 0


def cmd_repl(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    return repl(Runtime(config))


def cmd_serve(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    runtime = Runtime(config)
    server = serve(runtime, host=args.host, port=config.http_port)
    print(f"evoware serving on http://{args.host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    result = run_scenario(scenario, root=args.root)
    for turn, reply in enumerate(result.replies, start=1):
        if args.verbose:
            print(f"--- turn {turn} ---\n{reply}")
    for finding in result.findings:
        print(f"FAIL {finding}")
    print(f"scenario {result.name}: {'ok' if result.ok else 'failed'} "
          f"({len(result.replies)} turns, {len(result.events)} events)")
    return 0 if result.ok else 1


def cmd_report(args: argparse.Namespace) -> int:
    events_path = args.events if args.events else args.root / ".evoware" / "events.ndjson"
    if not events_path.exists():
        print(f"no event log at {events_path}", file=sys.stderr)
        return 1
    written = render_report(events_path, args.out)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evoware", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_repl = sub.add_parser("repl", help="interactive terminal session")
    _add_runtime_flags(p_repl)
    p_repl.set_defaults(func=cmd_repl)

    p_serve = sub.add_parser("serve", help="HTTP service for the web console")
    _add_runtime_flags(p_serve)
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.set_defaults(func=cmd_serve)

    p_replay = sub.add_parser("replay", help="run a scripted scenario end-to-end")
    p_replay.add_argument("--scenario", type=Path, required=True)
    p_replay.add_argument("--root", type=Path, default=None, help="replay into this root instead of a temp dir")
    p_replay.add_argument("--verbose", action="store_true")
    p_replay.set_defaults(func=cmd_replay)

    p_report = sub.add_parser("report", help="render validation figures and CSVs from the event log")
    p_report.add_argument("--root", type=Path, default=Path("."))
    p_report.add_argument("--events", type=Path, default=None)
    p_report.add_argument("--out", type=Path, required=True)
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EvowareError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
