"""Command line interface.

    scenloop dsl check <file>
    scenloop sample <file> --map <map> --seed <n> [--count k]
    scenloop session new|comment|accept|show ...
    scenloop eval run|report ...
    scenloop serve [--host H] [--port P] [--ui-dir DIR]

Flags override scenario-loop.toml; SCENLOOP_* environment variables
override flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import default_corpus_dir, load_config, resolve_map_path
from .corpus import load_corpus
from .diagnostics import SourceError, render_all
from .dsl import parse, try_parse, validate
from .roads import MapError, load_network
from .sampler import RejectionExhausted, sample_scene, scene_to_text


def _session_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", help="http | script:<path> | scriptdir:<dir> | replay:<dir>[:record]")
    parser.add_argument("--map", help="bundled map name or path to a .map file")
    parser.add_argument("--corpus", help="corpus directory (default: bundled)")
    parser.add_argument("--budget", type=int, help="prompt token budget")
    parser.add_argument("--max-turns", type=int, dest="max_turns")
    parser.add_argument("--max-queries", type=int, dest="max_queries")
    parser.add_argument("--seeds", type=int, help="scenes per executable turn")
    parser.add_argument("--sessions-root", dest="sessions_root")
    parser.add_argument("--config", help="path to scenario-loop.toml")


def _gather_config(args: argparse.Namespace):
    flag_names = ("backend", "map", "corpus", "budget", "max_turns",
                  "max_queries", "seeds", "sessions_root")
    flags = {name: getattr(args, name, None) for name in flag_names}
    return load_config(flags, config_file=getattr(args, "config", None))


def cmd_dsl_check(args) -> int:
    source = Path(args.file).read_text("utf-8")
    program, diagnostics = try_parse(source)
    if program is not None:
        symbols = None
        if args.map:
            symbols = load_network(resolve_map_path(args.map)).dsl_symbols()
        diagnostics = validate(program, symbols)
    for d in diagnostics:
        print(d.render())
    return 1 if diagnostics else 0


def cmd_sample(args) -> int:
    source = Path(args.file).read_text("utf-8")
    network = load_network(resolve_map_path(args.map))
    try:
        program = parse(source)
        diagnostics = validate(program, network.dsl_symbols())
        if diagnostics:
            raise SourceError(diagnostics)
    except SourceError as exc:
        print(render_all(exc.diagnostics), file=sys.stderr)
        return 1
    status = 0
    for i in range(args.count):
        seed = args.seed + i
        try:
            scene = sample_scene(program, network, seed)
        except RejectionExhausted as exc:
            print(f"seed {seed}: {exc}", file=sys.stderr)
            status = 1
            continue
        text = scene_to_text(scene)
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{seed}.scene").write_text(text, "utf-8")
            print(f"seed {seed}: wrote {out / f'{seed}.scene'} "
                  f"({scene.iterations} iterations)")
        else:
            sys.stdout.write(text)
    return status


def _orchestrator(args):
    from .session.orchestrator import Orchestrator
    return Orchestrator(_gather_config(args))


def cmd_session(args) -> int:
    from .session.orchestrator import SessionError
    try:
        orch = _orchestrator(args)
        if args.session_cmd == "new":
            session = orch.start_session(args.description)
            print(json.dumps({"id": session.id, "state": session.state,
                              "turn": session.turn,
                              "queries": session.queries_per_turn()}, indent=2))
        elif args.session_cmd == "comment":
            session = orch.user_comment(args.id, args.text)
            print(json.dumps({"id": session.id, "state": session.state,
                              "turn": session.turn,
                              "queries": session.queries_per_turn()}, indent=2))
        elif args.session_cmd == "accept":
            session = orch.accept(args.id)
            print(json.dumps({"id": session.id, "state": session.state}, indent=2))
        elif args.session_cmd == "show":
            from .session.service import session_view
            print(json.dumps(session_view(orch, args.id), indent=2))
        else:
            raise SystemExit(2)
    except SessionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_eval_run(args) -> int:
    from dataclasses import replace

    from .evalharness import emit_report, run_batch
    config = _gather_config(args)
    if args.corpus:
        config = replace(config, corpus=args.corpus)
    if args.out:
        config = replace(config, sessions_root=str(Path(args.out) / "sessions"))
    corpus = load_corpus(config.corpus or default_corpus_dir())
    records = run_batch(corpus, config, workers=args.workers)
    out = Path(args.out)
    paths = emit_report(records, out, config.max_turns,
                        config.max_turns * config.max_queries)
    successes = sum(1 for r in records if r.outcome == "success")
    print(f"{successes}/{len(records)} scenarios succeeded")
    for path in paths:
        print(f"wrote {path}")
    return 0


def cmd_eval_report(args) -> int:
    from .evalharness import emit_report, load_records
    records = load_records(args.records)
    if not records:
        print("warning: no records", file=sys.stderr)
        return 1
    paths = emit_report(records, args.out)
    for path in paths:
        print(f"wrote {path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .session.orchestrator import Orchestrator
    from .session.service import create_app
    config = _gather_config(args)
    orch = Orchestrator(config)
    app = create_app(orch, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scenloop")
    sub = parser.add_subparsers(dest="cmd", required=True)

    dsl = sub.add_parser("dsl", help="scenario DSL tools")
    dsl_sub = dsl.add_subparsers(dest="dsl_cmd", required=True)
    check = dsl_sub.add_parser("check", help="parse and validate a scenario file")
    check.add_argument("file")
    check.add_argument("--map", help="validate against this map's symbols")

    sample = sub.add_parser("sample", help="sample concrete scenes from a scenario")
    sample.add_argument("file")
    sample.add_argument("--map", required=True)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--count", type=int, default=1)
    sample.add_argument("--out", help="directory for .scene files (default: stdout)")

    session = sub.add_parser("session", help="drive dialogue sessions")
    session_sub = session.add_subparsers(dest="session_cmd", required=True)
    new = session_sub.add_parser("new")
    new.add_argument("description")
    _session_flags(new)
    comment = session_sub.add_parser("comment")
    comment.add_argument("id")
    comment.add_argument("text")
    _session_flags(comment)
    accept = session_sub.add_parser("accept")
    accept.add_argument("id")
    _session_flags(accept)
    show = session_sub.add_parser("show")
    show.add_argument("id")
    _session_flags(show)

    ev = sub.add_parser("eval", help="batch evaluation over the test corpus")
    ev_sub = ev.add_subparsers(dest="eval_cmd", required=True)
    run = ev_sub.add_parser("run")
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=1)
    _session_flags(run)
    report = ev_sub.add_parser("report")
    report.add_argument("--records", required=True)
    report.add_argument("--out", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service for the UI")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8008)
    serve.add_argument("--ui-dir", dest="ui_dir",
                       help="directory of built UI assets to serve at /ui/")
    _session_flags(serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "dsl":
            return cmd_dsl_check(args)
        if args.cmd == "sample":
            return cmd_sample(args)
        if args.cmd == "session":
            return cmd_session(args)
        if args.cmd == "eval":
            if args.eval_cmd == "run":
                return cmd_eval_run(args)
            return cmd_eval_report(args)
        if args.cmd == "serve":
            return cmd_serve(args)
    except (MapError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
