"""Command-line tooling: lint, FOL compilation, metric evaluation, graph
rendering, demo-store embedding, deterministic session replay, and the server.

Exit codes: 0 clean, 1 diagnostics present, 2 environment/IO failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import core, dsl, fol, retrieval, validator, viz
from . import pipeline as pl
from . import script as session_script
from .diagnostics import ValidationReport
from .llm import ReplayMiss, Transcript


def _read(path: str) -> str | None:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None


def lint_text(text: str, file: str | None = None) -> ValidationReport:
    """Parse + validate: the full syntactic and semantic report for a program."""
    result = dsl.parse_graph(text, file=file)
    diags = list(result.diagnostics)
    if result.graph is not None:
        diags.extend(validator.validate(result.graph).diagnostics)
    return ValidationReport.from_list(diags)


def cmd_lint(args: argparse.Namespace) -> int:
    text = _read(args.path)
    if text is None:
        return 2
    report = lint_text(text, file=args.path)
    report_path = args.report or args.path + ".report.jsonl"
    try:
        Path(report_path).write_text(report.to_jsonl(), encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write {report_path}: {exc}", file=sys.stderr)
        return 2
    if args.json:
        print(json.dumps({"file": args.path, "errorFree": report.error_free,
                          "errors": report.error_count, "warnings": report.warning_count,
                          "diagnostics": [d.to_record() for d in report.diagnostics]},
                         sort_keys=True))
    else:
        print(f"{args.path}: {report.error_count} error(s), "
              f"{report.warning_count} warning(s)")
        print(validator.render_feedback(report, limit=args.limit))
    return 0 if report.error_free else 1


def cmd_compile_fol(args: argparse.Namespace) -> int:
    graph_text = _read(args.graph)
    fol_text = _read(args.fol)
    if graph_text is None or fol_text is None:
        return 2
    report = lint_text(graph_text, file=args.graph)
    if not report.error_free:
        print(f"error: {args.graph} does not lint clean:", file=sys.stderr)
        print(validator.render_feedback(report), file=sys.stderr)
        return 1
    graph = dsl.parse_graph(graph_text).graph
    assert graph is not None
    compiled: list[core.Constraint] = []
    failed = False
    for line_text, ast, diags in fol.parse_fol_file(fol_text, file=args.fol):
        if ast is not None:
            constraint, compile_diags = fol.compile_fol(ast, graph, source_text=line_text)
            diags = diags + compile_diags
            if constraint is not None:
                compiled.append(constraint)
        for d in diags:
            print(str(d), file=sys.stderr)
            failed = failed or d.is_error
    if failed:
        return 1
    if not compiled:
        print("no formulas to compile; nothing written")
        return 0
    out_graph = core.ConceptGraph(graph.name, graph.concepts, graph.edges,
                                  graph.constraints + tuple(compiled))
    output = args.output or str(Path(args.graph).with_suffix(".out.dkg"))
    try:
        Path(output).write_text(dsl.emit_graph(out_graph), encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write {output}: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(compiled)} constraint(s) to {output}")
    return 0


def evaluate_dirs(candidate_dir: str, gold_dir: str) -> dict:
    """Per-task E-Free and node/edge diffs for files paired by name."""
    cand = {p.name: p for p in sorted(Path(candidate_dir).glob("*.dkg"))}
    gold = {p.name: p for p in sorted(Path(gold_dir).glob("*.dkg"))}
    rows, skipped = [], []
    for name in sorted(set(cand) | set(gold)):
        if name not in cand or name not in gold:
            skipped.append(name)
            continue
        cand_report = lint_text(cand[name].read_text(encoding="utf-8"))
        cand_graph = dsl.parse_graph(cand[name].read_text(encoding="utf-8")).graph
        gold_graph = dsl.parse_graph(gold[name].read_text(encoding="utf-8")).graph
        row = {"task": name, "errorFree": cand_report.error_free}
        if cand_graph is not None and gold_graph is not None:
            diff = core.graph_diff(cand_graph, gold_graph)
            row["nodeDiff"] = diff.node_diff
            row["edgeDiff"] = diff.edge_diff
        rows.append(row)
    diffed = [r for r in rows if "nodeDiff" in r]
    return {
        "tasks": rows,
        "skipped": skipped,
        "eFree": sum(r["errorFree"] for r in rows),
        "total": len(rows),
        "avgNodeDiff": (sum(r["nodeDiff"] for r in diffed) / len(diffed)) if diffed else 0.0,
        "avgEdgeDiff": (sum(r["edgeDiff"] for r in diffed) / len(diffed)) if diffed else 0.0,
    }


def cmd_eval(args: argparse.Namespace) -> int:
    if not Path(args.candidates).is_dir() or not Path(args.gold).is_dir():
        print("error: both arguments must be directories", file=sys.stderr)
        return 2
    metrics = evaluate_dirs(args.candidates, args.gold)
    if args.json:
        print(json.dumps(metrics, sort_keys=True))
        return 0
    for name in metrics["skipped"]:
        print(f"warning: {name} has no pair; excluded")
    for row in metrics["tasks"]:
        diff = (f"{row['nodeDiff']} N, {row['edgeDiff']} E"
                if "nodeDiff" in row else "n/a")
        print(f"{row['task']}: E-Free={'yes' if row['errorFree'] else 'no'}  {diff}")
    print(f"E-Free {metrics['eFree']}/{metrics['total']}  "
          f"avg {metrics['avgNodeDiff']:.2f} N, {metrics['avgEdgeDiff']:.2f} E")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    raw = _read(args.script)
    if raw is None:
        return 2
    script = json.loads(raw)
    store = retrieval.DemoStore.load(args.store) if args.store else None
    try:
        if args.record:
            session, transcript = session_script.record_session(script, store)
            transcript.save(args.transcript)
        else:
            transcript = Transcript.load(args.transcript)
            session = session_script.replay_session(script, transcript, store)
    except ReplayMiss as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    archive = pl.export_archive(session)
    try:
        Path(args.output).write_bytes(archive)
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return 2
    print(f"session {session.id} finished at stage {session.stage.value}; "
          f"archive: {args.output}")
    return 0


def cmd_dot(args: argparse.Namespace) -> int:
    text = _read(args.path)
    if text is None:
        return 2
    result = dsl.parse_graph(text, file=args.path)
    if result.graph is None:
        for d in result.diagnostics:
            print(str(d), file=sys.stderr)
        return 1
    print(viz.to_layout(result.graph).to_json() if args.layout
          else viz.to_dot(result.graph), end="")
    return 0


def cmd_embed_store(args: argparse.Namespace) -> int:
    raw = _read(args.input)
    if raw is None:
        return 2
    store = retrieval.DemoStore(dimension=args.dim)
    for line in raw.splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        store.add(record["id"], record["stage"], record["task_text"], record["payload"])
    try:
        store.save(args.output)
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return 2
    print(f"embedded {len(store.entries)} demonstration(s) into {args.output}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .llm import backend_from_env
    from .server import create_app

    backend = backend_from_env()
    store = retrieval.DemoStore.load(args.store) if args.store else None
    config = pl.Config(samples=args.samples, max_iterations=args.max_iter)
    pipe = pl.Pipeline(
        backend, store=store, config=config,
        clock=(lambda: 0.0) if args.fixed_clock else None,
        id_factory=(lambda: args.session_id) if args.session_id else None)
    app = create_app(pipe, data_dir=args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dkg",
                                     description="knowledge-declaration toolchain")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lint", help="validate a .dkg program")
    p.add_argument("path")
    p.add_argument("--report", help="machine-readable report path (JSONL)")
    p.add_argument("--limit", type=int, default=10)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("compile-fol", help="compile .fol formulas against a graph")
    p.add_argument("graph")
    p.add_argument("fol")
    p.add_argument("--output")
    p.set_defaults(func=cmd_compile_fol)

    p = sub.add_parser("eval", help="E-Free and node/edge diff metrics over paired dirs")
    p.add_argument("candidates")
    p.add_argument("gold")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("replay", help="run a session script against a transcript")
    p.add_argument("script")
    p.add_argument("--transcript", required=True)
    p.add_argument("--output", required=True, help="export archive (.zip)")
    p.add_argument("--record", action="store_true",
                   help="record the transcript from the script's responses")
    p.add_argument("--store", help="demo store file")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("dot", help="render a .dkg program as DOT or layout JSON")
    p.add_argument("path")
    p.add_argument("--layout", action="store_true", help="emit layout JSON instead")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("embed-store", help="(re)embed a demonstration corpus")
    p.add_argument("--input", required=True, help="JSONL of id/stage/task_text/payload")
    p.add_argument("--output", required=True)
    p.add_argument("--dim", type=int, default=retrieval.DEFAULT_DIMENSION)
    p.set_defaults(func=cmd_embed_store)

    p = sub.add_parser("serve", help="run the HTTP session API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", default="dkg-data")
    p.add_argument("--store")
    p.add_argument("--samples", type=int, default=3)
    p.add_argument("--max-iter", type=int, default=5)
    p.add_argument("--session-id",
                   help="fixed id for every created session (deterministic testing)")
    p.add_argument("--fixed-clock", action="store_true",
                   help="pin session timestamps to zero (deterministic testing)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
