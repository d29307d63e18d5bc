"""Command-line front end: ``paperrank {rank,paper,scatter,verify,validate,init,sync}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import engine, ingest, oracle, ranks, report
from .errors import NotFoundError, PaperRankError
from .graph import RefCountMode, build_graph, validate

log = logging.getLogger("paperrank")


class CommandFailed(Exception):
    """A command ran but its checks did not pass (exit status 1)."""


def _window(text):
    try:
        return ranks.TimeWindow.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _mode(text):
    try:
        return RefCountMode.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mode must be 'bibliography' or 'indb', got {text!r}") from None


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--mode", type=_mode, default=RefCountMode.BIBLIOGRAPHY,
                   help="reference count: full bibliography length or in-database references (default: bibliography)")
    p.add_argument("--alpha", type=_positive_float, default=ranks.DEFAULT_ALPHA)
    p.add_argument("--beta", type=_positive_float, default=ranks.DEFAULT_BETA)
    p.add_argument("--window", type=_window, default=ranks.ALL_TIME, metavar="FROM:TO")
    p.add_argument("--format", choices=["table", "csv", "json"], default="table")
    p.add_argument("--output", type=Path, help="write the report here instead of stdout")
    p.add_argument("--state", type=Path)
    p.add_argument("--config", type=Path)
    p.add_argument("--lenient", action="store_true", help="skip malformed snapshot lines instead of failing")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="paperrank", description="PaperRank / AuthorRank citation indices")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", parents=[common], help="one row of indices per author")
    p.add_argument("snapshot", type=Path)
    p.add_argument("--i-threshold", type=int, default=20, help="N of the i_N column (default 20)")

    p = sub.add_parser("paper", parents=[common], help="PaperRank, citations and rho of one paper")
    p.add_argument("snapshot", type=Path)
    p.add_argument("paper_id")

    p = sub.add_parser("scatter", parents=[common], help="per-author (x, y) pairs with a least-squares line")
    p.add_argument("snapshot", type=Path)
    p.add_argument("--x", choices=sorted(report.METRICS), default="sum_cit")
    p.add_argument("--y", choices=sorted(report.METRICS), default="authorrank")
    p.add_argument("--exclude", action="append", default=[], metavar="AUTHOR", help="leave an author out (repeatable)")

    p = sub.add_parser("verify", parents=[common], help="cross-check PaperRank against the eigenvector model")
    p.add_argument("snapshot", type=Path)
    p.add_argument("--tolerance", type=_positive_float, default=oracle.FIRST_STEP_TOLERANCE)
    p.add_argument("--power-tolerance", type=_positive_float, default=1e-10)
    p.add_argument("--max-iterations", type=int, default=10_000)

    p = sub.add_parser("validate", parents=[common], help="report dangling papers, self-citations, pruned references")
    p.add_argument("snapshot", type=Path)
    p.add_argument("--strict", action="store_true", help="exit 1 if anything is reported")

    p = sub.add_parser("init", parents=[common], help="bootstrap a state file from a snapshot")
    p.add_argument("snapshot", type=Path)
    p.add_argument("--as-of", default="")

    p = sub.add_parser("sync", parents=[common], help="pull new papers and citations for authors into the state")
    p.add_argument("authors", nargs="+")
    return parser


def _graph(args):
    errors: list = []
    records = ingest.load_snapshot(args.snapshot, strict=not args.lenient, errors=errors)
    for line, msg in errors:
        print(f"warning: {args.snapshot}:{line}: {msg}", file=sys.stderr)
    return build_graph(records)


def _emit(args, text: str) -> None:
    if args.output:
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


RANK_HEADER = ["author", "subject", "pub", "sum_cit", "sum_pr", "authorrank", "h", "h_alpha", "i_beta"]


def cmd_rank(args) -> int:
    graph = _graph(args)
    rows = report.rank_rows(graph, args.mode, args.window, args.alpha, args.beta, args.i_threshold)
    header = RANK_HEADER + [f"i{args.i_threshold}"]
    values = [list(report.row_dict(r).values()) for r in rows]
    tot = report.totals(graph, rows, args.mode)
    if args.format == "json":
        _emit(args, report.render_json({
            "mode": args.mode.value, "alpha": args.alpha, "beta": args.beta, "i_threshold": args.i_threshold,
            "rows": [report.row_dict(r) for r in rows],
            "totals": {"paperrank": tot.paperrank, "authorrank": tot.authorrank},
        }))
    elif args.format == "csv":
        _emit(args, report.render_csv(header, values))
    else:
        text = report.render_table(header, values)
        text += f"\ntotal PaperRank  {tot.paperrank:.9f}\ntotal AuthorRank {tot.authorrank:.9f}\n"
        if args.window.unbounded:
            text += f"conservation gap {tot.gap:.3e}\n"
        _emit(args, text)
    return 0


def cmd_paper(args) -> int:
    graph = _graph(args)
    pid = args.paper_id
    terms = ranks.contributions(graph, pid, args.mode, args.window)
    pr = ranks.paperrank(graph, pid, args.mode, args.window)
    ncit = ranks.citation_count(graph, pid, args.window)
    rho = ncit / pr if pr else None
    if args.format == "json":
        _emit(args, report.render_json({"paper": pid, "mode": args.mode.value, "paperrank": pr, "citations": ncit,
                                        "rho": rho, "contributions": {c: t for c, t in terms}}))
        return 0
    if args.format == "csv":
        _emit(args, report.render_csv(["citer", "contribution"], terms))
        return 0
    text = (f"paper      {pid}\nPaperRank  {report.fmt_cell(pr)}\ncitations  {ncit}\n"
            f"rho        {report.fmt_cell(rho)}\n\n")
    text += report.render_table(["citer", "1/#Ref"], terms) if terms else "no citing papers\n"
    _emit(args, text)
    return 0


def cmd_scatter(args) -> int:
    graph = _graph(args)
    rows = report.rank_rows(graph, args.mode, args.window, args.alpha, args.beta)
    pts = report.scatter_points(rows, args.x, args.y, args.exclude)
    fit = report.least_squares([p[0] for p in pts], [p[1] for p in pts])
    identity = report.wants_identity_line(args.x, args.y)
    x, y = report.METRICS[args.x], report.METRICS[args.y]
    if args.format == "json":
        _emit(args, report.render_json({
            "x": x, "y": y, "points": [{"x": a, "y": b, "author": c} for a, b, c in pts],
            "regression": {"slope": fit.slope, "intercept": fit.intercept, "n": fit.n},
            "identity_line": identity,
        }))
        return 0
    if args.format == "csv":
        _emit(args, report.render_csv([x, y, "author"], pts))
        return 0
    text = report.render_table([x, y, "author"], pts)
    text += f"\nregression  slope {report.fmt_cell(fit.slope)}  intercept {report.fmt_cell(fit.intercept)}  n {fit.n}\n"
    if identity:
        text += "reference   y = x\n"
    _emit(args, text)
    return 0


def cmd_verify(args) -> int:
    graph = _graph(args)
    matrix = oracle.build_matrix(graph)
    ok_first, deviation = oracle.verify_first_step(graph, args.tolerance)
    sums = matrix.column_sums()
    live = [j for j in range(matrix.dimension) if j not in matrix.dangling]
    col_dev = max((abs(sums[j] - 1.0) for j in live), default=0.0)
    ok_cols = col_dev <= args.tolerance
    result = oracle.power_method(matrix, args.power_tolerance, args.max_iterations) if matrix.dimension else None
    guaranteed = not matrix.dangling
    lines = [
        f"papers                 {matrix.dimension}",
        f"dangling columns       {len(matrix.dangling)}",
        f"first-step deviation   {deviation:.3e}  {'ok' if ok_first else 'FAIL'}",
        f"column-sum deviation   {col_dev:.3e}  {'ok' if ok_cols else 'FAIL'}",
    ]
    ok_power = True
    if result is not None:
        cert = oracle.fixed_point_residual(matrix, result)
        ok_power = result.converged or not guaranteed
        lines += [
            f"power iterations       {result.iteration_count}",
            f"power residual         {result.residual:.3e}  {'converged' if result.converged else 'not converged'}",
            f"fixed-point residual   {cert:.3e}",
        ]
        if not guaranteed:
            lines.append("note                   dangling papers present: convergence not guaranteed")
    text = "\n".join(lines) + "\n"
    _emit(args, text)
    if not (ok_first and ok_cols and ok_power):
        raise CommandFailed("oracle checks failed")
    return 0


def cmd_validate(args) -> int:
    graph = _graph(args)
    mode = args.mode
    rep = validate(graph, mode)
    text = (f"papers             {graph.paper_count}\n"
            f"dangling ({mode.value})  {' '.join(rep.dangling) or '-'}\n"
            f"self-citations     {' '.join(rep.self_citations) or '-'}\n"
            f"pruned references  {rep.pruned_references}\n")
    _emit(args, text)
    if args.strict and not rep.is_clean:
        raise CommandFailed("validation found issues")
    return 0


def cmd_init(args) -> int:
    if args.state is None:
        raise CommandFailed("--state PATH is required")
    graph = _graph(args)
    state = engine.init_state(graph, args.mode, as_of=args.as_of)
    engine.save_state(state, args.state)
    print(f"wrote {args.state}: {len(state.paper_ranks)} papers, {len(state.author_ranks)} authors")
    return 0


def cmd_sync(args) -> int:
    if args.state is None:
        raise CommandFailed("--state PATH is required")
    state = engine.load_state(args.state)
    client = ingest.ApiClient(ingest.load_endpoints(args.config))
    start = state.revision
    lines = []
    for author in args.authors:
        before = client.budget.queries_used
        delta = ingest.sync_author(client, state, author)
        lines.append(f"{author}: papers {len(delta.paper_deltas)}  paper delta {delta.paper_total!r}"
                     f"  queries {client.budget.queries_used - before}")
        for a in sorted(delta.author_deltas):
            lines.append(f"  author {a}  {delta.author_deltas[a]!r}")
        for p in sorted(delta.paper_deltas):
            lines.append(f"  paper  {p}  {delta.paper_deltas[p]!r}")
    b = client.budget
    lines.append(f"queries {b.queries_used} (author {b.author_lookups}, paper {b.paper_lookups}, "
                 f"citation pages {b.citation_pages}, retries {b.retries})")
    if state.revision != start:
        engine.save_state(state, args.state)
        lines.append(f"state written: revision {state.revision}")
    else:
        lines.append("state unchanged")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


COMMANDS = {
    "rank": cmd_rank, "paper": cmd_paper, "scatter": cmd_scatter, "verify": cmd_verify,
    "validate": cmd_validate, "init": cmd_init, "sync": cmd_sync,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except NotFoundError as exc:
        print(f"error: not found: {exc}", file=sys.stderr)
    except (PaperRankError, CommandFailed, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
