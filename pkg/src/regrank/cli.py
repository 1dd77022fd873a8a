"""Command line: ``regrank {ingest,build,recommend,evaluate,verify}``.

Options may also come from a ``key=value`` file given with ``--config``;
command-line flags override the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from regrank.evaluation import EvaluationError, run_experiment
from regrank.fixtures import FIXTURES, fixture
from regrank.io import FORMATS, DatasetDescriptor, ingest, load_snapshot, read_ratings, save_graph, write_ratings
from regrank.metapath import MetaPathError, Seq, parse_description
from regrank.preferences import build_tpg, preference_frame
from regrank.projection import VARIANTS, build_variant, project, verify_projection
from regrank.ranking import PPRConfig, recommend

_log = logging.getLogger("regrank")


class CLIError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _variant_list(text: str) -> list[str]:
    out = [t.strip().upper() for t in str(text).split(",") if t.strip()]
    bad = [v for v in out if v not in VARIANTS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown variant(s) {', '.join(bad)}; choose from unc, pnc, rnc, grank")
    return out


def _scale(text: str) -> tuple[float, float, float]:
    try:
        lo, hi, step = (float(t) for t in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected min,max,step, got {text!r}") from None
    return lo, hi, step


def _add_source(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("rating source (one of)")
    g.add_argument("--ratings", help="normalized rating table written by 'ingest'")
    g.add_argument("--dataset", help="raw dataset file, parsed according to --format")
    g.add_argument("--format", default="movielens-100k", choices=sorted(FORMATS))
    g.add_argument("--scale", type=_scale, help="rating scale as min,max,step")
    g.add_argument("--fixture", choices=sorted(FIXTURES), help="bundled toy dataset")


def _add_ppr(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.85, help="damping factor")
    p.add_argument("--iterations", type=int, default=20)
    p.add_argument("--epsilon", type=float, default=0.0, help="stop early once the L1 change drops below this")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regrank", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file with option defaults")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a dataset into a normalized rating table")
    _add_source(p)
    p.add_argument("--output", required=True)

    p = sub.add_parser("build", help="project the preference graph and write a snapshot")
    _add_source(p)
    p.add_argument("--variant", type=str.upper, choices=VARIANTS, default="UNC")
    p.add_argument("--metapaths", help="comma-separated meta-paths for a custom projection, e.g. UPU,UPR")
    p.add_argument("--output", required=True)
    p.add_argument("--describe", action="store_true", help="print the projected edges as a table")

    p = sub.add_parser("recommend", help="top-N items for a user, from a snapshot or straight from ratings")
    p.add_argument("--graph", help="snapshot written by 'build'")
    _add_source(p)
    p.add_argument("--variant", type=str.upper, choices=VARIANTS, default="UNC")
    p.add_argument("--user", required=True)
    p.add_argument("--top", type=int, default=10)
    _add_ppr(p)

    p = sub.add_parser("evaluate", help="UPL protocol with NDCG@N")
    _add_source(p)
    p.add_argument("--upl", type=_int_list, default=[10], help="comma-separated UPL values")
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variants", type=_variant_list, default=list(VARIANTS))
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--candidate-mode", choices=("test", "catalog"), default="test")
    p.add_argument("--gain", choices=("standard", "literal"), default="standard")
    p.add_argument("--results", help="tab-separated results table (default: stdout)")
    p.add_argument("--report", help="line-delimited JSON report with per-sample detail")
    _add_ppr(p)

    p = sub.add_parser("verify", help="brute-force check of projections on a small graph")
    _add_source(p)
    p.add_argument("--variants", type=_variant_list, default=["UNC", "PNC", "RNC"])
    p.add_argument("--max-len", type=int, default=9)
    p.add_argument("--max-users", type=int, default=6, help="bound on users taken from a real dataset")
    p.add_argument("--max-items", type=int, default=6, help="bound on items taken from a real dataset")
    return parser


def read_config(path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CLIError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        config = read_config(args.config)
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(config) - known)
        if unknown:
            parser.error(f"unknown option(s) in {args.config}: {', '.join(unknown)}")
        subparser.set_defaults(**config)
        args = parser.parse_args(argv)
    return args


def load_source(args) -> object:
    chosen = [k for k in ("ratings", "dataset", "fixture") if getattr(args, k, None)]
    if len(chosen) != 1:
        raise CLIError("give exactly one of --ratings, --dataset, --fixture")
    if args.fixture:
        return fixture(args.fixture)
    if args.ratings:
        return read_ratings(args.ratings)
    return ingest(DatasetDescriptor(args.format, Path(args.dataset), scale=args.scale))


def _ppr(args) -> PPRConfig:
    return PPRConfig(alpha=args.alpha, iterations=args.iterations, epsilon=args.epsilon)


def cmd_ingest(args) -> int:
    frame = load_source(args)
    write_ratings(frame, args.output)
    print(f"{len(frame)} ratings, {frame['user'].nunique()} users, {frame['item'].nunique()} items -> {args.output}")
    return 0


def _metapaths(text: str) -> list[str]:
    paths = []
    for tok in text.split(","):
        e = parse_description(tok.strip())
        if not isinstance(e, Seq):
            raise MetaPathError(f"{tok.strip()!r} is not a single meta-path")
        paths.append(e.types)
    return paths


def _seen(frame) -> dict[str, list]:
    return {str(u): sorted(g["item"].tolist(), key=str) for u, g in frame.groupby("user", sort=True)}


def cmd_build(args) -> int:
    frame = load_source(args)
    tpg = build_tpg(preference_frame(frame))
    if args.metapaths:
        graph = project(tpg, _metapaths(args.metapaths))
    else:
        graph = build_variant(tpg, args.variant)
    save_graph(args.output, graph, extra={"seen": _seen(frame), "catalog": sorted(frame["item"].unique().tolist(), key=str)})
    print(
        f"{graph.variant} graph over {'/'.join(graph.kinds)}: {graph.n_nodes} nodes, {graph.n_edges} edges, "
        f"{int(graph.dangling.sum())} dangling -> {args.output}"
    )
    if args.describe:
        coo = graph.matrix.tocoo()
        for r, c, w in sorted(zip(coo.row, coo.col, coo.data)):
            print(f"{_roster_label(graph, r)}\t{_roster_label(graph, c)}\t{w:.6g}")
    return 0


def _roster_label(graph, node: int) -> str:
    kind, k = graph.locate(int(node))
    if kind == "U":
        return str(graph.users[k])
    if kind == "R":
        return f"{graph.items[k // 2]}_{'du'[k % 2]}"
    return f"{graph.items[graph.pref_loser[k]]}<{graph.items[graph.pref_winner[k]]}"


def cmd_recommend(args) -> int:
    if args.graph:
        if any(getattr(args, k) for k in ("ratings", "dataset", "fixture")):
            raise CLIError("--graph cannot be combined with a rating source")
        graph, extra = load_snapshot(args.graph)
    else:
        frame = load_source(args)
        graph = build_variant(build_tpg(preference_frame(frame)), args.variant)
        extra = {"seen": _seen(frame)}
    by_str = {str(u): u for u in graph.users}
    if args.user not in by_str:
        raise CLIError(f"user {args.user!r} is not in the graph")
    user = by_str[args.user]
    seen = extra.get("seen", {}).get(args.user, [])
    recs = recommend(graph, user, args.top, training_items=seen, cfg=_ppr(args))
    print("rank\titem\tscore")
    for pos, (item, score) in enumerate(recs, 1):
        print(f"{pos}\t{item}\t{score:.10g}")
    return 0


def cmd_evaluate(args) -> int:
    frame = load_source(args)
    reports = run_experiment(
        frame,
        variants=args.variants,
        upls=args.upl,
        samples=args.samples,
        seed=args.seed,
        cfg=_ppr(args),
        top_n=args.top,
        candidate_mode=args.candidate_mode,
        gain=args.gain,
    )
    lines = ["variant\tupl\tmean\tstd\tusers\tseconds_per_user"]
    for r in reports:
        users = min(r.users) if r.users else 0
        lines.append(f"{r.variant}\t{r.upl}\t{r.mean:.4f}\t{r.std:.4f}\t{users}\t{r.mean_seconds_per_user:.6f}")
    table = "\n".join(lines) + "\n"
    if args.results:
        Path(args.results).write_text(table)
    else:
        sys.stdout.write(table)
    if args.report:
        write_report(args.report, reports, args)
    return 0


REPORT_CONFIG_KEYS = (
    "dataset", "ratings", "fixture", "format", "upl", "samples", "seed", "variants",
    "top", "candidate_mode", "gain", "alpha", "iterations", "epsilon",
)


def write_report(path, reports, args) -> None:
    """Line-delimited JSON: one ``config`` record, then ``sample`` and ``summary`` records.

    Wall-clock figures stay in the results table so that identical runs write identical reports.
    """
    config = {k: getattr(args, k, None) for k in REPORT_CONFIG_KEYS}
    records = [{"record": "config", **config}]
    for r in reports:
        for k, (ndcg, seed, users, skipped) in enumerate(zip(r.ndcg, r.seeds, r.users, r.skipped)):
            records.append({
                "record": "sample", "variant": r.variant, "upl": r.upl, "sample": k,
                "seed": seed, "ndcg": ndcg, "users": users, "skipped": skipped,
            })
        records.append({
            "record": "summary", "variant": r.variant, "upl": r.upl,
            "mean": r.mean, "std": r.std, "samples": len(r.ndcg),
        })
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, default=str) + "\n")


def cmd_verify(args) -> int:
    frame = load_source(args)
    if not args.fixture:
        users = sorted(frame["user"].unique().tolist())[: args.max_users]
        frame = frame[frame["user"].isin(users)]
        items = frame["item"].value_counts().sort_index(kind="stable")
        keep = items.sort_values(ascending=False, kind="stable").index[: args.max_items]
        frame = frame[frame["item"].isin(keep)]
    prefs = preference_frame(frame)
    tpg = build_tpg(prefs) if len(prefs) else None
    failed = False
    for v in args.variants:
        report = verify_projection(tpg, v, args.max_len)
        print(report.summary())
        failed |= not report.passed
    return 1 if failed else 0


COMMANDS = {
    "ingest": cmd_ingest,
    "build": cmd_build,
    "recommend": cmd_recommend,
    "evaluate": cmd_evaluate,
    "verify": cmd_verify,
}


def _configure_logging(verbose: int) -> None:
    # bound to the current stderr on every call, independent of any root handlers
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    _log.handlers[:] = [handler]
    _log.propagate = False
    _log.setLevel(logging.DEBUG if verbose else logging.INFO)


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except CLIError as e:
        print(f"regrank: error: {e}", file=sys.stderr)
        return 2
    _configure_logging(args.verbose)
    _log.info("resolved configuration: %s", json.dumps(vars(args), sort_keys=True, default=str))
    try:
        return COMMANDS[args.command](args)
    except (CLIError, EvaluationError, ValueError, KeyError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"regrank: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
