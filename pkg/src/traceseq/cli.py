"""Command-line front end: ingest -> preprocess -> engine -> files.

Every subcommand prints one JSON summary line on stdout. Exit codes: 0 on
success, 2 on bad input or configuration, 3 when an estimator fails
numerically. Set TRACESEQ_LOG_LEVEL (DEBUG, INFO, ...) for logging on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import hmm, network, procmine, survival
from ._io import fmt, write_csv, write_text
from .config import RunConfig, load_config
from .embed import SgnsConfig, load_text, project_2d, sequence_tokens, train, trajectory_metrics
from .embed.tokens import split_token
from .errors import EmptyInput, EmptyTrajectory, NumericalError, TraceSeqError
from .ingest import format_timestamp, read_many, write_events
from .model import Lexicon, LexiconMode, symbols_of
from .preprocess import length_bounds, percentile_filter, sessionize_all, split_daily
from .seqanalysis import cluster_users, distance_matrix, mine_motifs
from .synth import SynthConfig, desk_config, generate

log = logging.getLogger("traceseq")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
LOG_ENV = "TRACESEQ_LOG_LEVEL"


def _load(args):
    sequences, report = read_many(args.inputs, args.format)
    if not sequences:
        raise EmptyInput("no valid events in input")
    return sequences, report


def _outdir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _session_lists(sequences, cfg: RunConfig, level: str = "activity"):
    by_user = sessionize_all(sequences, cfg.window, level)
    return [(u, by_user[u]) for u in sorted(by_user) if by_user[u]]


def cmd_synth(args, cfg: RunConfig) -> dict:
    if args.full:
        scfg = SynthConfig(seed=cfg.seed)
    else:
        scfg = desk_config(args.users, args.median_length, cfg.seed)
    sequences = generate(scfg)
    n = write_events(sequences, args.out, args.format)
    return {"outputs": [str(args.out)], "users": len(sequences), "events": n}


def cmd_ingest(args, cfg: RunConfig) -> dict:
    sequences, report = _load(args)
    outputs = []
    if args.out:
        write_events(sequences, args.out)
        outputs.append(str(args.out))
    if args.report:
        write_text(args.report, json.dumps(report.to_dict(), indent=2) + "\n")
        outputs.append(str(args.report))
    return {"outputs": outputs, "users": report.users, "rows_read": report.rows_read,
            "rows_rejected": report.rows_rejected}


def cmd_report(args, cfg: RunConfig) -> dict:
    _, report = _load(args)
    summary = report.to_dict()
    if args.out:
        write_text(args.out, json.dumps(summary, indent=2) + "\n")
        summary["outputs"] = [str(args.out)]
    return summary


def cmd_sessions(args, cfg: RunConfig) -> dict:
    sequences, _ = _load(args)
    lists = _session_lists(sequences, cfg, args.level)
    rows = ([s.user_id, s.platform, s.activity or "", format_timestamp(s.start), format_timestamp(s.end), s.count]
            for _, ss in lists for s in ss)
    write_csv(args.out, ["user_id", "platform", "activity", "start", "end", "count"], rows)
    return {"outputs": [str(args.out)], "users": len(lists), "sessions": sum(len(ss) for _, ss in lists)}


def _analysis_subset(sequences, cfg: RunConfig):
    """Session lists whose lengths fall inside the configured percentile band."""
    lists = _session_lists(sequences, cfg)
    lo, hi = length_bounds([len(ss) for _, ss in lists], cfg.seq_lo, cfg.seq_hi)
    return [(u, ss) for u, ss in lists if lo <= len(ss) <= hi]


def cmd_motifs(args, cfg: RunConfig) -> dict:
    sequences, _ = _load(args)
    subset = _analysis_subset(sequences, cfg)
    table = mine_motifs([symbols_of(ss) for _, ss in subset], cfg.orders, cfg.alpha)
    table.to_csv(args.out)
    return {"outputs": [str(args.out)], "users": len(subset), "ngrams": len(table.rows),
            "significant": len(table.significant())}


def cmd_cluster(args, cfg: RunConfig) -> dict:
    sequences, _ = _load(args)
    subset = _analysis_subset(sequences, cfg)
    users = [u for u, _ in subset]
    symbols = [symbols_of(ss) for _, ss in subset]
    k = cfg.clusters
    if k > len(users):
        log.warning("only %d users in the analysis subset; using k=%d instead of %d", len(users), len(users), k)
        k = len(users)
    dist = distance_matrix(symbols)
    result = cluster_users(dist, k)
    out = _outdir(args.out)
    write_csv(out / "distances.csv", ["user_id", *users], ([u, *(fmt(x) for x in row)] for u, row in zip(users, dist)))
    write_csv(out / "clusters.csv", ["user_id", "cluster", "length"],
              ([u, int(c), len(s)] for u, c, s in zip(users, result.labels, symbols)))
    # sequence-index plot data: one row per session, users grouped by cluster
    order = sorted(range(len(users)), key=lambda i: (int(result.labels[i]), users[i]))
    write_csv(out / "index.csv", ["user_id", "cluster", "position", "symbol", "start", "end"],
              ([users[i], int(result.labels[i]), j, s.symbol, format_timestamp(s.start), format_timestamp(s.end)]
               for i in order for j, s in enumerate(subset[i][1])))
    files = [str(out / f) for f in ("distances.csv", "clusters.csv", "index.csv")]
    return {"outputs": files, "users": len(users), "clusters": result.n_clusters}


def cmd_survival(args, cfg: RunConfig) -> dict:
    sequences, _ = _load(args)
    by_user = sessionize_all(sequences, cfg.window, "platform")
    records = survival.build_durations(by_user, cfg.single_platform)
    if not records:
        raise EmptyInput("no duration records")
    out = _outdir(args.out)
    files = []
    for platform, curve in survival.kaplan_meier(records).items():
        path = out / f"km_{platform}.csv"
        curve.to_csv(path)
        files.append(str(path))
    fit = survival.cox_fit(records, cfg.baseline)
    fit.to_csv(out / "cox.csv")
    files.append(str(out / "cox.csv"))
    return {"outputs": files, "records": len(records), "events": fit.n_events, "converged": fit.converged,
            "coef": dict(zip(fit.covariates, map(float, fit.coef)))}


def cmd_hmm(args, cfg: RunConfig) -> dict:
    sequences, _ = _load(args)
    daily = [day for s in sequences for _, day in split_daily(s)]
    daily = percentile_filter(daily, cfg.hmm_lo, cfg.hmm_hi)
    lexicon = Lexicon.from_sequences(daily, LexiconMode.PLATFORM_ACTIVITY)
    encoded = [lexicon.encode_events(d) for d in daily]
    sel = hmm.select_states(encoded, range(cfg.k_min, cfg.k_max + 1), len(lexicon), cfg.seed, cfg.restarts,
                            cfg.hmm_tol, cfg.hmm_max_iter)
    model = sel.models[sel.chosen]
    out = _outdir(args.out)
    sel.to_csv(out / "selection.csv")
    model.to_json(out / "model.json", lexicon.labels)
    states = [f"S{i}" for i in range(model.n_states)]
    write_csv(out / "transitions.csv", ["from", *states],
              ([s, *(fmt(x) for x in row)] for s, row in zip(states, model.transmat)))
    write_csv(out / "emissions.csv", ["state", *lexicon.labels],
              ([s, *(fmt(x) for x in row)] for s, row in zip(states, model.emissionprob)))
    files = [str(out / f) for f in ("selection.csv", "model.json", "transitions.csv", "emissions.csv")]
    return {"outputs": files, "sequences": len(encoded), "symbols": len(lexicon), "chosen_k": sel.chosen,
            "aic_k": sel.aic_choice}


def cmd_network(args, cfg: RunConfig) -> dict:
    sequences, _ = _load(args)
    lists = [ss for _, ss in _session_lists(sequences, cfg)]
    graph = network.build_graph(lists, args.level)
    comms = network.communities(graph)
    cent = network.centralities(graph)
    out = _outdir(args.out)
    graph.to_edge_csv(out / "edges.csv")
    write_csv(out / "centrality.csv", ["node", "in_strength", "out_strength", "closeness", "closeness_kind",
                                       "reachable", "community"],
              ([v, fmt(c.in_strength), fmt(c.out_strength), fmt(c.closeness), c.closeness_kind, c.reachable,
                int(lab)] for (v, c), lab in zip(cent.items(), comms.labels)))
    graph.to_dot(out / "graph.dot", comms.partition())
    files = [str(out / f) for f in ("edges.csv", "centrality.csv", "graph.dot")]
    return {"outputs": files, "nodes": len(graph.nodes), "edges": len(graph.weights),
            "communities": int(comms.labels.max()) + 1, "modularity": comms.modularity}


def cmd_procmine(args, cfg: RunConfig) -> dict:
    sequences, _ = _load(args)
    cases = procmine.make_cases(dict(_session_lists(sequences, cfg)), daily=True)
    dfg = procmine.build_dfg(cases)
    variants = procmine.top_variants(cases, cfg.top_paths)
    out = _outdir(args.out)
    dfg.to_dot(out / "dfg.dot")
    write_csv(out / "dfg_edges.csv", ["src", "dst", "frequency", "mean_seconds"],
              ([a, b, e.frequency, fmt(e.mean_seconds)] for (a, b), e in sorted(dfg.edges.items())))
    procmine.transition_time_matrix(cases).to_csv(out / "transition_times.csv")
    variants.to_csv(out / "variants.csv")
    procmine.build_dfg(procmine.filter_cases(cases, variants)).to_dot(out / "top_paths.dot")
    files = [str(out / f) for f in ("dfg.dot", "dfg_edges.csv", "transition_times.csv", "variants.csv",
                                    "top_paths.dot")]
    return {"outputs": files, "cases": len(cases), "variants_covered": variants.covered}


def cmd_embed(args, cfg: RunConfig) -> dict:
    sequences, _ = _load(args)
    sentences = [sequence_tokens(s) for s in sequences]
    scfg = SgnsConfig(dim=cfg.dim, window=cfg.sgns_window, negatives=cfg.negatives, epochs=cfg.epochs,
                      learning_rate=cfg.learning_rate, min_count=cfg.min_count, seed=cfg.seed)
    space = train(sentences, scfg)
    out = _outdir(args.out)
    space.save_text(out / "vectors.txt")
    rows, empty = [], 0
    for seq, toks in zip(sequences, sentences):
        try:
            t = trajectory_metrics(space, toks, seq.user_id)
        except EmptyTrajectory:
            empty += 1
            continue
        rows.append([t.user_id, fmt(t.entropy), fmt(t.radius_of_gyration), t.n_tokens, t.n_dropped])
    write_csv(out / "trajectories.csv", ["user_id", "entropy_bits", "radius_of_gyration", "tokens", "dropped"], rows)
    files = [str(out / "vectors.txt"), str(out / "trajectories.csv")]
    if args.query:
        write_csv(out / "neighbors.csv", ["query", "rank", "token", "cosine"],
                  ([q, i + 1, t, fmt(c)] for q in args.query for i, (t, c) in enumerate(space.neighbors(q, 10))))
        files.append(str(out / "neighbors.csv"))
    return {"outputs": files, "vocabulary": len(space), "dim": space.dim, "users_without_tokens": empty,
            "heldout_loss": space.loss_history[-1] if space.loss_history else None}


def cmd_project(args, cfg: RunConfig) -> dict:
    tokens, vectors = load_text(args.vectors)
    method = args.method or cfg.projection
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        coords = project_2d(vectors, method, cfg.seed, cfg.perplexity, cfg.tsne_iter)
    for w in caught:
        log.warning("%s", w.message)
    write_csv(args.out, ["token", "x", "y", "platform", "activity"],
              ([t, fmt(x), fmt(y), *split_token(t)] for t, (x, y) in zip(tokens, coords)))
    return {"outputs": [str(args.out)], "points": len(tokens), "method": method}


COMMANDS = {
    "synth": cmd_synth, "ingest": cmd_ingest, "sessions": cmd_sessions, "motifs": cmd_motifs,
    "cluster": cmd_cluster, "survival": cmd_survival, "hmm": cmd_hmm, "network": cmd_network,
    "procmine": cmd_procmine, "embed": cmd_embed, "project": cmd_project, "report": cmd_report,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI file with a [traceseq] section")
    common.add_argument("--seed", type=int)
    common.add_argument("--window", type=float, help="session window in minutes")

    reader = _Parser(add_help=False)
    reader.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="PATH")
    reader.add_argument("--format", choices=["csv", "jsonl"])

    parser = _Parser(prog="traceseq", description="Sequence analytics for digital trace event logs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="write a seeded synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "jsonl"])
    p.add_argument("--users", type=int, default=100)
    p.add_argument("--median-length", type=float, default=400.0)
    p.add_argument("--full", action="store_true", help="full-size corpus with the reference dataset's shape")

    p = sub.add_parser("ingest", parents=[common, reader], help="validate and normalize event logs")
    p.add_argument("--out")
    p.add_argument("--report")

    p = sub.add_parser("report", parents=[common, reader], help="corpus summary statistics")
    p.add_argument("--out")

    p = sub.add_parser("sessions", parents=[common, reader], help="collapse events into sessions")
    p.add_argument("--out", required=True)
    p.add_argument("--level", choices=["activity", "platform"], default="activity")

    p = sub.add_parser("motifs", parents=[common, reader], help="significant n-gram motifs")
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--orders", help="comma-separated n-gram orders")

    p = sub.add_parser("cluster", parents=[common, reader], help="optimal-matching clustering of users")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--k", dest="clusters", type=int)

    p = sub.add_parser("survival", parents=[common, reader], help="Kaplan-Meier curves and Cox model")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--baseline")

    p = sub.add_parser("hmm", parents=[common, reader], help="hidden Markov model with BIC state selection")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--k-min", type=int)
    p.add_argument("--k-max", type=int)
    p.add_argument("--restarts", type=int)

    p = sub.add_parser("network", parents=[common, reader], help="transition network and communities")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--level", choices=["platform", "platform_activity"], default="platform_activity")

    p = sub.add_parser("procmine", parents=[common, reader], help="directly-follows graph and top paths")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--top", dest="top_paths", type=int)

    p = sub.add_parser("embed", parents=[common, reader], help="train event embeddings")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dim", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--min-count", type=int)
    p.add_argument("--query", nargs="*", help="tokens whose nearest neighbors to export")

    p = sub.add_parser("project", parents=[common], help="2D coordinates for trained vectors")
    p.add_argument("--vectors", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=["pca", "tsne"])
    return parser


def _configure_logging() -> None:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
        cfg = load_config(args.config, **overrides)
        summary = COMMANDS[args.command](args, cfg)
    except NumericalError as exc:
        return _fail(args.command, exc, EXIT_NUMERIC)
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail(args.command, exc, EXIT_NUMERIC)
    except (TraceSeqError, OSError) as exc:
        return _fail(args.command, exc, EXIT_INPUT)
    print(json.dumps({"command": args.command, "status": "ok", **summary}, default=_json_default))
    return EXIT_OK


def _fail(command: str, exc: Exception, code: int) -> int:
    print(f"traceseq {command}: {exc}", file=sys.stderr)
    print(json.dumps({"command": command, "status": "error", "error": type(exc).__name__, "message": str(exc)}))
    return code


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(type(x).__name__)


if __name__ == "__main__":
    sys.exit(main())
