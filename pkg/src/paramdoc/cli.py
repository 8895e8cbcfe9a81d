"""Command-line entry point for the whole toolkit.

One binary, one subcommand per pipeline stage. All randomness flows
from --seed, so identical invocations over identical inputs produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from . import abstraction, corpus as corpus_mod, index as index_mod, seq2seq
from .errors import ParamdocError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paramdoc",
        description="Parameter-level API documentation toolkit",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    parser.add_argument(
        "--format", choices=("text", "json"), default="text", help="output format"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_ingest = sub.add_parser("ingest", help="validate a corpus file")
    p_ingest.add_argument("--corpus", required=True)
    p_ingest.add_argument("--out", help="write the normalized corpus here")

    p_stats = sub.add_parser("stats", help="parameter dedup statistics and description consistency")
    p_stats.add_argument("--corpus", required=True)

    p_index = sub.add_parser("index", help="build and save the parameter index cache")
    p_index.add_argument("--corpus", required=True)
    p_index.add_argument("--out", required=True)

    p_rec = sub.add_parser("recommend", help="cross-document candidates for one parameter")
    p_rec.add_argument("--corpus", required=True)
    p_rec.add_argument("--api", required=True)
    p_rec.add_argument("--param", required=True)
    p_rec.add_argument("--k", type=int, default=5)

    p_train = sub.add_parser("train", help="train the description translator")
    p_train.add_argument("--pairs", required=True, help="api<TAB>param<TAB>description records")
    p_train.add_argument("--out", required=True, help="checkpoint path")
    p_train.add_argument("--epochs", type=int, default=500)
    p_train.add_argument("--learning-rate", type=float, default=0.1)
    p_train.add_argument("--hidden-dim", type=int, default=64)
    p_train.add_argument("--input-dim", type=int, default=32)
    p_train.add_argument("--loss-out", help="write the per-epoch loss series here")

    p_gen = sub.add_parser("generate", help="translate an api/param name into a description")
    p_gen.add_argument("--checkpoint", required=True)
    p_gen.add_argument("--api", required=True)
    p_gen.add_argument("--param", required=True)

    p_abs = sub.add_parser("abstract", help="mine value patterns from a request log")
    p_abs.add_argument("--log", required=True, help="api<TAB>param<TAB>value records")
    p_abs.add_argument("--out", required=True, help="directory for profile documents")
    p_abs.add_argument("--group-by", choices=("param", "api-param"), default="param")
    p_abs.add_argument("--shards", type=int, default=1)
    p_abs.add_argument("--candidate-cap", type=int, default=abstraction.DEFAULT_CANDIDATE_CAP)

    p_met = sub.add_parser("metrics", help="acceptance rate from an event log")
    p_met.add_argument("--events", required=True)
    p_met.add_argument("--from", dest="window_from")
    p_met.add_argument("--to", dest="window_to")
    p_met.add_argument("--bucket", choices=("weekly",))

    p_serve = sub.add_parser("serve", help="run the recommendation service")
    p_serve.add_argument("--config", help="JSON config file")
    p_serve.add_argument("--corpus")
    p_serve.add_argument("--checkpoint")
    p_serve.add_argument("--profiles")
    p_serve.add_argument("--event-log")
    p_serve.add_argument("--listen", help="host:port")
    return parser


def _read_corpus(path: str) -> corpus_mod.Corpus:
    if not os.path.exists(path):
        raise ParamdocError(f"corpus file not found: {path}")
    return corpus_mod.read_corpus_file(path)


def _emit(args, text_lines, payload) -> None:
    if args.format == "json":
        print(json.dumps(payload, ensure_ascii=False, indent=2))
    else:
        for line in text_lines:
            print(line)


def _cmd_ingest(args) -> int:
    loaded = _read_corpus(args.corpus)
    n_params = sum(len(s.parameters) for s in loaded)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(corpus_mod.serialize_corpus(loaded))
    _emit(
        args,
        [f"{len(loaded)} APIs, {n_params} parameters ok"],
        {"apis": len(loaded), "parameters": n_params, "digest": loaded.digest()},
    )
    return 0


def _cmd_stats(args) -> int:
    loaded = _read_corpus(args.corpus)
    if len(loaded) == 0:
        print("error: empty corpus", file=sys.stderr)
        return 1
    stats = corpus_mod.corpus_stats(loaded)
    built = index_mod.build_index(loaded)
    consistency = index_mod.consistency_report(built)
    ratio = stats.compression_ratio
    _emit(
        args,
        [
            f"parameter occurrences: {stats.total_parameter_occurrences}",
            f"unique parameter names: {stats.unique_parameter_names}",
            f"compression ratio: {'undefined' if ratio is None else f'{ratio:.6g}'}",
            f"description consistency: {'undefined' if consistency is None else f'{consistency:.6g}'}",
        ],
        {
            "total_parameter_occurrences": stats.total_parameter_occurrences,
            "unique_parameter_names": stats.unique_parameter_names,
            "compression_ratio": ratio,
            "description_consistency": consistency,
        },
    )
    return 0


def _cmd_index(args) -> int:
    loaded = _read_corpus(args.corpus)
    built = index_mod.build_index(loaded)
    index_mod.save_index(built, args.out)
    _emit(
        args,
        [f"indexed {len(built)} parameter names -> {args.out}"],
        {"names": len(built), "out": args.out, "corpus_digest": built.corpus_digest},
    )
    return 0


def _candidate_lines(cands) -> list[str]:
    lines = []
    for i, c in enumerate(cands, start=1):
        desc = c.description or "-"
        example = c.example or "-"
        src = ",".join(c.provenance) if c.provenance else "model"
        lines.append(f"{i}. [{c.score:.3f}] {desc} | example: {example} | from: {src}")
    return lines


def _cmd_recommend(args) -> int:
    loaded = _read_corpus(args.corpus)
    built = index_mod.build_index(loaded)
    cands = index_mod.recommend(built, args.api, args.param, k=args.k)
    payload = [
        {
            "kind": c.kind.value,
            "description": c.description,
            "example": c.example,
            "type": c.ptype,
            "required": c.required,
            "score": c.score,
            "provenance": list(c.provenance),
        }
        for c in cands
    ]
    _emit(args, _candidate_lines(cands) or ["no candidates"], payload)
    return 0


def _cmd_train(args) -> int:
    if not os.path.exists(args.pairs):
        raise ParamdocError(f"pair file not found: {args.pairs}")
    with open(args.pairs, encoding="utf-8") as fh:
        triples = seq2seq.read_pair_file(fh, source=args.pairs)
    if not triples:
        raise ParamdocError(f"no training pairs in {args.pairs}")
    vocab = seq2seq.build_vocab([x for t in triples for x in t])
    pairs = seq2seq.encode_pairs(triples, vocab)
    model = seq2seq.init_model(
        vocab, hidden_dim=args.hidden_dim, input_dim=args.input_dim, seed=args.seed
    )
    result = seq2seq.train(model, pairs, epochs=args.epochs, learning_rate=args.learning_rate)
    seq2seq.save_model(result.model, args.out)
    if args.loss_out:
        with open(args.loss_out, "w", encoding="utf-8") as fh:
            for loss in result.losses:
                fh.write(f"{loss!r}\n")
    final = result.losses[-1] if result.losses else float("nan")
    _emit(
        args,
        [f"trained {args.epochs} epochs, final loss {final:.6f} -> {args.out}"],
        {"epochs": args.epochs, "final_loss": final, "checkpoint": args.out},
    )
    return 0


def _cmd_generate(args) -> int:
    if not os.path.exists(args.checkpoint):
        raise ParamdocError(f"checkpoint not found: {args.checkpoint}")
    model = seq2seq.load_model(args.checkpoint)
    candidate = seq2seq.generate_description(model, args.api, args.param)
    _emit(
        args,
        [f"[{candidate.score:.3f}] {candidate.description}"],
        {"description": candidate.description, "score": candidate.score},
    )
    return 0


def _cmd_abstract(args) -> int:
    if not os.path.exists(args.log):
        raise ParamdocError(f"log file not found: {args.log}")
    if args.shards < 1:
        raise ParamdocError("--shards must be at least 1")
    with open(args.log, encoding="utf-8") as fh:
        records = abstraction.read_value_log(fh, source=args.log)
    groups = abstraction.group_values(records, by=args.group_by)
    os.makedirs(args.out, exist_ok=True)
    mapper = partial(abstraction.map_shard, candidate_cap=args.candidate_cap)
    written = []
    for key in sorted(groups):
        values = groups[key]
        shards = abstraction.split_shards(values, args.shards)
        if args.shards > 1 and len(shards) > 1:
            with ProcessPoolExecutor(max_workers=min(args.shards, os.cpu_count() or 1)) as pool:
                summaries = list(pool.map(mapper, shards))
        else:
            summaries = [mapper(shard) for shard in shards]
        merged = abstraction.ShardSummary.neutral()
        for summary in summaries:
            merged = abstraction.merge(merged, summary)
        profile = abstraction.finalize(merged, merged.total, candidate_cap=args.candidate_cap)
        safe_key = key.replace(os.sep, "_")
        out_path = os.path.join(args.out, f"{safe_key}.json")
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(abstraction.profile_to_document(profile))
        written.append({"group": key, "pattern": profile.parameter_pattern,
                        "rate": profile.rate, "path": out_path})
    _emit(
        args,
        [f"{w['group']}: pattern {w['pattern']} rate {w['rate']:.3f} -> {w['path']}" for w in written],
        written,
    )
    return 0


def _cmd_metrics(args) -> int:
    from .service import EventLog, acceptance_rate, parse_timestamp, per_kind_acceptance

    if not os.path.exists(args.events):
        raise ParamdocError(f"event log not found: {args.events}")
    log = EventLog(args.events)
    start = parse_timestamp(args.window_from) if args.window_from else None
    end = parse_timestamp(args.window_to) if args.window_to else None
    if start is not None and end is not None and end < start:
        raise ParamdocError("--to precedes --from")
    events = log.events()
    overall = acceptance_rate(events, window=(start, end))
    lines = [
        f"valid {overall.valid} / total {overall.total} "
        f"rate {'undefined' if overall.rate is None else f'{overall.rate:.4f}'}"
    ]
    payload = {"valid": overall.valid, "total": overall.total, "rate": overall.rate}
    payload["by_kind"] = {
        kind: {"valid": s.valid, "total": s.total, "rate": s.rate}
        for kind, s in per_kind_acceptance(events).items()
    }
    if args.bucket == "weekly":
        series = acceptance_rate(events, window=(start, end), bucket="weekly")
        payload["weekly"] = [
            {"week": week, "valid": s.valid, "total": s.total, "rate": s.rate}
            for week, s in series
        ]
        for week, s in series:
            rate = "undefined" if s.rate is None else f"{s.rate:.4f}"
            lines.append(f"{week}: {s.valid}/{s.total} rate {rate}")
    _emit(args, lines, payload)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import EventLog, ServiceState, create_app, load_profiles

    config = {}
    if args.config:
        if not os.path.exists(args.config):
            raise ParamdocError(f"config file not found: {args.config}")
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
    corpus_path = args.corpus or config.get("corpus")
    if not corpus_path:
        raise ParamdocError("serve needs --corpus or a config with a corpus path")
    loaded = _read_corpus(corpus_path)
    state = ServiceState(
        corpus=loaded,
        index=index_mod.build_index(loaded),
        events=EventLog(args.event_log or config.get("event_log")),
    )
    checkpoint = args.checkpoint or config.get("checkpoint")
    if checkpoint:
        state.model = seq2seq.load_model(checkpoint)
    profiles_dir = args.profiles or config.get("profiles")
    if profiles_dir:
        state.profiles = load_profiles(profiles_dir)
    listen = args.listen or config.get("listen", "127.0.0.1:8000")
    host, _, port = listen.partition(":")
    app = create_app(state)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="warning")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "stats": _cmd_stats,
    "index": _cmd_index,
    "recommend": _cmd_recommend,
    "train": _cmd_train,
    "generate": _cmd_generate,
    "abstract": _cmd_abstract,
    "metrics": _cmd_metrics,
    "serve": _cmd_serve,
}


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except ParamdocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
