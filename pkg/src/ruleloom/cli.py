"""Command-line umbrella: generate, train, detect, evaluate, and poke at
internals (synthesis, similarity, noise, sweeps, benchmarks).

Every subcommand exits 0 on success and 2 on validation problems (bad
flags, malformed files, inconsistent inputs).  A JSON config file can
predefine any flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from .datagen import (
    GeneratorError,
    bench_fixture,
    bench_type_config,
    generate,
    perturb,
    reference_dataset,
    synthetic_spec,
)
from .detection import (
    RulesetFormatError,
    load_ruleset,
    match_events_timed,
    run_detection,
    save_ruleset,
    validate_ruleset,
)
from .events import (
    EventIngestionError,
    TypeConfig,
    read_events,
    write_jsonl,
)
from .hypergraph import GraphError, build_from_events
from .metrics import MetricsError, evaluate
from .patterns import PatternError, parse
from .similarity import DEFAULT_MERGE_THRESHOLD, SimParams, sim_matrix, candidate_pairs
from .synthesis import merge_regex_detailed
from .training import TrainConfig, TrainingError, train

_USER_ERRORS = (
    EventIngestionError,
    PatternError,
    GraphError,
    TrainingError,
    RulesetFormatError,
    MetricsError,
    GeneratorError,
    ValueError,
    OSError,
)


def _print_json(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2))


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def _write_lines(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def _sim_params(args) -> SimParams:
    return SimParams(
        decay_factor=args.decay,
        iterations=args.iters_k,
        merge_threshold=args.threshold,
        sample_count=args.samples,
        rng_seed=args.seed,
    )


def _load_types(path: str | None) -> TypeConfig | None:
    return TypeConfig.load(path) if path else None


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    if args.preset == "bench":
        ruleset, lines = bench_fixture(seed=args.seed, event_count=args.event_count)
        save_ruleset(ruleset, os.path.join(args.out_dir, "ruleset.json"))
        _write_lines(os.path.join(args.out_dir, "events.jsonl"), lines)
        bench_type_config().dump(os.path.join(args.out_dir, "types.json"))
        _print_json({"preset": "bench", "rules": len(ruleset.rules), "events": len(lines)})
        return 0
    if args.preset in ("reference", "motivating"):
        train_docs, test_docs, types = reference_dataset()
    else:
        spec = synthetic_spec(
            seed=args.seed,
            train_count=args.train_count,
            test_count=args.test_count,
            anomaly_fraction=args.anomaly_fraction,
            probe_fraction=args.probe_fraction,
        )
        train_docs, test_docs, types = generate(spec)
    write_jsonl(os.path.join(args.out_dir, "train.jsonl"), train_docs)
    write_jsonl(os.path.join(args.out_dir, "test.jsonl"), test_docs)
    types.dump(os.path.join(args.out_dir, "types.json"))
    _print_json(
        {"preset": args.preset, "train_events": len(train_docs), "test_events": len(test_docs)}
    )
    return 0


def cmd_train(args) -> int:
    types = _load_types(args.types)
    records = read_events(args.events, types)
    frozen = tuple(t for t in args.frozen_types.split(",") if t) if args.frozen_types else ()
    config = TrainConfig(
        sim=_sim_params(args),
        max_outer_iterations=args.max_rounds,
        pair_cap=args.pair_cap,
        frozen_types=frozen,
        verify_invariants=args.verify,
    )
    ruleset, report = train(records, config, type_config=types)
    save_ruleset(ruleset, args.out)
    _print_json(dict(report.to_dict(), rules=len(ruleset.rules), out=args.out))
    return 0


def cmd_detect(args) -> int:
    ruleset = load_ruleset(args.ruleset)
    types = _load_types(args.types)
    lines = _read_lines(args.events)
    results, counters = run_detection(ruleset, lines, types)
    _write_lines(args.out, [json.dumps(r.to_json_obj(), sort_keys=True) for r in results])
    _print_json(counters.to_dict())
    return 0


def cmd_eval(args) -> int:
    result_lines = _read_lines(args.results)
    label_lines = _read_lines(args.labels)
    if len(result_lines) != len(label_lines):
        raise MetricsError(
            f"results and labels must align: {len(result_lines)} vs {len(label_lines)}"
        )
    verdicts, labels = [], []
    skipped = 0
    for result_line, label_line in zip(result_lines, label_lines):
        verdict = json.loads(result_line).get("verdict")
        if verdict == "malformed":
            skipped += 1
            continue
        doc = json.loads(label_line)
        label = doc.get("_label")
        if label is None:
            raise MetricsError("label stream has an event without _label")
        verdicts.append(verdict)
        labels.append(label)
    metrics = evaluate(verdicts, labels)
    _print_json(dict(metrics.to_dict(), skipped_malformed=skipped))
    return 0


def cmd_perturb(args) -> int:
    lines = _read_lines(args.events)
    noised = perturb(lines, args.mode, args.level, args.seed)
    _write_lines(args.out, noised)
    _print_json({"mode": args.mode, "level": args.level, "in": len(lines), "out": len(noised)})
    return 0


def _sweep_cell(task: tuple) -> dict:
    events_path, test_path, types_path, k, threshold, decay, samples, seed = task
    types = _load_types(types_path)
    records = read_events(events_path, types)
    config = TrainConfig(
        sim=SimParams(
            decay_factor=decay,
            iterations=k,
            merge_threshold=threshold,
            sample_count=samples,
            rng_seed=seed,
        )
    )
    started = time.perf_counter()
    ruleset, _ = train(records, config, type_config=types)
    train_s = time.perf_counter() - started
    lines = _read_lines(test_path)
    results, _ = run_detection(ruleset, lines, types)
    labels = [json.loads(line)["_label"] for line in lines]
    verdicts = [r.verdict for r in results]
    metrics = evaluate(verdicts, labels)
    return dict(
        metrics.to_dict(),
        k=k,
        threshold=threshold,
        rules=len(ruleset.rules),
        train_s=round(train_s, 4),
    )


_SWEEP_COLUMNS = (
    "k", "threshold", "rules", "tp", "fp", "fn", "tn",
    "precision", "recall", "f1", "train_s",
)


def cmd_sweep(args) -> int:
    k_values = [int(v) for v in args.k_values.split(",") if v]
    thresholds = [float(v) for v in args.thresholds.split(",") if v]
    if not k_values or not thresholds:
        raise ValueError("sweep needs at least one k and one threshold")
    tasks = [
        (args.events, args.test, args.types, k, threshold, args.decay, args.samples, args.seed)
        for k in k_values
        for threshold in thresholds
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_cell, tasks))
    else:
        rows = [_sweep_cell(task) for task in tasks]
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_SWEEP_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    # Recall should not grow as the threshold rises (fewer merges, narrower
    # rules); report the observed trend per k rather than enforcing it.
    trends = {}
    for k in k_values:
        recalls = [row["recall"] for row in rows if row["k"] == k]
        ordered = [r for _, r in sorted(zip(thresholds, recalls))]
        trends[str(k)] = all(a >= b for a, b in zip(ordered, ordered[1:]))
    _print_json({"cells": len(rows), "out": args.out, "recall_non_increasing": trends})
    return 0


def cmd_bench(args) -> int:
    ruleset = load_ruleset(args.ruleset)
    types = _load_types(args.types) or ruleset.types
    lines = _read_lines(args.events)
    total_bytes = sum(len(line.encode("utf-8")) for line in lines)
    report: dict = {"events": len(lines), "bytes": total_bytes, "workers": args.workers}

    if not args.match_only:
        started = time.perf_counter()
        if args.workers > 1:
            chunk = (len(lines) + args.workers - 1) // args.workers
            tasks = [
                (args.ruleset, args.types, lines[i : i + chunk])
                for i in range(0, len(lines), chunk)
            ]
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                parts = list(pool.map(_bench_worker, tasks))
            wall = time.perf_counter() - started
            counts = {
                key: sum(part[key] for part in parts)
                for key in ("total", "normal", "anomalous", "malformed")
            }
        else:
            _, counters = run_detection(ruleset, lines, types)
            wall = time.perf_counter() - started
            counts = {k: v for k, v in counters.to_dict().items() if isinstance(v, int)}
        report["including_parse"] = dict(
            counts,
            wall_time_s=wall,
            events_per_s=len(lines) / wall if wall else 0.0,
            mb_per_s=total_bytes / wall / 1e6 if wall else 0.0,
        )

    records = read_events(args.events, types)
    counters = match_events_timed(ruleset, records)
    wall = counters.wall_time_s
    report["match_only"] = dict(
        {k: v for k, v in counters.to_dict().items() if isinstance(v, int)},
        wall_time_s=wall,
        events_per_s=len(records) / wall if wall else 0.0,
        mb_per_s=total_bytes / wall / 1e6 if wall else 0.0,
    )
    _print_json(report)
    return 0


def _bench_worker(task: tuple) -> dict:
    ruleset_path, types_path, lines = task
    ruleset = load_ruleset(ruleset_path)
    types = _load_types(types_path) or ruleset.types
    _, counters = run_detection(ruleset, lines, types)
    return counters.to_dict()


def cmd_synth(args) -> int:
    with open(args.request, encoding="utf-8") as fh:
        request = json.load(fh)
    positives = [parse(p) for p in request.get("positives", ())]
    if len(positives) != 2:
        raise ValueError("synthesis request needs exactly two positives")
    negatives = tuple(parse(p) for p in request.get("negatives", ()))
    outcome = merge_regex_detailed(positives[0], positives[1], negatives)
    _print_json(
        {
            "result": outcome.result.rendered if outcome.result else None,
            "candidates": [
                {
                    "pattern": c.pattern.rendered,
                    "node_count": c.cost.node_count,
                    "log_word_count": c.cost.log_word_count,
                    "scalar": c.cost.scalar,
                    "valid": c.valid,
                }
                for c in outcome.candidates
            ],
        }
    )
    return 0


def cmd_simdump(args) -> int:
    types = _load_types(args.types)
    records = read_events(args.events, types)
    graph = build_from_events(records)
    sim = sim_matrix(graph, _sim_params(args))
    pairs = candidate_pairs(graph, sim)[: args.top]
    _print_json(
        [
            {
                "key": graph.vertex(v1).key,
                "type": graph.vertex(v1).type,
                "left": graph.vertex(v1).rendered,
                "right": graph.vertex(v2).rendered,
                "score": score,
            }
            for score, v1, v2 in pairs
        ]
    )
    return 0


def cmd_validate(args) -> int:
    ruleset = load_ruleset(args.ruleset)
    violations = validate_ruleset(ruleset)
    _print_json({"rules": len(ruleset.rules), "overlaps": [list(v) for v in violations]})
    return 0 if not violations else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--decay", type=float, default=0.8, help="similarity decay factor")
    p.add_argument("--iters-k", type=int, default=4, help="similarity iterations")
    p.add_argument("--threshold", type=float, default=DEFAULT_MERGE_THRESHOLD,
                   help="merge threshold")
    p.add_argument("--samples", type=int, default=32, help="language sample count")
    p.add_argument("--seed", type=int, default=0, help="rng seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruleloom",
        description="learn regex rulesets from event logs and flag the events they reject",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("gen", help="generate seeded corpora and fixtures")
    p.add_argument(
        "--preset",
        choices=("reference", "motivating", "synthetic", "bench"),
        default="synthetic",
        help="'motivating' is an alias for the twelve-event reference scenario",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-count", type=int, default=50_000)
    p.add_argument("--test-count", type=int, default=5_000)
    p.add_argument("--anomaly-fraction", type=float, default=0.1)
    p.add_argument("--probe-fraction", type=float, default=0.1)
    p.add_argument("--event-count", type=int, default=20_000, help="bench preset event count")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="learn a ruleset from JSONL events")
    p.add_argument("--events", required=True)
    p.add_argument("--types", default=None)
    _add_sim_flags(p)
    p.add_argument("--frozen-types", default="EventName",
                   help="comma-separated types never merged")
    p.add_argument("--max-rounds", type=int, default=50)
    p.add_argument("--pair-cap", type=int, default=10_000)
    p.add_argument("--verify", action="store_true",
                   help="re-check edge uniqueness after every commit")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="classify JSONL events against a ruleset")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--types", default=None, help="override the embedded type config")
    p.add_argument("--out", required=True)
    p.add_argument("--single-core", action="store_true",
                   help="force single-threaded matching (the default)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score detection results against labels")
    p.add_argument("--results", required=True)
    p.add_argument("--labels", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("perturb", help="noise a JSONL stream")
    p.add_argument("--events", required=True)
    p.add_argument("--mode", choices=("drop", "duplicate", "shuffle"), required=True)
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("sweep", help="grid over iterations and threshold")
    p.add_argument("--events", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--types", default=None)
    p.add_argument("--k-values", default="3,4,5")
    p.add_argument("--thresholds", default="0.05,0.063,0.08")
    p.add_argument("--decay", type=float, default=0.8)
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="measure matching throughput")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--types", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--match-only", action="store_true",
                   help="skip the parse-inclusive measurement")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="merge two patterns against negatives")
    p.add_argument("--request", required=True,
                   help="JSON file with positives (2) and negatives lists")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simdump", help="dump the top similar entity pairs")
    p.add_argument("--events", required=True)
    p.add_argument("--types", default=None)
    _add_sim_flags(p)
    p.add_argument("--top", type=int, default=20)
    p.set_defaults(func=cmd_simdump)

    p = sub.add_parser("validate", help="check a ruleset for overlapping rules")
    p.add_argument("--ruleset", required=True)
    p.set_defaults(func=cmd_validate)

    for sp in sub.choices.values():
        sp.add_argument("--config", default=None, help="JSON file of flag defaults")

    return parser


def _scan_config(argv: list[str]) -> str | None:
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def _subcommand_parsers(parser: argparse.ArgumentParser) -> list[argparse.ArgumentParser]:
    return list(parser._subparsers._group_actions[0].choices.values())  # type: ignore[union-attr]


def _apply_config(parser: argparse.ArgumentParser, overrides: dict) -> None:
    mapped = {key.replace("-", "_"): value for key, value in overrides.items()}
    known = {
        action.dest
        for sp in _subcommand_parsers(parser)
        for action in sp._actions
    }
    unknown = set(mapped) - known
    if unknown:
        raise ValueError(f"config keys match no flag: {sorted(unknown)}")
    # Subcommands parse into a fresh namespace, so defaults must land on the
    # subparsers themselves; a config-supplied value also satisfies a
    # required flag.
    for sp in _subcommand_parsers(parser):
        dests = {action.dest for action in sp._actions}
        sp.set_defaults(**{k: v for k, v in mapped.items() if k in dests})
        for action in sp._actions:
            if action.dest in mapped:
                action.required = False


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    config_path = _scan_config(argv)
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                overrides = json.load(fh)
            if not isinstance(overrides, dict):
                raise ValueError("config file must hold a JSON object")
            _apply_config(parser, overrides)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
