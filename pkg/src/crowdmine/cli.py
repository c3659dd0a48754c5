"""Command-line entry point.

Exit status: 0 on success, 1 when verification fails (or an interactive
session ends early), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import CapExceeded, ConfigInvalid, CrowdMineError, SessionClosed
from .experiment import ExperimentConfig, records_to_csv, records_to_json, run_experiment
from .generators import gen_random_predicate, parse_generator_spec
from .io import (load_database, load_taxonomy, poset_to_dict, read_json, save_taxonomy,
                 save_transcript, taxonomy_to_dict, write_json)
from .itemsets import (DEFAULT_NODE_CAP, construct_itemset_taxonomy,
                       construct_k_itemset_taxonomy, mfis_from_predicate, miis_from_predicate)
from .miners import MINERS, known_borders, miner_name, run_miner
from .oracle import (InstrumentedOracle, OracleConfig, interactive_oracle, make_db_oracle,
                     make_predicate_oracle)
from .poset import AntichainCounter, chain_partition

EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


def _emit(doc, path: str | None):
    if path:
        write_json(path, doc)
    else:
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")


def _load_tax(path: str):
    try:
        return load_taxonomy(path)
    except FileNotFoundError:
        raise UsageError("--taxonomy", f"no such file {path!r}") from None
    except (ValueError, KeyError, json.JSONDecodeError, CrowdMineError) as exc:
        raise UsageError("--taxonomy", f"invalid taxonomy: {exc}") from None


def _target(tax, k: int | None, node_cap: int = DEFAULT_NODE_CAP):
    if k is not None:
        if k < 0:
            raise UsageError("--k", "must be non-negative")
        return construct_k_itemset_taxonomy(tax, k)
    return construct_itemset_taxonomy(tax, node_cap)


# -- subcommands ------------------------------------------------------------

def cmd_generate(args) -> int:
    specs = args.spec
    if len(specs) > 1 and not args.out_dir:
        raise UsageError("--out-dir", "required when generating several taxonomies")
    for spec in specs:
        try:
            tax = parse_generator_spec(spec)
        except ValueError as exc:
            raise UsageError("spec", str(exc)) from None
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            save_taxonomy(out / (spec.replace(":", "_") + ".json"), tax)
        elif args.output:
            save_taxonomy(args.output, tax)
        else:
            _emit(taxonomy_to_dict(tax), None)
    return EXIT_OK


def materialize_stats(target) -> dict:
    poset = target.as_poset
    chains = chain_partition(poset)
    stats = {"items": len(target.base), "nodes": len(poset), "cover_edges": len(poset.cover_edges),
             "width": len(chains), "longest_chain": max((len(c) for c in chains), default=0)}
    try:
        stats["solutions"] = AntichainCounter(poset)()
    except CapExceeded:
        stats["solutions"] = None
    return stats


def cmd_materialize(args) -> int:
    tax = _load_tax(args.taxonomy)
    if args.solutions and args.k is not None:
        raise UsageError("--solutions", "cannot be combined with --k")
    try:
        target = _target(tax, args.k, args.node_cap)
        stats = materialize_stats(target)
        if args.solutions:
            inner = construct_itemset_taxonomy(target.as_poset, args.node_cap)
            doc = poset_to_dict(inner.as_poset, stats)
        else:
            doc = poset_to_dict(target, stats)
    except CapExceeded as exc:
        raise UsageError("--node-cap", str(exc)) from None
    if args.output:
        write_json(args.output, doc)
    json.dump(stats, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _oracle_source(args, tax, target):
    chosen = [f for f in ("mfis", "database", "seed") if getattr(args, f) is not None]
    if len(chosen) != 1:
        raise UsageError("--mfis/--database/--seed", "give exactly one oracle source")
    if args.mfis is not None:
        try:
            mfis = [tuple(m) for m in json.loads(args.mfis)]
            return make_predicate_oracle(target, mfis)
        except (json.JSONDecodeError, TypeError) as exc:
            raise UsageError("--mfis", f"expected a JSON list of item lists: {exc}") from None
        except (CrowdMineError, KeyError) as exc:
            raise UsageError("--mfis", str(exc)) from None
    if args.seed is not None:
        return make_predicate_oracle(target, gen_random_predicate(target, args.seed))
    try:
        db, cfg = load_database(args.database, tax)
    except FileNotFoundError:
        raise UsageError("--database", f"no such file {args.database!r}") from None
    except (ValueError, KeyError, json.JSONDecodeError, CrowdMineError) as exc:
        raise UsageError("--database", str(exc)) from None
    if args.threshold is not None:
        try:
            cfg = OracleConfig.parse(args.threshold)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError("--threshold", str(exc)) from None
    if cfg is None:
        raise UsageError("--threshold", "the database file names no threshold")
    return make_db_oracle(db, tax, cfg)


def _check_miner(name: str, k):
    try:
        name = miner_name(name)
    except ValueError as exc:
        raise UsageError("--miner", str(exc)) from None
    if k is not None and name.startswith("alg1"):
        raise UsageError("--miner", "alg1 needs the full itemset taxonomy; drop --k")
    return name


def cmd_mine(args) -> int:
    tax = _load_tax(args.taxonomy)
    name = _check_miner(args.miner, args.k)
    if args.budget is not None and args.budget < 0:
        raise UsageError("--budget", "must be non-negative")
    target = _target(tax, args.k)
    inner = _oracle_source(args, tax, target)
    result = run_miner(name, target, InstrumentedOracle(inner, tax), budget=args.budget)
    status = EXIT_OK
    if args.verify and result.completed:
        truth = (list(mfis_from_predicate(target, inner)), list(miis_from_predicate(target, inner)))
        if (result.mfis, result.miis) != truth:
            print("verification failed: mined borders differ from ground truth", file=sys.stderr)
            status = EXIT_VERIFY
    _emit(result.to_dict(), args.output)
    return status


def cmd_bench(args) -> int:
    path = Path(args.config)
    if not path.is_file():
        raise UsageError("--config", f"no such file {args.config!r}")
    try:
        cfg = ExperimentConfig.from_dict(read_json(path), base_dir=path.parent)
        if args.workers is not None:
            cfg.workers = args.workers
            cfg.validate()
        records = run_experiment(cfg)
    except json.JSONDecodeError as exc:
        raise UsageError("--config", f"not valid JSON: {exc}") from None
    except (ConfigInvalid, FileNotFoundError) as exc:
        raise UsageError("--config", str(exc)) from None
    fmt = args.format or cfg.format
    output = args.output or cfg.output
    if fmt == "csv":
        text = records_to_csv(records)
        if output:
            Path(output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    else:
        _emit(records_to_json(records), output)
    failed = [r for r in records if r.failed]
    for r in failed:
        print(f"FAILED {r.taxonomy} {r.predicate} {r.miner}: borders_ok={r.borders_ok} "
              f"bounds={r.bound_satisfied}", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_interactive(args) -> int:
    tax = _load_tax(args.taxonomy)
    name = _check_miner(args.miner, args.k)
    target = _target(tax, args.k)
    human = interactive_oracle(tax, sys.stdin, sys.stdout)
    oracle = InstrumentedOracle(human, tax)
    status = EXIT_OK
    try:
        result = run_miner(name, target, oracle, budget=args.budget)
        doc = result.to_dict()
    except SessionClosed as exc:
        print("\nsession closed before mining finished; partial transcript kept", file=sys.stderr)
        doc = {"strategy": name, "completed": False, "crowd_queries": oracle.query_count,
               "transcript": [{"itemset": list(q), "answer": a} for q, a in oracle.transcript]}
        if exc.state is not None:
            mfis, miis = known_borders(exc.state)
            doc["mfis"] = [list(m) for m in mfis]
            doc["miis"] = [list(m) for m in miis]
        status = EXIT_VERIFY
    if args.transcript:
        save_transcript(args.transcript, human.records)
    if args.output:
        write_json(args.output, doc)
    else:
        print("MFIs:", "; ".join(", ".join(tax.label(i) for i in m) or "(empty)" for m in doc.get("mfis", [])))
        print("MIIs:", "; ".join(", ".join(tax.label(i) for i in m) or "(empty)" for m in doc.get("miis", [])))
        print(f"questions asked: {doc['crowd_queries']}")
    return status


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crowdmine",
                                     description="Taxonomy-aware frequent itemset mining by crowd queries.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write generated taxonomies")
    p.add_argument("spec", nargs="+", help="chain:N, flat:N, random:N:P:SEED, gamma:N or cycling")
    p.add_argument("-o", "--output", help="output file (single spec)")
    p.add_argument("--out-dir", help="directory for several specs")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("materialize", help="build an itemset taxonomy and report stats")
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--k", type=int, help="limit itemsets to size k")
    p.add_argument("--solutions", action="store_true", help="materialize the solution taxonomy")
    p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    p.add_argument("-o", "--output", help="write the poset document here")
    p.set_defaults(func=cmd_materialize)

    miners = ", ".join(MINERS)
    p = sub.add_parser("mine", help="mine one taxonomy against one oracle")
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--mfis", help='ground-truth MFIs as JSON, e.g. "[[3],[4]]"')
    p.add_argument("--database", help="transaction file")
    p.add_argument("--seed", type=int, help="random ground-truth predicate")
    p.add_argument("--threshold", help="support threshold p/q (overrides the database header)")
    p.add_argument("--miner", default="alg1", help=f"one of: alg1, {miners}")
    p.add_argument("--k", type=int)
    p.add_argument("--budget", type=int, help="query budget (greedy miner)")
    p.add_argument("--verify", action="store_true", help="check borders against ground truth")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("bench", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--workers", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("interactive", help="mine by asking a person y/n questions")
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--miner", default="alg1:minimal")
    p.add_argument("--k", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--transcript", help="save the question/answer transcript here")
    p.add_argument("-o", "--output", help="write the result JSON here")
    p.set_defaults(func=cmd_interactive)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"crowdmine {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
