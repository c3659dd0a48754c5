"""Benchmark runner: mine, re-verify against ground truth, check bounds.

A config is a JSON document mirroring :class:`ExperimentConfig`::

    {
      "taxonomies": ["chain:7", {"file": "psi1.json"}],
      "predicates": [{"mfis": [[3], [4]]}, {"seeds": [0, 1, 2]}],
      "miners": ["alg1:minimal", "halving", "chain"],
      "threshold": "1/2",
      "node_cap": 65536, "antichain_cap": 1048576, "budget": null,
      "output": "records.csv", "format": "csv", "workers": 1
    }

Taxonomy entries are generator specs or files; predicate entries are
explicit MFIs, random seeds, or transaction files.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import CapExceeded, ConfigInvalid, CrowdMineError
from .io import load_database, load_taxonomy
from .generators import gen_random_predicate, parse_generator_spec
from .itemsets import (DEFAULT_NODE_CAP, construct_itemset_taxonomy, construct_k_itemset_taxonomy,
                       mfis_from_predicate, miis_from_predicate)
from .miners import MINERS, MiningResult, miner_name, run_miner
from .oracle import InstrumentedOracle, OracleConfig, make_db_oracle, make_predicate_oracle
from .poset import DEFAULT_ANTICHAIN_CAP, AntichainCounter, Taxonomy, chain_partition

DELTA0 = 0.17
HALVING_SOLUTION_CAP = 2**16

CSV_COLUMNS = [
    "taxonomy", "predicate", "miner", "status", "items", "nodes", "width", "solutions",
    "mfis", "miis", "crowd_queries", "wall_time", "bound", "bound_satisfied", "borders_ok",
]


@dataclass
class ExperimentConfig:
    taxonomies: list = field(default_factory=list)
    predicates: list = field(default_factory=list)
    miners: list = field(default_factory=list)
    threshold: Fraction = Fraction(1, 2)
    node_cap: int = DEFAULT_NODE_CAP
    antichain_cap: int = DEFAULT_ANTICHAIN_CAP
    budget: int | None = None
    k: int | None = None
    output: str | None = None
    format: str = "json"
    workers: int = 1
    base_dir: Path = field(default_factory=Path.cwd)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.miners:
            raise ConfigInvalid("at least one miner is required")
        try:
            self.miners = [miner_name(m) for m in self.miners]
        except ValueError as exc:
            raise ConfigInvalid(str(exc)) from None
        if not self.taxonomies:
            raise ConfigInvalid("at least one taxonomy is required")
        if not self.predicates:
            raise ConfigInvalid("at least one predicate source is required")
        try:
            self.threshold = OracleConfig(Fraction(str(self.threshold))).threshold
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigInvalid(f"threshold: {exc}") from None
        for name in ("node_cap", "antichain_cap", "workers"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) <= 0:
                raise ConfigInvalid(f"{name} must be a positive integer")
        if self.budget is not None and (not isinstance(self.budget, int) or self.budget <= 0):
            raise ConfigInvalid("budget must be a positive integer")
        if self.k is not None:
            if not isinstance(self.k, int) or self.k < 0:
                raise ConfigInvalid("k must be a non-negative integer")
            if any(m.startswith("alg1") for m in self.miners):
                raise ConfigInvalid("alg1 miners need the full itemset taxonomy; drop k")
        if self.format not in ("json", "csv"):
            raise ConfigInvalid("format must be json or csv")

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigInvalid("config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__ if f != "base_dir"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {', '.join(sorted(unknown))}")
        kwargs = dict(doc)
        if base_dir is not None:
            kwargs["base_dir"] = Path(base_dir)
        return cls(**kwargs)


@dataclass
class ExperimentRecord:
    taxonomy: str
    predicate: str
    miner: str
    status: str = "ok"
    items: int = 0
    nodes: int = 0
    width: int = 0
    solutions: int | None = None
    mfis: int = 0
    miis: int = 0
    crowd_queries: int = 0
    wall_time: float = 0.0
    bounds: dict = field(default_factory=dict)
    bound_satisfied: dict = field(default_factory=dict)
    reported: dict = field(default_factory=dict)
    borders_ok: bool = True
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.status == "failed"

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self) -> dict:
        return {
            "taxonomy": self.taxonomy, "predicate": self.predicate, "miner": self.miner,
            "status": self.status, "items": self.items, "nodes": self.nodes, "width": self.width,
            "solutions": "" if self.solutions is None else self.solutions,
            "mfis": self.mfis, "miis": self.miis, "crowd_queries": self.crowd_queries,
            "wall_time": f"{self.wall_time:.6f}",
            "bound": ";".join(f"{k}={v}" for k, v in self.bounds.items()),
            "bound_satisfied": all(self.bound_satisfied.values()),
            "borders_ok": self.borders_ok,
        }


def halving_bound(solutions: int) -> int:
    if solutions <= 1:
        return 0
    return math.ceil(math.log(solutions) / math.log(1 / (1 - DELTA0)))


def miner_bounds(miner: str, n_items: int, n_mfis: int, n_miis: int, *, nodes: int,
                 solutions: int | None = None, width: int | None = None,
                 longest_chain: int | None = None) -> tuple[dict, dict]:
    """Asserted and merely reported query bounds for one miner run."""
    border = n_mfis + n_miis
    asserted, reported = {}, {}
    if miner.startswith("alg1"):
        asserted["alg1"] = n_items * border + border
        if miner == "alg1:minimal":
            asserted["alg1_minimal"] = n_miis + (n_items + 1) * n_mfis
        if miner == "alg1:dual":
            reported["alg1_dual"] = border + (n_items + 1) * min(n_mfis, n_miis) + n_items
    elif miner == "exhaustive":
        asserted["exhaustive"] = nodes
    elif miner == "halving":
        if solutions is not None:
            asserted["halving"] = halving_bound(solutions)
    elif miner == "chain":
        asserted["chain"] = width * math.ceil(math.log2(longest_chain + 1)) if width else 0
    elif miner == "greedy":
        asserted["greedy"] = nodes
    return asserted, reported


@dataclass
class _Case:
    tax_name: str
    tax: Taxonomy
    pred_name: str
    mfis: tuple | None = None
    db_path: Path | None = None


def _load_taxonomy_entry(entry, base_dir: Path) -> tuple[str, Taxonomy]:
    if isinstance(entry, dict):
        if "file" in entry:
            path = base_dir / entry["file"]
            return str(entry["file"]), load_taxonomy(path)
        if "generator" in entry:
            return entry["generator"], parse_generator_spec(entry["generator"])
        raise ConfigInvalid(f"taxonomy entry needs file or generator: {entry!r}")
    if isinstance(entry, str):
        path = base_dir / entry
        if path.is_file():
            return entry, load_taxonomy(path)
        try:
            return entry, parse_generator_spec(entry)
        except ValueError as exc:
            raise ConfigInvalid(f"taxonomy {entry!r} is neither a file nor a generator: {exc}") from None
    raise ConfigInvalid(f"bad taxonomy entry {entry!r}")


def _expand_cases(cfg: ExperimentConfig) -> list[_Case]:
    cases = []
    for entry in cfg.taxonomies:
        tax_name, tax = _load_taxonomy_entry(entry, cfg.base_dir)
        for pred in cfg.predicates:
            if not isinstance(pred, dict):
                raise ConfigInvalid(f"bad predicate entry {pred!r}")
            if "mfis" in pred:
                mfis = tuple(tuple(m) for m in pred["mfis"])
                cases.append(_Case(tax_name, tax, f"mfis={list(map(list, mfis))}", mfis=mfis))
            elif "seed" in pred or "seeds" in pred:
                seeds = pred.get("seeds", [pred.get("seed")])
                for seed in seeds:
                    cases.append(_Case(tax_name, tax, f"seed={seed}", mfis=("seed", seed)))
            elif "database" in pred:
                path = cfg.base_dir / pred["database"]
                if not path.is_file():
                    raise FileNotFoundError(path)
                cases.append(_Case(tax_name, tax, f"db={pred['database']}", db_path=path))
            else:
                raise ConfigInvalid(f"predicate entry needs mfis, seed(s) or database: {pred!r}")
    return cases


def _case_oracle(cfg: ExperimentConfig, case: _Case, target):
    if case.db_path is not None:
        db, file_cfg = load_database(case.db_path, case.tax)
        theta = file_cfg.threshold if file_cfg else cfg.threshold
        return make_db_oracle(db, case.tax, OracleConfig(theta))
    mfis = case.mfis
    if mfis and mfis[0] == "seed":
        mfis = gen_random_predicate(target, mfis[1])
    return make_predicate_oracle(target, mfis)


def _run_case(cfg: ExperimentConfig, case: _Case, miner: str, target, stats: dict) -> ExperimentRecord:
    rec = ExperimentRecord(case.tax_name, case.pred_name, miner, items=len(case.tax),
                           nodes=stats["nodes"], width=stats["width"], solutions=stats["solutions"])
    try:
        inner = _case_oracle(cfg, case, target)
    except CapExceeded:
        raise
    except (CrowdMineError, KeyError, ValueError) as exc:
        raise ConfigInvalid(f"predicate {case.pred_name} does not fit taxonomy {case.tax_name}: "
                            f"{type(exc).__name__} {exc}") from None
    try:
        truth_mfis = list(mfis_from_predicate(target, inner))
        truth_miis = list(miis_from_predicate(target, inner))
        oracle = InstrumentedOracle(inner, case.tax)
        if miner == "halving" and stats["solutions"] is None:
            rec.status = "skipped"
            rec.error = "too many candidate solutions for halving"
            return rec
        start = time.perf_counter()
        result: MiningResult = run_miner(miner, target, oracle, cap=cfg.antichain_cap, budget=cfg.budget)
        rec.wall_time = time.perf_counter() - start
    except CapExceeded as exc:
        rec.status = "skipped"
        rec.error = str(exc)
        return rec
    rec.mfis, rec.miis = len(truth_mfis), len(truth_miis)
    rec.crowd_queries = result.crowd_queries
    if result.completed:
        rec.borders_ok = result.mfis == truth_mfis and result.miis == truth_miis
        queried = result.queried
        rec.bound_satisfied["witness"] = all(m in queried for m in truth_mfis + truth_miis)
    else:
        # anytime run cut short: known borders must still be true borders
        rec.borders_ok = set(result.mfis) <= set(truth_mfis) and set(result.miis) <= set(truth_miis)
    asserted, reported = miner_bounds(
        miner, len(case.tax), len(truth_mfis), len(truth_miis), nodes=stats["nodes"],
        solutions=stats["solutions"], width=stats["width"], longest_chain=stats["longest_chain"])
    rec.bounds = asserted
    for name, value in asserted.items():
        rec.bound_satisfied[name] = result.crowd_queries <= value
    if miner == "chain":
        rec.bound_satisfied["chains_equal_width"] = result.info["chains"] == stats["width"]
    rec.reported = {name: {"value": v, "satisfied": result.crowd_queries <= v}
                    for name, v in reported.items()}
    if not rec.borders_ok or not all(rec.bound_satisfied.values()):
        rec.status = "failed"
    return rec


def _target_stats(cfg: ExperimentConfig, tax: Taxonomy):
    if cfg.k is not None:
        target = construct_k_itemset_taxonomy(tax, cfg.k)
    else:
        target = construct_itemset_taxonomy(tax, cfg.node_cap)
    poset = target.as_poset
    chains = chain_partition(poset)
    try:
        solutions = AntichainCounter(poset, cap=min(cfg.antichain_cap, HALVING_SOLUTION_CAP))()
    except CapExceeded:
        solutions = None
    return target, {"nodes": len(poset), "width": len(chains), "solutions": solutions,
                    "longest_chain": max((len(c) for c in chains), default=0)}


def run_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """One record per (taxonomy, predicate, miner), in config order."""
    cases = _expand_cases(cfg)
    prepared = {}
    jobs = []
    for case in cases:
        key = id(case.tax)
        if key not in prepared:
            prepared[key] = _target_stats(cfg, case.tax)
        target, stats = prepared[key]
        for miner in cfg.miners:
            jobs.append((case, miner, target, stats))
    if cfg.workers == 1:
        return [_run_case(cfg, c, m, t, s) for c, m, t, s in jobs]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [pool.submit(_run_case, cfg, c, m, t, s) for c, m, t, s in jobs]
        return [f.result() for f in futures]


def records_to_csv(records: list[ExperimentRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(rec.csv_row())
    return buf.getvalue()


def records_to_json(records: list[ExperimentRecord]) -> list[dict]:
    return [r.to_dict() for r in records]


__all__ = [
    "CSV_COLUMNS", "DELTA0", "ExperimentConfig", "ExperimentRecord", "MINERS", "halving_bound",
    "miner_bounds", "records_to_csv", "records_to_json", "run_experiment",
]
