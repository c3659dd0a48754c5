"""JSON file formats: taxonomies, transaction databases, materialized
posets, mining results and interactive transcripts.

Taxonomy document::

    {"items": [{"id": 0, "label": "drink"}, ...], "edges": [[0, 1], ...]}

Edges are ``[parent, child]`` covering pairs.  A materialized itemset
taxonomy uses the same shape with node ids and an ``itemset`` payload per
node, plus ``kinds`` parallel to ``edges`` when edge kinds are known.
"""
from __future__ import annotations

import json
import os
from fractions import Fraction
from pathlib import Path
from typing import Any

from .itemsets import ItemsetTaxonomy, _view
from .miners import MiningResult, _frozen, _jsonable
from .oracle import OracleConfig, TransactionDatabase, TranscriptRecord
from .poset import GenericPoset, Taxonomy

PathLike = str | os.PathLike


def read_json(path: PathLike) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_json(path: PathLike, doc: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")


# -- taxonomies ------------------------------------------------------------

def taxonomy_to_dict(tax: Taxonomy) -> dict:
    items = []
    for i in tax.items:
        entry: dict = {"id": i}
        if i in tax.labels:
            entry["label"] = tax.labels[i]
        items.append(entry)
    edges = [[tax.elements[a], tax.elements[b]] for a, b in tax.cover_edges]
    doc = {"items": items, "edges": edges}
    if tax.metadata:
        doc["metadata"] = tax.metadata
    return doc


def taxonomy_from_dict(doc: dict) -> Taxonomy:
    try:
        raw_items = doc["items"]
        edges = [tuple(e) for e in doc.get("edges", [])]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed taxonomy document: {exc}") from None
    ids, labels = [], {}
    for entry in raw_items:
        if isinstance(entry, dict):
            ids.append(entry["id"])
            if "label" in entry:
                labels[entry["id"]] = entry["label"]
        else:
            ids.append(entry)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate item ids in taxonomy document")
    for e in edges:
        if len(e) != 2:
            raise ValueError(f"edge {list(e)} must be a [parent, child] pair")
    return Taxonomy(ids, edges, labels=labels, metadata=doc.get("metadata"))


def load_taxonomy(path: PathLike) -> Taxonomy:
    return taxonomy_from_dict(read_json(path))


def save_taxonomy(path: PathLike, tax: Taxonomy) -> None:
    write_json(path, taxonomy_to_dict(tax))


# -- transaction databases ---------------------------------------------------

def database_to_dict(db: TransactionDatabase, threshold: Fraction | None = None,
                     taxonomy_ref: str | None = None) -> dict:
    doc: dict = {}
    if taxonomy_ref is not None:
        doc["taxonomy"] = taxonomy_ref
    if threshold is not None:
        doc["threshold"] = str(Fraction(threshold))
    doc["transactions"] = [list(t) for t in db.transactions]
    return doc


def load_database(path: PathLike, taxonomy: Taxonomy | None = None
                  ) -> tuple[TransactionDatabase, OracleConfig | None]:
    """Read a transaction file.  Its ``taxonomy`` header is resolved
    relative to the file unless a taxonomy is passed in."""
    doc = read_json(path)
    if isinstance(doc, list):
        doc = {"transactions": doc}
    if taxonomy is None:
        ref = doc.get("taxonomy")
        if ref is None:
            raise ValueError(f"{path}: no taxonomy given and none named in the header")
        if isinstance(ref, dict):
            taxonomy = taxonomy_from_dict(ref)
        else:
            taxonomy = load_taxonomy(Path(path).parent / ref)
    cfg = OracleConfig.parse(str(doc["threshold"])) if "threshold" in doc else None
    return TransactionDatabase(taxonomy, doc.get("transactions", [])), cfg


def save_database(path: PathLike, db: TransactionDatabase, threshold=None,
                  taxonomy_ref: str | None = None) -> None:
    write_json(path, database_to_dict(db, threshold, taxonomy_ref))


# -- materialized posets ---------------------------------------------------------

def poset_to_dict(target, stats: dict | None = None) -> dict:
    """Poset document for an itemset taxonomy (or any poset of itemsets)."""
    poset = _view(target)
    doc: dict = {
        "items": [{"id": k, "itemset": _jsonable(e)} for k, e in enumerate(poset.elements)],
        "edges": [[a, b] for a, b in poset.cover_edges],
    }
    if isinstance(target, ItemsetTaxonomy):
        kinds = {(a, b): kind.value for a, b, kind in target.cover_edges}
        doc["kinds"] = [kinds[(a, b)] for a, b in poset.cover_edges]
    if stats is not None:
        doc["stats"] = stats
    return doc


def poset_from_dict(doc: dict) -> GenericPoset:
    elements = [_frozen(entry["itemset"]) for entry in doc["items"]]
    ids = [entry["id"] for entry in doc["items"]]
    if ids != list(range(len(ids))):
        raise ValueError("materialized node ids must be 0..n-1 in order")
    return GenericPoset.from_covers(elements, [tuple(e) for e in doc["edges"]])


# -- results and transcripts -------------------------------------------------------

def result_to_dict(result: MiningResult) -> dict:
    return result.to_dict()


def result_from_dict(doc: dict) -> MiningResult:
    return MiningResult.from_dict(doc)


def save_result(path: PathLike, result: MiningResult) -> None:
    write_json(path, result.to_dict())


def load_result(path: PathLike) -> MiningResult:
    return MiningResult.from_dict(read_json(path))


def transcript_to_list(records: list[TranscriptRecord]) -> list[dict]:
    return [r.to_dict() for r in records]


def transcript_from_list(doc: list[dict]) -> list[TranscriptRecord]:
    return [TranscriptRecord(tuple(d["itemset"]), d["rendering"], bool(d["answer"]),
                             float(d["timestamp"])) for d in doc]


def save_transcript(path: PathLike, records: list[TranscriptRecord]) -> None:
    write_json(path, transcript_to_list(records))


def load_transcript(path: PathLike) -> list[TranscriptRecord]:
    return transcript_from_list(read_json(path))
