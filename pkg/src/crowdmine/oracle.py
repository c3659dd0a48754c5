"""Frequency oracles: answer "is this itemset frequent?".

Any callable taking an itemset (a tuple of item ids) and returning a bool is
an oracle.  This module provides database-backed, predicate-backed and
human-backed ones, plus the caching/counting wrapper every miner runs behind.
"""
from __future__ import annotations

import sys
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, TextIO

from .errors import SessionClosed, UnknownItem
from .itemsets import MonotonePredicate, _freeze
from .poset import Taxonomy, antichain_mask, normalize_antichain, to_mask

Oracle = Callable[[tuple], bool]


@dataclass(frozen=True)
class OracleConfig:
    """Support threshold, kept as an exact rational in (0, 1)."""

    threshold: Fraction

    def __post_init__(self):
        theta = self.threshold
        if not isinstance(theta, Fraction):
            theta = Fraction(str(theta))
            object.__setattr__(self, "threshold", theta)
        if not 0 < theta < 1:
            raise ValueError(f"threshold must lie strictly between 0 and 1, got {theta}")

    @classmethod
    def parse(cls, text: str) -> "OracleConfig":
        return cls(Fraction(text.strip()))


@dataclass
class TransactionDatabase:
    """A bag of transactions over a taxonomy; transactions are kept as given."""

    taxonomy: Taxonomy
    transactions: list[tuple[int, ...]] = field(default_factory=list)

    def __post_init__(self):
        self.transactions = [tuple(t) for t in self.transactions]
        # order ideal of every transaction, for containment tests
        self._ideals = []
        for t in self.transactions:
            for i in t:
                if i not in self.taxonomy:
                    raise UnknownItem(i)
            self._ideals.append(self.taxonomy.down_closure(self.taxonomy.mask(t)))

    def __len__(self) -> int:
        return len(self.transactions)


def support(db: TransactionDatabase, tax: Taxonomy, a: Iterable[int]) -> Fraction:
    if not db.transactions:
        return Fraction(0)
    if tax is not db.taxonomy:
        ideals = [tax.down_closure(tax.mask(t)) for t in db.transactions]
    else:
        ideals = db._ideals
    wanted = tax.down_closure(antichain_mask(tax, a))
    hits = sum(1 for ideal in ideals if wanted & ~ideal == 0)
    return Fraction(hits, len(db.transactions))


class DatabaseOracle:
    """Frequent means support strictly above the threshold."""

    def __init__(self, db: TransactionDatabase, tax: Taxonomy, cfg: OracleConfig):
        self.db, self.tax, self.cfg = db, tax, cfg

    def __call__(self, itemset) -> bool:
        canonical = normalize_antichain(self.tax, itemset)
        return support(self.db, self.tax, canonical) > self.cfg.threshold


def make_db_oracle(db: TransactionDatabase, tax: Taxonomy, cfg: OracleConfig) -> DatabaseOracle:
    return DatabaseOracle(db, tax, cfg)


def make_predicate_oracle(it, mfis: Iterable) -> MonotonePredicate:
    return MonotonePredicate(it, mfis)


def realize_database(it, mfis: Iterable, cfg: OracleConfig) -> TransactionDatabase:
    """A database whose frequent itemsets are exactly those below ``mfis``.

    Uses ``n`` full transactions, one transaction per MFI and padding empty
    transactions, ``d`` in total, with ``n/d < threshold < (n+1)/d`` and
    ``n + |mfis| <= d``.  The smallest such ``d`` is chosen.
    """
    predicate = MonotonePredicate(it, mfis)
    tax = it.base
    mfis = list(predicate.maximal)
    if not mfis:
        return TransactionDatabase(tax, [])
    theta = cfg.threshold
    d = 2
    while True:
        scaled = theta * d
        n = scaled.numerator // scaled.denominator
        if scaled.denominator != 1 and n + len(mfis) <= d:
            break
        d += 1
    full = tuple(tax.items)
    rows = [full] * n + [tuple(m) for m in mfis] + [()] * (d - n - len(mfis))
    return TransactionDatabase(tax, rows)


class InstrumentedOracle:
    """Caches answers per canonical itemset and counts distinct queries.

    Access to the cache is serialized, so one instance can be shared by
    cooperating miners.
    """

    def __init__(self, inner: Oracle, taxonomy: Taxonomy | None = None):
        self.inner = inner
        self.taxonomy = taxonomy
        self.cache: dict = {}
        self.transcript: list[tuple[tuple, bool]] = []
        self._lock = threading.Lock()

    def key(self, itemset):
        if self.taxonomy is not None:
            return normalize_antichain(self.taxonomy, itemset)
        return _freeze(itemset)

    def __call__(self, itemset) -> bool:
        key = self.key(itemset)
        with self._lock:
            if key in self.cache:
                return self.cache[key]
            answer = bool(self.inner(key))
            self.cache[key] = answer
            self.transcript.append((key, answer))
            return answer

    @property
    def query_count(self) -> int:
        return len(self.transcript)


def instrument(oracle: Oracle, taxonomy: Taxonomy | None = None) -> InstrumentedOracle:
    return InstrumentedOracle(oracle, taxonomy)


@dataclass
class TranscriptRecord:
    itemset: tuple[int, ...]
    rendering: str
    answer: bool
    timestamp: float

    def to_dict(self) -> dict:
        return {"itemset": list(self.itemset), "rendering": self.rendering,
                "answer": self.answer, "timestamp": self.timestamp}


class InteractiveOracle:
    """Asks a human over a line-oriented channel.

    One question goes out per line; ``y``/``yes``/``n``/``no`` (any case) come
    back.  Anything else triggers a re-prompt; end of input raises
    :class:`SessionClosed`.
    """

    YES = {"y", "yes"}
    NO = {"n", "no"}

    def __init__(self, taxonomy: Taxonomy | None = None, stdin: TextIO | None = None,
                 stdout: TextIO | None = None):
        self.taxonomy = taxonomy
        self.stdin = stdin if stdin is not None else sys.stdin
        self.stdout = stdout if stdout is not None else sys.stdout
        self.records: list[TranscriptRecord] = []

    def render(self, itemset) -> str:
        if not itemset:
            return "(the empty itemset)"
        if self.taxonomy is None:
            return ", ".join(str(i) for i in itemset)
        return ", ".join(self.taxonomy.label(i) for i in itemset)

    def __call__(self, itemset) -> bool:
        rendering = self.render(itemset)
        question = f"Do these often occur together: {rendering}? [y/n] "
        while True:
            self.stdout.write(question)
            self.stdout.flush()
            line = self.stdin.readline()
            if not line:
                raise SessionClosed("input ended before mining finished")
            token = line.strip().lower()
            if token in self.YES:
                answer = True
            elif token in self.NO:
                answer = False
            else:
                self.stdout.write("Please answer y or n.\n")
                continue
            self.records.append(TranscriptRecord(tuple(itemset), rendering, answer, time.time()))
            return answer


def interactive_oracle(taxonomy: Taxonomy | None = None, stdin: TextIO | None = None,
                       stdout: TextIO | None = None) -> InteractiveOracle:
    return InteractiveOracle(taxonomy, stdin, stdout)


def ground_truth(target, oracle: Oracle) -> int:
    """Bitset of the nodes of ``target`` that ``oracle`` calls frequent."""
    poset = target.as_poset if hasattr(target, "as_poset") else target
    return to_mask(k for k, e in enumerate(poset.elements) if oracle(e))
