"""Mining strategies that identify a monotone frequency predicate by queries.

Every miner works on a :class:`ClassificationState` over a materialized
poset (an itemset taxonomy or a size-bounded one), asks an oracle through
an :class:`InstrumentedOracle`, and returns a :class:`MiningResult`.
"""
from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .errors import IncompleteState, NonMonotoneOracle, SessionClosed
from .itemsets import ItemsetTaxonomy, _ItemsetPoset, _view
from .oracle import InstrumentedOracle, Oracle
from .poset import AntichainCounter, GenericPoset, Taxonomy, chain_partition, iter_bits

ALG1_STRATEGIES = ("any", "minimal", "maximal", "dual")


class Mark(str, Enum):
    FREQUENT = "frequent"
    INFREQUENT = "infrequent"
    UNCLASSIFIED = "unclassified"


class ClassificationState:
    """Tri-state marks over the nodes of a poset, kept as two bitsets.

    Frequent marks are closed toward ancestors and infrequent marks toward
    descendants; a contradiction means the oracle is not monotone.
    """

    def __init__(self, poset: GenericPoset):
        self.poset = poset
        self.frequent = 0
        self.infrequent = 0
        self.mfis: list[int] = []
        self.miis: list[int] = []

    @property
    def unclassified(self) -> int:
        return self.poset.full_mask & ~(self.frequent | self.infrequent)

    @property
    def classified_count(self) -> int:
        return (self.frequent | self.infrequent).bit_count()

    def mark(self, node: int) -> Mark:
        if self.frequent >> node & 1:
            return Mark.FREQUENT
        if self.infrequent >> node & 1:
            return Mark.INFREQUENT
        return Mark.UNCLASSIFIED

    def mark_frequent(self, node: int) -> "ClassificationState":
        closure = self.poset.down[node]
        if closure & self.infrequent:
            raise NonMonotoneOracle(
                f"{self.poset.elements[node]!r} answered frequent below a known infrequent itemset")
        self.frequent |= closure
        return self

    def mark_infrequent(self, node: int) -> "ClassificationState":
        closure = self.poset.up[node]
        if closure & self.frequent:
            raise NonMonotoneOracle(
                f"{self.poset.elements[node]!r} answered infrequent above a known frequent itemset")
        self.infrequent |= closure
        return self


def mark_frequent(state: ClassificationState, node: int) -> ClassificationState:
    return state.mark_frequent(node)


def mark_infrequent(state: ClassificationState, node: int) -> ClassificationState:
    return state.mark_infrequent(node)


def derive_borders(state: ClassificationState) -> tuple[list, list]:
    """MFIs and MIIs of a fully classified state, as node payloads."""
    if state.unclassified:
        raise IncompleteState(f"{state.unclassified.bit_count()} nodes are unclassified")
    poset = state.poset
    return (list(poset.payloads(poset.maximal(state.frequent))),
            list(poset.payloads(poset.minimal(state.infrequent))))


def known_borders(state: ClassificationState) -> tuple[list, list]:
    """Borders already certain in a partial state.

    A frequent node is a confirmed MFI once all its children are infrequent;
    dually for MIIs.  On a complete state this equals :func:`derive_borders`.
    """
    poset = state.poset
    mfis = [k for k in iter_bits(state.frequent) if poset.children[k] & ~state.infrequent == 0]
    miis = [k for k in iter_bits(state.infrequent) if poset.parents[k] & ~state.frequent == 0]
    return list(poset.payloads(mfis)), list(poset.payloads(miis))


def _jsonable(x):
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    return x


def _frozen(x):
    if isinstance(x, list):
        return tuple(_frozen(v) for v in x)
    return x


@dataclass
class MiningResult:
    mfis: list
    miis: list
    crowd_queries: int
    transcript: list
    completed: bool
    strategy: str
    bounds: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)
    state: ClassificationState | None = field(default=None, repr=False, compare=False)

    @property
    def queried(self) -> set:
        return {itemset for itemset, _ in self.transcript}

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "completed": self.completed,
            "crowd_queries": self.crowd_queries,
            "mfis": _jsonable(self.mfis),
            "miis": _jsonable(self.miis),
            "transcript": [{"itemset": _jsonable(q), "answer": a} for q, a in self.transcript],
            "bounds": self.bounds,
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MiningResult":
        return cls(
            mfis=[_frozen(m) for m in doc["mfis"]],
            miis=[_frozen(m) for m in doc["miis"]],
            crowd_queries=doc["crowd_queries"],
            transcript=[(_frozen(t["itemset"]), t["answer"]) for t in doc["transcript"]],
            completed=doc["completed"],
            strategy=doc["strategy"],
            bounds=doc.get("bounds", {}),
            info=doc.get("info", {}),
        )


class _Run:
    """One miner execution: state, instrumented oracle, query bookkeeping."""

    def __init__(self, target, oracle: Oracle, strategy: str):
        self.target = target
        self.poset = _view(target)
        if not isinstance(oracle, InstrumentedOracle):
            base = getattr(target, "base", None)
            oracle = InstrumentedOracle(oracle, base if isinstance(base, Taxonomy) else None)
        self.oracle = oracle
        self.start = oracle.query_count
        self.state = ClassificationState(self.poset)
        self.strategy = strategy

    def query(self, node: int) -> bool:
        answer = self.oracle(self.poset.elements[node])
        if answer:
            self.state.mark_frequent(node)
        else:
            self.state.mark_infrequent(node)
        return answer

    def ask(self, node: int) -> bool:
        """Answer from propagated marks when possible, else query."""
        mark = self.state.mark(node)
        if mark is Mark.FREQUENT:
            return True
        if mark is Mark.INFREQUENT:
            return False
        return self.query(node)

    @contextlib.contextmanager
    def guard(self):
        try:
            yield
        except SessionClosed as exc:
            exc.state = self.state
            raise

    def result(self, info=None) -> MiningResult:
        state = self.state
        completed = state.unclassified == 0
        mfis, miis = derive_borders(state) if completed else known_borders(state)
        return MiningResult(
            mfis=mfis,
            miis=miis,
            crowd_queries=self.oracle.query_count - self.start,
            transcript=list(self.oracle.transcript[self.start:]),
            completed=completed,
            strategy=self.strategy,
            info=dict(info or {}),
            state=state,
        )


def mine_alg1(it: ItemsetTaxonomy, oracle: Oracle, strategy: str = "any") -> MiningResult:
    """Find one MFI or MII per round by walking from an unclassified itemset.

    A frequent start climbs by adding the ancestors of one item at a time,
    keeping each frequent extension; an infrequent start descends by
    removing the descendants of one item from its order ideal, keeping each
    infrequent reduction.  ``dual`` alternates minimal and maximal choices
    over one shared state and cache.
    """
    if not isinstance(it, ItemsetTaxonomy):
        raise TypeError("mine_alg1 needs a full ItemsetTaxonomy")
    if strategy not in ALG1_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    run = _Run(it, oracle, f"alg1:{strategy}")
    poset, state = run.poset, run.state
    ancestors, descendants = it.base.down, it.base.up
    n_items = len(it.base)

    def pick(kind: str) -> int | None:
        free = state.unclassified
        if not free:
            return None
        if kind == "minimal":
            free = poset.minimal(free)
        elif kind == "maximal":
            free = poset.maximal(free)
        return (free & -free).bit_length() - 1

    def round_(kind: str) -> bool:
        a = pick(kind)
        if a is None:
            return False
        if run.query(a):
            for i in range(n_items):
                grown = it.ideal_masks[a] | ancestors[i]
                if grown != it.ideal_masks[a]:
                    b = it.by_ideal[grown]
                    if run.ask(b):
                        a = b
            state.mfis.append(a)
        else:
            for i in range(n_items):
                shrunk = it.ideal_masks[a] & ~descendants[i]
                if shrunk != it.ideal_masks[a]:
                    b = it.by_ideal[shrunk]
                    if not run.ask(b):
                        a = b
            state.miis.append(a)
        return True

    kinds = ("minimal", "maximal") if strategy == "dual" else (strategy,)
    rounds = 0
    with run.guard():
        while round_(kinds[rounds % len(kinds)]):
            rounds += 1
    # borders met only as side effects of a walk are recovered from the marks
    return run.result({"rounds": rounds,
                       "walk_mfis": [list(m) for m in poset.payloads(state.mfis)],
                       "walk_miis": [list(m) for m in poset.payloads(state.miis)]})


def mine_exhaustive(target, oracle: Oracle) -> MiningResult:
    """Query every node once."""
    run = _Run(target, oracle, "exhaustive")
    with run.guard():
        for node in range(len(run.poset)):
            run.query(node)
    return run.result()


def split_scores(poset: GenericPoset, state: ClassificationState,
                 counter: AntichainCounter | None = None) -> dict[int, tuple[int, int]]:
    """Per unclassified node ``A``: ``(s, t)`` possible solutions.

    ``s`` counts antichains of the unclassified subposet holding ``A`` or a
    descendant (removed if ``A`` is infrequent), ``t`` the rest (removed if
    ``A`` is frequent).
    """
    poset = _view(poset)
    counter = counter or AntichainCounter(poset)
    free = state.unclassified
    total = counter(free)
    scores = {}
    for a in iter_bits(free):
        t = counter(free & ~poset.up[a])
        scores[a] = (total - t, t)
    return scores


def best_split_element(poset, state: ClassificationState,
                       counter: AntichainCounter | None = None) -> int:
    if not state.unclassified:
        raise IncompleteState("no unclassified node left")
    scores = split_scores(poset, state, counter)
    return max(scores, key=lambda a: (min(scores[a]), -a))


def mine_halving(target, oracle: Oracle, cap: int | None = None) -> MiningResult:
    """Always query the element eliminating the most solutions in the worst case."""
    run = _Run(target, oracle, "halving")
    counter = AntichainCounter(run.poset, cap=cap)
    with run.guard():
        while run.state.unclassified:
            run.query(best_split_element(run.poset, run.state, counter))
    return run.result()


def mine_chain_partition(target, oracle: Oracle) -> MiningResult:
    """Binary-search the frequent/infrequent cut on each chain of a
    minimum chain partition, skipping nodes already classified."""
    run = _Run(target, oracle, "chain")
    chains = chain_partition(run.poset)
    state = run.state
    with run.guard():
        for chain in chains:
            while True:
                lo, hi = -1, len(chain)
                for pos, node in enumerate(chain):
                    if state.frequent >> node & 1:
                        lo = pos
                    elif state.infrequent >> node & 1:
                        hi = pos
                        break
                if hi - lo <= 1:
                    break
                run.query(chain[(lo + hi) // 2])
    longest = max((len(c) for c in chains), default=0)
    return run.result({"chains": len(chains), "longest_chain": longest})


def greedy_scores(poset, state: ClassificationState) -> dict[int, tuple[int, int]]:
    """Per unclassified node: unclassified ancestors and descendants, self included."""
    poset = _view(poset)
    free = state.unclassified
    return {a: ((poset.down[a] & free).bit_count(), (poset.up[a] & free).bit_count())
            for a in iter_bits(free)}


def greedy_best_split_itemset(poset, state: ClassificationState) -> int:
    if not state.unclassified:
        raise IncompleteState("no unclassified node left")
    scores = greedy_scores(poset, state)
    return max(scores, key=lambda a: (min(scores[a]), -a))


def mine_greedy_anytime(target, oracle: Oracle, budget: int | None = None) -> MiningResult:
    """Greedy best-split queries until everything is classified or the
    query budget runs out."""
    if budget is not None and budget < 0:
        raise ValueError("budget must be non-negative")
    run = _Run(target, oracle, "greedy")
    state = run.state
    classified = [state.classified_count]
    with run.guard():
        while state.unclassified and (budget is None or run.oracle.query_count - run.start < budget):
            run.query(greedy_best_split_itemset(run.poset, state))
            classified.append(state.classified_count)
    return run.result({"classified_after": classified, "budget": budget})


MINERS: dict[str, Callable[..., MiningResult]] = {
    **{f"alg1:{s}": (lambda s: lambda t, o, **kw: mine_alg1(t, o, s))(s) for s in ALG1_STRATEGIES},
    "exhaustive": lambda t, o, **kw: mine_exhaustive(t, o),
    "halving": lambda t, o, **kw: mine_halving(t, o, cap=kw.get("cap")),
    "chain": lambda t, o, **kw: mine_chain_partition(t, o),
    "greedy": lambda t, o, **kw: mine_greedy_anytime(t, o, budget=kw.get("budget")),
}


def miner_name(name: str) -> str:
    """Normalize ``alg1`` to ``alg1:any`` and validate."""
    if name == "alg1":
        name = "alg1:any"
    if name not in MINERS:
        raise ValueError(f"unknown miner {name!r}; choose from {', '.join(MINERS)}")
    return name


def run_miner(name: str, target, oracle: Oracle, **kwargs) -> MiningResult:
    return MINERS[miner_name(name)](target, oracle, **kwargs)
