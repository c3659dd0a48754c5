"""Finite posets and item taxonomies.

Elements are addressed by dense indices ``0..n-1``; the order is stored as
one ancestor bitset and one descendant bitset per element (Python ints), so
comparisons, closures and restrictions are single big-int operations.
Payloads (item ids, itemsets, ...) ride along in ``elements``.
"""
from __future__ import annotations

import os
from collections import deque
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

import networkx as nx
from networkx.algorithms import bipartite

from .errors import CapExceeded, CycleDetected, NotAnAntichain, UnknownItem

DEFAULT_ANTICHAIN_CAP = 2**20
# memoized sub-problems allowed while counting before giving up
DEFAULT_COUNT_WORK = 4_000_000


def antichain_cap() -> int:
    """Enumeration cap, overridable through ``CROWDMINE_ANTICHAIN_CAP``."""
    raw = os.environ.get("CROWDMINE_ANTICHAIN_CAP")
    return int(raw) if raw else DEFAULT_ANTICHAIN_CAP


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def _topological_order(succ: Sequence[int]) -> list[int]:
    n = len(succ)
    indegree = [0] * n
    for k in range(n):
        for j in iter_bits(succ[k]):
            indegree[j] += 1
    ready = deque(k for k in range(n) if indegree[k] == 0)
    order = []
    while ready:
        k = ready.popleft()
        order.append(k)
        for j in iter_bits(succ[k]):
            indegree[j] -= 1
            if indegree[j] == 0:
                ready.append(j)
    if len(order) != n:
        raise CycleDetected("relation contains a directed cycle")
    return order


def _covers_from_down(down: Sequence[int]) -> list[tuple[int, int]]:
    covers = []
    for b, below in enumerate(down):
        strict = below & ~(1 << b)
        implied = 0
        for c in iter_bits(strict):
            implied |= down[c] & ~(1 << c)
        covers.extend((a, b) for a in iter_bits(strict & ~implied))
    covers.sort()
    return covers


class GenericPoset:
    """An immutable finite poset over hashable payloads.

    ``relations`` is any set of pairs ``(a, b)`` meaning ``a < b`` whose
    reflexive-transitive closure is the order; it is closed and
    transitively reduced on construction.
    """

    def __init__(self, elements: Iterable[Hashable], relations: Iterable[tuple] = ()):
        elements = tuple(elements)
        index = self._make_index(elements)
        n = len(elements)
        succ = [0] * n
        for a, b in relations:
            try:
                ia, ib = index[a], index[b]
            except KeyError as exc:
                raise UnknownItem(exc.args[0]) from None
            if ia == ib:
                raise CycleDetected(f"self-loop on {a!r}")
            succ[ia] |= 1 << ib
        down = [1 << k for k in range(n)]
        for k in _topological_order(succ):
            for j in iter_bits(succ[k]):
                down[j] |= down[k]
        self._setup(elements, index, down, _covers_from_down(down))

    @staticmethod
    def _make_index(elements):
        index = {e: k for k, e in enumerate(elements)}
        if len(index) != len(elements):
            raise ValueError("poset elements must be distinct")
        return index

    @classmethod
    def from_down_sets(cls, elements: Iterable[Hashable], down: Sequence[int]) -> "GenericPoset":
        """Build from per-element ancestor bitsets (reflexive, transitive)."""
        elements = tuple(elements)
        self = cls.__new__(cls)
        self._setup(elements, cls._make_index(elements), list(down), _covers_from_down(down))
        return self

    @classmethod
    def from_covers(cls, elements: Iterable[Hashable], covers: Iterable[tuple[int, int]]) -> "GenericPoset":
        """Build from an index-level covering relation known to be reduced."""
        elements = tuple(elements)
        n = len(elements)
        covers = sorted(set(covers))
        succ = [0] * n
        for a, b in covers:
            succ[a] |= 1 << b
        down = [1 << k for k in range(n)]
        for k in _topological_order(succ):
            for j in iter_bits(succ[k]):
                down[j] |= down[k]
        self = cls.__new__(cls)
        self._setup(elements, cls._make_index(elements), down, covers)
        return self

    def _setup(self, elements, index, down, covers):
        n = len(elements)
        self.elements = elements
        self._index = index
        self.down = tuple(down)
        self.cover_edges = tuple(covers)
        parents = [0] * n
        children = [0] * n
        for a, b in covers:
            parents[b] |= 1 << a
            children[a] |= 1 << b
        self.parents = tuple(parents)
        self.children = tuple(children)
        # a < b implies |down(a)| < |down(b)|, so this is a linear extension
        order = sorted(range(n), key=lambda k: (down[k].bit_count(), k))
        self.topo_order = tuple(order)
        up = [1 << k for k in range(n)]
        for a in reversed(order):
            for b in iter_bits(children[a]):
                up[a] |= up[b]
        self.up = tuple(up)
        self._width = None

    # -- basic queries -------------------------------------------------
    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={len(self)}, covers={len(self.cover_edges)})"

    @property
    def full_mask(self) -> int:
        return (1 << len(self.elements)) - 1

    def index(self, payload) -> int:
        try:
            return self._index[payload]
        except KeyError:
            raise UnknownItem(payload) from None

    def __contains__(self, payload) -> bool:
        return payload in self._index

    def leq(self, a: int, b: int) -> bool:
        return bool(self.down[b] >> a & 1)

    def lt(self, a: int, b: int) -> bool:
        return a != b and self.leq(a, b)

    def comparable(self, a: int, b: int) -> bool:
        return self.leq(a, b) or self.leq(b, a)

    def payloads(self, indices: Iterable[int] | int) -> tuple:
        if isinstance(indices, int):
            indices = iter_bits(indices)
        return tuple(self.elements[i] for i in indices)

    def relation_pairs(self) -> list[tuple[int, int]]:
        """All strict comparabilities ``(a, b)`` with ``a < b``."""
        return [(a, b) for b in range(len(self)) for a in iter_bits(self.down[b] & ~(1 << b))]

    def is_antichain(self, mask: int) -> bool:
        for i in iter_bits(mask):
            if (self.down[i] | self.up[i]) & mask != 1 << i:
                return False
        return True

    def maximal(self, mask: int) -> int:
        """Elements of ``mask`` with no strictly greater element in ``mask``."""
        implied = 0
        for c in iter_bits(mask):
            implied |= self.down[c] & ~(1 << c)
        return mask & ~implied

    def minimal(self, mask: int) -> int:
        implied = 0
        for c in iter_bits(mask):
            implied |= self.up[c] & ~(1 << c)
        return mask & ~implied

    def down_closure(self, mask: int) -> int:
        closed = 0
        for c in iter_bits(mask):
            closed |= self.down[c]
        return closed

    def up_closure(self, mask: int) -> int:
        closed = 0
        for c in iter_bits(mask):
            closed |= self.up[c]
        return closed

    def subposet(self, mask: int) -> "GenericPoset":
        keep = list(iter_bits(mask))
        pos = {k: j for j, k in enumerate(keep)}
        down = []
        for k in keep:
            down.append(to_mask(pos[a] for a in iter_bits(self.down[k] & mask)))
        return GenericPoset.from_down_sets([self.elements[k] for k in keep], down)

    def width(self) -> int:
        if self._width is None:
            self._width = len(chain_partition(self))
        return self._width


class Taxonomy(GenericPoset):
    """Item taxonomy: a poset over non-negative integer item ids.

    Ids are kept in ascending order, so the index of an item is its rank
    and sorting by id is the global item order.
    """

    def __init__(self, items, edges=(), labels: Mapping[int, str] | None = None,
                 metadata: Mapping | None = None):
        items = sorted(items)
        for i in items:
            if not isinstance(i, int) or isinstance(i, bool) or i < 0:
                raise ValueError(f"item ids must be non-negative integers, got {i!r}")
        super().__init__(items, edges)
        self.labels = {i: str(labels[i]) for i in items if labels and i in labels}
        self.metadata = dict(metadata or {})

    @classmethod
    def from_poset(cls, poset: GenericPoset, labels=None, metadata=None) -> "Taxonomy":
        """Relabel a generic poset's elements as items ``0..n-1``."""
        return cls(range(len(poset)), poset.cover_edges, labels=labels, metadata=metadata)

    @property
    def items(self) -> tuple[int, ...]:
        return self.elements

    def label(self, item: int) -> str:
        return self.labels.get(item, str(item))

    def mask(self, items: Iterable[int]) -> int:
        return to_mask(self.index(i) for i in items)

    def items_of(self, mask: int) -> tuple[int, ...]:
        return self.payloads(mask)

    def parents_of(self, item: int) -> tuple[int, ...]:
        return self.items_of(self.parents[self.index(item)])

    def ancestors_of(self, item: int) -> frozenset[int]:
        return frozenset(self.items_of(self.down[self.index(item)]))

    def descendants_of(self, item: int) -> frozenset[int]:
        return frozenset(self.items_of(self.up[self.index(item)]))


def build_taxonomy(items: Iterable[int], edges: Iterable[tuple[int, int]] = (),
                   labels: Mapping[int, str] | None = None) -> Taxonomy:
    """Validate and close a DAG of ``(parent, child)`` edges into a Taxonomy."""
    return Taxonomy(items, edges, labels=labels)


def transitive_reduction(poset: GenericPoset) -> GenericPoset:
    """Fresh poset with the same order and its covering edges recomputed."""
    return GenericPoset.from_down_sets(poset.elements, poset.down)


# -- item-level operations on taxonomies -----------------------------------

def reachability(tax: Taxonomy, item: int) -> tuple[frozenset[int], frozenset[int]]:
    return tax.ancestors_of(item), tax.descendants_of(item)


def normalize_antichain(tax: GenericPoset, raw: Iterable) -> tuple:
    """Maximal elements of ``raw``: drops every item implied by another one."""
    mask = to_mask(tax.index(i) for i in raw)
    return tax.payloads(tax.maximal(mask))


def antichain_mask(tax: GenericPoset, a: Iterable) -> int:
    mask = to_mask(tax.index(i) for i in a)
    if not tax.is_antichain(mask):
        raise NotAnAntichain(tuple(a))
    return mask


def ideal_of(tax: GenericPoset, a: Iterable) -> tuple:
    return tax.payloads(tax.down_closure(antichain_mask(tax, a)))


def antichain_of(tax: GenericPoset, o: Iterable) -> tuple:
    mask = to_mask(tax.index(i) for i in o)
    if tax.down_closure(mask) != mask:
        raise ValueError(f"{tuple(o)!r} is not an order ideal")
    return tax.payloads(tax.maximal(mask))


def itemset_leq(tax: GenericPoset, a: Iterable, b: Iterable) -> bool:
    """Every item of ``a`` is implied by some item of ``b``."""
    ia = tax.down_closure(antichain_mask(tax, a))
    ib = tax.down_closure(antichain_mask(tax, b))
    return ia & ~ib == 0


# -- antichains --------------------------------------------------------------

def enumerate_antichains(poset: GenericPoset, cap: int | None = None,
                         within: int | None = None) -> list[tuple[int, ...]]:
    """All antichains (as sorted index tuples), in lexicographic order."""
    cap = antichain_cap() if cap is None else cap
    within = poset.full_mask if within is None else within
    incomparable = [~(poset.down[i] | poset.up[i]) for i in range(len(poset))]
    out: list[tuple[int, ...]] = []
    stack: list[tuple[tuple[int, ...], int]] = [((), within)]
    while stack:
        chosen, cand = stack.pop()
        out.append(chosen)
        if len(out) > cap:
            raise CapExceeded(f"more than {cap} antichains")
        # push in reverse so the smallest extension is visited first
        for j in reversed(list(iter_bits(cand))):
            later = cand & ~((2 << j) - 1)
            stack.append((chosen + (j,), later & incomparable[j]))
    return out


class AntichainCounter:
    """Memoized antichain counting over sub-masks of one poset.

    Reusing one counter across calls shares the memo, which is what makes
    repeated best-split scoring affordable.
    """

    def __init__(self, poset: GenericPoset, cap: int | None = None,
                 max_work: int = DEFAULT_COUNT_WORK):
        self.poset = poset
        self.cap = antichain_cap() if cap is None else cap
        self.max_work = max_work
        self._comparable = [poset.down[i] | poset.up[i] for i in range(len(poset))]
        self._memo: dict[int, int] = {}

    def __call__(self, mask: int | None = None) -> int:
        mask = self.poset.full_mask if mask is None else mask
        total = self._count(mask)
        if total > self.cap:
            raise CapExceeded(f"{total} antichains exceed cap {self.cap}")
        return total

    def _count(self, mask: int) -> int:
        memo = self._memo
        comparable = self._comparable
        # explicit stack: posets here can be deeper than the recursion limit
        stack = [mask]
        while stack:
            m = stack[-1]
            if m in memo:
                stack.pop()
                continue
            if m & (m - 1) == 0:
                memo[m] = 2 if m else 1
                stack.pop()
                continue
            x = (m & -m).bit_length() - 1
            without = m & ~(1 << x)
            beside = m & ~comparable[x]
            missing = [s for s in (without, beside) if s not in memo]
            if missing:
                stack.extend(missing)
                if len(memo) > self.max_work:
                    raise CapExceeded("antichain counting exceeded its work budget")
                continue
            memo[m] = memo[without] + memo[beside]
            stack.pop()
        return memo[mask]


def count_antichains(poset: GenericPoset, within: int | None = None,
                     cap: int | None = None) -> int:
    return AntichainCounter(poset, cap=cap)(within)


# -- chains ------------------------------------------------------------------

def chain_partition(poset: GenericPoset) -> list[list[int]]:
    """Minimum chain partition via maximum bipartite matching (Dilworth).

    Left copy ``i`` is joined to right copy ``j`` whenever ``i < j``; each
    matched edge links consecutive members of a chain, so the number of
    chains is ``n - |matching|``.
    """
    n = len(poset)
    if n == 0:
        return []
    graph = nx.Graph()
    left = [("L", i) for i in range(n)]
    graph.add_nodes_from(left)
    graph.add_nodes_from(("R", j) for j in range(n))
    graph.add_edges_from(
        (("L", i), ("R", j)) for i in range(n) for j in iter_bits(poset.up[i] & ~(1 << i))
    )
    matching = bipartite.hopcroft_karp_matching(graph, top_nodes=left)
    successor = {i: matching[("L", i)][1] for i in range(n) if ("L", i) in matching}
    has_predecessor = set(successor.values())
    chains = []
    for start in range(n):
        if start in has_predecessor:
            continue
        chain = [start]
        while chain[-1] in successor:
            chain.append(successor[chain[-1]])
        chains.append(chain)
    return chains


def width(poset: GenericPoset) -> int:
    return poset.width()
