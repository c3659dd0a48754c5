"""Itemset taxonomies built over an item taxonomy (or any poset).

An itemset is an antichain of the base poset; ``A <= B`` when every item of
``A`` is implied by some item of ``B``, i.e. when the order ideal of ``A``
is contained in that of ``B``.  Ideals are kept as bitsets over the base.
"""
from __future__ import annotations

from collections import deque
from enum import Enum
from itertools import combinations
from typing import Callable, Iterable

from .errors import CapExceeded, NotACoverEdge, NotAnAntichain, NotMonotone
from .poset import GenericPoset, iter_bits, to_mask

DEFAULT_NODE_CAP = 2**16
MONOTONE_CHECK_LIMIT = 4096


class EdgeKind(str, Enum):
    ADDITION = "addition"
    SPECIALIZATION = "specialization"


class _ItemsetPoset:
    """Shared lookups for the full and the size-bounded itemset taxonomies."""

    base: GenericPoset
    antichain_masks: tuple[int, ...]
    ideal_masks: tuple[int, ...]
    as_poset: GenericPoset

    def _index_nodes(self):
        self.node_index = {e: k for k, e in enumerate(self.as_poset.elements)}
        self.by_ideal = {o: k for k, o in enumerate(self.ideal_masks)}

    def __len__(self) -> int:
        return len(self.ideal_masks)

    @property
    def antichains(self) -> tuple[tuple, ...]:
        return self.as_poset.elements

    @property
    def nodes(self) -> list[tuple[tuple, tuple]]:
        """``(E_A, O_A)`` pairs: the antichain and its order ideal."""
        return [(e, self.base.payloads(o)) for e, o in zip(self.antichains, self.ideal_masks)]

    def ideal_mask_of(self, itemset: Iterable) -> int:
        """Order ideal (over base indices) of an arbitrary item set."""
        return self.base.down_closure(to_mask(self.base.index(i) for i in itemset))

    def canonical(self, itemset: Iterable) -> tuple:
        mask = self.base.maximal(to_mask(self.base.index(i) for i in itemset))
        return self.base.payloads(mask)

    def node(self, itemset) -> int:
        """Node index of an itemset (normalized first); ints pass through."""
        if isinstance(itemset, int):
            if not 0 <= itemset < len(self):
                raise IndexError(itemset)
            return itemset
        key = self.canonical(itemset)
        try:
            return self.node_index[key]
        except KeyError:
            raise KeyError(f"{key!r} is not a node of this itemset taxonomy") from None


class ItemsetTaxonomy(_ItemsetPoset):
    """All antichains of ``base`` with their covering edges and edge kinds."""

    def __init__(self, base, antichain_masks, ideal_masks, cover_edges):
        self.base = base
        self.antichain_masks = tuple(antichain_masks)
        self.ideal_masks = tuple(ideal_masks)
        self.cover_edges = tuple(cover_edges)
        elements = [base.payloads(e) for e in self.antichain_masks]
        self.as_poset = GenericPoset.from_covers(elements, [(a, b) for a, b, _ in self.cover_edges])
        self._index_nodes()

    def __repr__(self) -> str:
        return f"ItemsetTaxonomy(items={len(self.base)}, nodes={len(self)})"


class KItemsetTaxonomy(_ItemsetPoset):
    def __init__(self, base, k, antichain_masks, ideal_masks, down):
        self.base = base
        self.k = k
        self.antichain_masks = tuple(antichain_masks)
        self.ideal_masks = tuple(ideal_masks)
        elements = [base.payloads(e) for e in self.antichain_masks]
        self.as_poset = GenericPoset.from_down_sets(elements, down)
        self._index_nodes()

    def __repr__(self) -> str:
        return f"KItemsetTaxonomy(items={len(self.base)}, k={self.k}, nodes={len(self)})"


def construct_itemset_taxonomy(tax: GenericPoset, node_cap: int = DEFAULT_NODE_CAP) -> ItemsetTaxonomy:
    """Breadth-first materialization from the empty itemset.

    From each handled itemset ``A`` and each item ``i`` outside its ideal
    whose parents all lie in the ideal, the covering itemset ``B`` has ideal
    ``O_A + {i}`` and antichain ``E_A - parents(i) + {i}``.
    """
    antichains = [0]
    ideals = [0]
    seen = {0: 0}
    covers = []
    queue = deque([0])
    n = len(tax)
    while queue:
        a = queue.popleft()
        ea, oa = antichains[a], ideals[a]
        for i in range(n):
            bit = 1 << i
            parents = tax.parents[i]
            if oa & bit or parents & ~oa:
                continue
            ob = oa | bit
            b = seen.get(ob)
            if b is None:
                b = len(ideals)
                if b >= node_cap:
                    raise CapExceeded(f"itemset taxonomy exceeds {node_cap} nodes")
                seen[ob] = b
                antichains.append((ea & ~parents) | bit)
                ideals.append(ob)
                queue.append(b)
            kind = EdgeKind.ADDITION if ea & parents == 0 else EdgeKind.SPECIALIZATION
            covers.append((a, b, kind))
    return ItemsetTaxonomy(tax, antichains, ideals, covers)


def classify_covering_edge(it: ItemsetTaxonomy, a, b) -> EdgeKind:
    na, nb = it.node(a), it.node(b)
    oa, ob = it.ideal_masks[na], it.ideal_masks[nb]
    added = ob & ~oa
    if oa & ~ob or added.bit_count() != 1:
        raise NotACoverEdge((it.antichains[na], it.antichains[nb]))
    i = added.bit_length() - 1
    if it.base.parents[i] & ~oa:
        raise NotACoverEdge((it.antichains[na], it.antichains[nb]))
    if it.antichain_masks[na] | added == it.antichain_masks[nb]:
        return EdgeKind.ADDITION
    return EdgeKind.SPECIALIZATION


def construct_k_itemset_taxonomy(tax: GenericPoset, k: int) -> KItemsetTaxonomy:
    """Itemsets of size at most ``k``, compared by ideal containment."""
    if k < 0:
        raise ValueError("k must be non-negative")
    antichains, ideals = [], []
    for size in range(min(k, len(tax)) + 1):
        for combo in combinations(range(len(tax)), size):
            mask = to_mask(combo)
            if tax.is_antichain(mask):
                antichains.append(mask)
                ideals.append(tax.down_closure(mask))
    down = []
    for ob in ideals:
        down.append(to_mask(a for a, oa in enumerate(ideals) if oa & ~ob == 0))
    return KItemsetTaxonomy(tax, k, antichains, ideals, down)


def solution_taxonomy(tax: GenericPoset, node_cap: int = DEFAULT_NODE_CAP) -> GenericPoset:
    """Itemset taxonomy of the itemset taxonomy: every possible MFI set."""
    inner = construct_itemset_taxonomy(tax, node_cap)
    return construct_itemset_taxonomy(inner.as_poset, node_cap).as_poset


# -- antichains of itemsets <-> monotone predicates ------------------------

def _view(target) -> GenericPoset:
    return target.as_poset if hasattr(target, "as_poset") else target


class MonotonePredicate:
    """Decreasing monotone predicate: true exactly on itemsets below a member
    of ``maximal``.

    Over an itemset taxonomy any item set may be asked (it is compared by
    order ideals); over a bare poset the argument must be an element payload.
    """

    def __init__(self, target, maximal: Iterable):
        self.target = target
        poset = _view(target)
        if isinstance(target, _ItemsetPoset):
            keys = [target.canonical(m) for m in maximal]
            ideals = [target.ideal_mask_of(m) for m in keys]
            for x, y in combinations(range(len(keys)), 2):
                if ideals[x] & ~ideals[y] == 0 or ideals[y] & ~ideals[x] == 0:
                    raise NotAnAntichain((keys[x], keys[y]))
            self._ideals = ideals
            self.maximal = tuple(sorted(set(keys), key=lambda m: target.node_index.get(m, -1)))
        else:
            mask = to_mask(poset.index(_freeze(m)) for m in maximal)
            if not poset.is_antichain(mask):
                raise NotAnAntichain(tuple(maximal))
            self._ideals = None
            self._true_mask = poset.down_closure(mask)
            self.maximal = poset.payloads(mask)

    def __call__(self, itemset) -> bool:
        if self._ideals is not None:
            ideal = self.target.ideal_mask_of(itemset)
            return any(ideal & ~m == 0 for m in self._ideals)
        node = _view(self.target).index(_freeze(itemset))
        return bool(self._true_mask >> node & 1)

    def __repr__(self) -> str:
        return f"MonotonePredicate(maximal={list(self.maximal)!r})"


def _freeze(x):
    if isinstance(x, list):
        return tuple(_freeze(v) for v in x)
    return x


def predicate_from_mfis(target, mfis: Iterable) -> MonotonePredicate:
    return MonotonePredicate(target, mfis)


def truth_mask(target, f: Callable) -> int:
    poset = _view(target)
    return to_mask(k for k, e in enumerate(poset.elements) if f(e))


def mfis_from_predicate(target, f: Callable, check: bool | None = None) -> tuple:
    """Maximal true elements of ``f``; monotonicity is verified on small inputs."""
    poset = _view(target)
    true = truth_mask(target, f)
    if check is None:
        check = len(poset) <= MONOTONE_CHECK_LIMIT
    if check:
        for k in iter_bits(true):
            if poset.down[k] & ~true:
                bad = next(iter_bits(poset.down[k] & ~true))
                raise NotMonotone(f"true on {poset.elements[k]!r} but false on {poset.elements[bad]!r}")
    return poset.payloads(poset.maximal(true))


def miis_from_predicate(target, f: Callable) -> tuple:
    """Minimal false elements of ``f``."""
    poset = _view(target)
    false = poset.full_mask & ~truth_mask(target, f)
    return poset.payloads(poset.minimal(false))
