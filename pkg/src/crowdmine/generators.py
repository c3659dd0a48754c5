"""Taxonomy, poset and predicate generators for tests and benchmarks."""
from __future__ import annotations

import random
from itertools import combinations
from typing import Sequence

from .itemsets import _view
from .poset import GenericPoset, Taxonomy, enumerate_antichains, iter_bits, to_mask


def gen_chain(n: int) -> Taxonomy:
    if n < 0:
        raise ValueError("n must be non-negative")
    return Taxonomy(range(n), [(i, i + 1) for i in range(n - 1)])


def gen_flat(n: int) -> Taxonomy:
    if n < 0:
        raise ValueError("n must be non-negative")
    return Taxonomy(range(n))


def gen_random_dag(n: int, edge_prob: float, seed: int) -> Taxonomy:
    """Each forward pair ``(i, j)``, ``i < j``, becomes an edge with ``edge_prob``.

    Sampling only forward pairs keeps the graph acyclic; the taxonomy is
    transitively reduced on construction.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if not 0 <= edge_prob <= 1:
        raise ValueError("edge_prob must lie in [0, 1]")
    rng = random.Random(seed)
    edges = [(i, j) for i, j in combinations(range(n), 2) if rng.random() < edge_prob]
    return Taxonomy(range(n), edges)


def gen_cycling() -> Taxonomy:
    """Four-item example: touring is cycling; indoor cycling is cycling and sport."""
    labels = {1: "cycling", 2: "sport", 3: "bicycle_touring", 4: "indoor_cycling"}
    return Taxonomy([1, 2, 3, 4], [(1, 3), (1, 4), (2, 4)], labels=labels)


def all_taxonomies(max_items: int) -> list[Taxonomy]:
    """Every partial order on items ``0..n-1`` for ``n <= max_items``.

    Edge subsets are restricted to forward pairs (every order has such a
    labelling) and deduplicated by their transitive closure.
    """
    out = []
    for n in range(max_items + 1):
        pairs = list(combinations(range(n), 2))
        seen = set()
        for bits in range(1 << len(pairs)):
            edges = [pairs[k] for k in iter_bits(bits)]
            tax = Taxonomy(range(n), edges)
            if tax.down in seen:
                continue
            seen.add(tax.down)
            out.append(tax)
    return out


# -- series composition -------------------------------------------------------

def _relabel(p: GenericPoset, offset: int) -> list[tuple[int, int]]:
    return [(a + offset, b + offset) for a, b in p.cover_edges]


def concat_all(parts: Sequence[GenericPoset]) -> tuple[GenericPoset, list[int]]:
    """Series composition ``parts[0] o e o parts[1] o e' o ...``.

    Elements are relabelled ``0..N-1`` in order of appearance (each part's
    elements, then the fresh element joining it to the next part). Returns
    the poset and the indices of the fresh elements.
    """
    edges: list[tuple[int, int]] = []
    markers: list[int] = []
    below: list[int] = []  # everything placed so far, all under the next marker
    offset = 0
    for k, part in enumerate(parts):
        edges += _relabel(part, offset)
        idx = list(range(offset, offset + len(part)))
        if markers:
            edges += [(markers[-1], i) for i in idx]
        offset += len(part)
        below += idx
        if k < len(parts) - 1:
            e = offset
            edges += [(i, e) for i in below]
            markers.append(e)
            below.append(e)
            offset += 1
    return GenericPoset(range(offset), edges), markers


def concat(p: GenericPoset, q: GenericPoset) -> GenericPoset:
    """``p`` below a fresh element ``e`` below ``q``."""
    return concat_all([p, q])[0]


def gen_gamma(n: int) -> GenericPoset:
    """A poset with exactly ``n`` antichains and O(log^2 n) elements.

    ``n`` is split into powers of two ``2^m1 < 2^m2 < ...``; each is a flat
    poset of ``m`` elements, and the parts are concatenated in that order.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    parts = [GenericPoset(range(m)) for m in range(n.bit_length()) if n >> m & 1]
    return concat_all(parts)[0]


def gen_diamond() -> GenericPoset:
    """``1 < 2, 1 < 3, 2 < 4, 3 < 4``: four elements, six antichains."""
    return GenericPoset([1, 2, 3, 4], [(1, 2), (1, 3), (2, 4), (3, 4)])


def gen_lemma_b3_fixture(p: GenericPoset, n: int) -> Taxonomy:
    """``gamma(2n) o {} o {} o {} o p o p`` as a taxonomy.

    The five joining elements are recorded in ``metadata["markers"]`` under
    ``"e-1" .. "e3"``.  Comparing ``2n`` with ``2|A(p)|`` decides where the
    best split of the size-1 itemset taxonomy falls relative to ``e0``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    empty = GenericPoset(())
    poset, markers = concat_all([gen_gamma(2 * n), empty, empty, empty, p, p])
    names = ["e-1", "e0", "e1", "e2", "e3"]
    return Taxonomy.from_poset(poset, metadata={"markers": dict(zip(names, markers))})


def gen_chain_plus_incomparable(n: int, length: int | None = None) -> GenericPoset:
    """A chain ``c0 < ... < c(length-1)`` next to one incomparable node ``"A"``.

    ``length`` defaults to ``2n + 1`` elements (a chain of length ``2n``).
    """
    if length is None:
        length = 2 * n + 1
    chain = [f"c{i}" for i in range(length)]
    return GenericPoset(chain + ["A"], list(zip(chain, chain[1:])))


# -- predicates ----------------------------------------------------------------

def gen_random_predicate(it, seed: int) -> tuple:
    """A random antichain of ``it`` (payloads), to be used as ground-truth MFIs.

    Small posets (at most 20 nodes) are sampled uniformly by rejection over
    random subsets; larger ones take the maximal elements of a random
    down-closed prefix of a random linear extension.
    """
    poset = _view(it)
    rng = random.Random(seed)
    n = len(poset)
    if n <= 20:
        while True:
            mask = rng.getrandbits(n) if n else 0
            if poset.is_antichain(mask):
                return poset.payloads(mask)
    # random linear extension: repeatedly pick a random minimal remaining node
    remaining = poset.full_mask
    order = []
    while remaining:
        ready = list(iter_bits(poset.minimal(remaining)))
        pick = rng.choice(ready)
        order.append(pick)
        remaining &= ~(1 << pick)
    cut = rng.randint(0, n)
    return poset.payloads(poset.maximal(to_mask(order[:cut])))


def all_mfi_sets(it) -> list[tuple]:
    """Every antichain of ``it``, as payload tuples."""
    poset = _view(it)
    return [poset.payloads(a) for a in enumerate_antichains(poset)]


def taxonomy_stats(tax: Taxonomy) -> dict:
    return {"items": len(tax), "edges": len(tax.cover_edges), "width": tax.width()}


def parse_generator_spec(spec: str) -> Taxonomy:
    """``chain:N``, ``flat:N``, ``random:N:P:SEED``, ``gamma:N`` or ``cycling``."""
    kind, _, rest = spec.partition(":")
    args = rest.split(":") if rest else []
    try:
        if kind == "chain" and len(args) == 1:
            return gen_chain(int(args[0]))
        if kind == "flat" and len(args) == 1:
            return gen_flat(int(args[0]))
        if kind == "random" and len(args) == 3:
            return gen_random_dag(int(args[0]), float(args[1]), int(args[2]))
        if kind == "cycling" and not args:
            return gen_cycling()
        if kind == "gamma" and len(args) == 1:
            return Taxonomy.from_poset(gen_gamma(int(args[0])))
    except ValueError as exc:
        raise ValueError(f"bad generator spec {spec!r}: {exc}") from None
    raise ValueError(f"bad generator spec {spec!r}; expected chain:N, flat:N, random:N:P:SEED, gamma:N or cycling")

