import random

import pytest

import brute
from crowdmine import (ClassificationState, GenericPoset, best_split_element,
                       construct_itemset_taxonomy, construct_k_itemset_taxonomy, count_antichains,
                       enumerate_antichains)
from crowdmine.generators import (all_taxonomies, concat, concat_all, gen_chain, gen_cycling,
                                  gen_diamond, gen_flat, gen_gamma, gen_lemma_b3_fixture,
                                  gen_random_dag, gen_random_predicate, parse_generator_spec)
from crowdmine.io import taxonomy_to_dict


def _random_poset(rng, max_n=6):
    n = rng.randint(0, max_n)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.35]
    return GenericPoset(range(n), edges)


def test_chain_and_flat():
    assert len(construct_itemset_taxonomy(gen_chain(3))) == 4
    assert len(construct_itemset_taxonomy(gen_flat(3))) == 8
    assert gen_chain(0).items == () and gen_flat(0).items == ()
    with pytest.raises(ValueError):
        gen_chain(-1)


def test_random_dag_deterministic():
    a, b = gen_random_dag(5, 0.3, seed=42), gen_random_dag(5, 0.3, seed=42)
    assert taxonomy_to_dict(a) == taxonomy_to_dict(b)
    assert a.down == b.down
    with pytest.raises(ValueError):
        gen_random_dag(3, 1.5, 0)


def test_random_dag_extremes():
    assert gen_random_dag(5, 0.0, 1).cover_edges == ()
    assert gen_random_dag(5, 1.0, 1).width() == 1


def test_all_taxonomies_counts():
    # natural labellings of posets on n points, deduplicated by order
    assert [sum(1 for t in all_taxonomies(4) if len(t) == n) for n in range(5)] == [1, 1, 2, 7, 40]


def test_concat_additive():
    rng = random.Random(7)
    for _ in range(100):
        p, q = _random_poset(rng), _random_poset(rng)
        pq = concat(p, q)
        assert len(pq) == len(p) + len(q) + 1
        assert count_antichains(pq) == count_antichains(p) + count_antichains(q)
        assert len(enumerate_antichains(pq)) == len(enumerate_antichains(p)) + len(enumerate_antichains(q))


def test_concat_structure():
    p, q = GenericPoset(range(2)), GenericPoset(range(1))
    pq, markers = concat_all([p, q])
    assert markers == [2]
    assert pq.lt(0, 2) and pq.lt(1, 2) and pq.lt(2, 3) and not pq.comparable(0, 1)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 12, 33, 64])
def test_gamma(n):
    g = gen_gamma(n)
    leq = {a: {b for b in range(len(g)) if g.leq(a, b)} for a in range(len(g))}
    assert len(brute.antichains(range(len(g)), leq)) == n


def test_gamma_one_is_empty():
    assert len(gen_gamma(1)) == 0
    assert enumerate_antichains(gen_gamma(1)) == [()]


def test_diamond():
    assert count_antichains(gen_diamond()) == 6
    got = {frozenset(gen_diamond().payloads(a)) for a in enumerate_antichains(gen_diamond())}
    assert got == {frozenset(s) for s in [(), (1,), (2,), (3,), (2, 3), (4,)]}


def _split_item(n):
    tax = gen_lemma_b3_fixture(gen_diamond(), n)
    k1 = construct_k_itemset_taxonomy(tax, 1)
    best = best_split_element(k1, ClassificationState(k1.as_poset))
    return tax, k1.antichains[best]


def test_split_fixture_markers():
    tax = gen_lemma_b3_fixture(gen_diamond(), 6)
    m = tax.metadata["markers"]
    assert list(m) == ["e-1", "e0", "e1", "e2", "e3"]
    chain = [tax.index(m[k]) for k in m]
    assert all(tax.lt(a, b) for a, b in zip(chain, chain[1:]))
    # e0 is comparable to everything
    e0 = tax.index(m["e0"])
    assert all(tax.comparable(e0, x) for x in range(len(tax)))


def test_split_fixture_positions():
    tax, best = _split_item(6)
    assert best == (tax.metadata["markers"]["e0"],)
    # |A(P)| = 6 > 5: at {e1} or below
    tax, best = _split_item(5)
    e1 = tax.index(tax.metadata["markers"]["e1"])
    assert len(best) == 1 and tax.leq(e1, tax.index(best[0]))
    # |A(P)| = 6 < 7: at {e-1} or above
    tax, best = _split_item(7)
    em1 = tax.index(tax.metadata["markers"]["e-1"])
    assert best == () or tax.leq(tax.index(best[0]), em1)


def test_random_predicate():
    it = construct_itemset_taxonomy(gen_cycling())
    assert gen_random_predicate(it, 3) == gen_random_predicate(it, 3)
    universe = {it.as_poset.payloads(a) for a in enumerate_antichains(it.as_poset)}
    assert len(universe) == 14
    seen = set()
    for seed in range(1000):
        m = gen_random_predicate(it, seed)
        assert m in universe
        seen.add(m)
    assert seen == universe


def test_random_predicate_large():
    it = construct_itemset_taxonomy(gen_flat(6))
    for seed in range(20):
        m = gen_random_predicate(it, seed)
        assert it.as_poset.is_antichain(sum(1 << it.node(x) for x in m))


def test_parse_spec():
    assert len(parse_generator_spec("chain:4")) == 4
    assert parse_generator_spec("cycling").label(3) == "bicycle_touring"
    assert taxonomy_to_dict(parse_generator_spec("random:5:0.3:1")) == taxonomy_to_dict(gen_random_dag(5, 0.3, 1))
    assert count_antichains(parse_generator_spec("gamma:12")) == 12
    for bad in ["chain", "tree:3", "chain:x", "random:3:0.2"]:
        with pytest.raises(ValueError):
            parse_generator_spec(bad)
