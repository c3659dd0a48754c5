import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import brute
from crowdmine import (ClassificationState, GenericPoset, IncompleteState, NonMonotoneOracle,
                       SessionClosed, best_split_element, construct_itemset_taxonomy,
                       construct_k_itemset_taxonomy, count_antichains, derive_borders,
                       greedy_best_split_itemset, make_predicate_oracle, mine_alg1,
                       mine_chain_partition, mine_exhaustive, mine_greedy_anytime, mine_halving,
                       run_miner)
from crowdmine.experiment import halving_bound
from crowdmine.generators import (gen_chain, gen_chain_plus_incomparable, gen_flat,
                                  gen_random_dag, gen_random_predicate)
from crowdmine.miners import MINERS, MiningResult, greedy_scores, known_borders, split_scores
from crowdmine.oracle import InstrumentedOracle
from crowdmine.poset import iter_bits

COMPLETE = list(MINERS)


def all_false(_):
    return False


def all_true(_):
    return True


def _brute_borders(it, mfis):
    tax = it.base
    nodes, lt = brute.itemset_poset(tax.items, [(tax.elements[a], tax.elements[b]) for a, b in tax.cover_edges])
    leq = brute.closure(tax.items, [(tax.elements[a], tax.elements[b]) for a, b in tax.cover_edges])
    truth = lambda a: any(brute.itemset_leq(a, m, leq) for m in mfis)  # noqa: E731
    return brute.borders(nodes, lt, truth)


class TestState:
    def test_mark_frequent(self, cycling_it):
        st_ = ClassificationState(cycling_it.as_poset)
        st_.mark_frequent(cycling_it.node((3,)))
        got = {cycling_it.antichains[k] for k in iter_bits(st_.frequent)}
        assert got == {(3,), (1,), ()}

    def test_mark_infrequent_root(self, cycling_it):
        st_ = ClassificationState(cycling_it.as_poset)
        st_.mark_infrequent(cycling_it.node(()))
        assert st_.infrequent == cycling_it.as_poset.full_mask
        assert st_.unclassified == 0

    def test_contradiction(self, cycling_it):
        st_ = ClassificationState(cycling_it.as_poset)
        st_.mark_frequent(3)
        with pytest.raises(NonMonotoneOracle):
            st_.mark_infrequent(3)

    def test_derive_borders(self, cycling_it):
        poset = cycling_it.as_poset
        st_ = ClassificationState(poset)
        for a in [(), (1,), (2,), (3,), (4,), (1, 2)]:
            st_.mark_frequent(cycling_it.node(a))
        with pytest.raises(IncompleteState):
            derive_borders(st_)
        for a in [(2, 3), (3, 4)]:
            st_.mark_infrequent(cycling_it.node(a))
        assert derive_borders(st_) == ([(3,), (4,)], [(2, 3)])

    def test_derive_extremes(self, cycling_it):
        poset = cycling_it.as_poset
        st_ = ClassificationState(poset)
        st_.mark_frequent(cycling_it.node((3, 4)))
        assert derive_borders(st_) == ([(3, 4)], [])
        st_ = ClassificationState(poset)
        st_.mark_infrequent(0)
        assert derive_borders(st_) == ([], [()])

    def test_known_borders_partial(self, cycling_it):
        st_ = ClassificationState(cycling_it.as_poset)
        st_.mark_infrequent(cycling_it.node((2, 3)))
        st_.mark_frequent(cycling_it.node((3,)))
        # the only child of {3} is {2,3}; {2,3} still has an unclassified parent {1,2}
        assert known_borders(st_) == ([(3,)], [])
        st_.mark_frequent(cycling_it.node((1, 2)))
        assert known_borders(st_) == ([(3,)], [(2, 3)])


class TestAlg1:
    @pytest.mark.parametrize("strategy", ["any", "minimal", "maximal", "dual"])
    def test_cycling(self, cycling_it, strategy):
        r = mine_alg1(cycling_it, make_predicate_oracle(cycling_it, [(3,), (4,)]), strategy)
        assert r.completed
        assert r.mfis == [(3,), (4,)] and r.miis == [(2, 3)]
        assert r.crowd_queries <= 4 * 3

    @pytest.mark.parametrize("strategy", ["any", "minimal", "maximal", "dual"])
    def test_all_false(self, cycling_it, strategy):
        r = mine_alg1(cycling_it, all_false, strategy)
        assert r.mfis == [] and r.miis == [()]
        assert r.crowd_queries <= 1 + 4

    def test_all_true_flat(self):
        it = construct_itemset_taxonomy(gen_flat(3))
        r = mine_alg1(it, all_true)
        assert r.mfis == [(0, 1, 2)] and r.miis == []
        assert r.crowd_queries <= 3 * 2

    def test_literal_subtraction_counterexample(self):
        # chain 1<2<3 true on {} and {1}: the MII is {2}, not {3}
        it = construct_itemset_taxonomy(gen_chain(3))
        for s in ["any", "minimal", "maximal", "dual"]:
            r = mine_alg1(it, make_predicate_oracle(it, [(0,)]), s)
            assert r.mfis == [(0,)] and r.miis == [(1,)]

    def test_gated(self, cycling):
        with pytest.raises(TypeError):
            mine_alg1(construct_k_itemset_taxonomy(cycling, 1), all_true)

    def test_bad_strategy(self, cycling_it):
        with pytest.raises(ValueError):
            mine_alg1(cycling_it, all_true, "sideways")

    @given(st.integers(0, 6), st.floats(0, 1), st.integers(0, 10**6), st.integers(0, 10**6))
    @settings(max_examples=80, deadline=None)
    def test_bounds(self, n, p, seed, pseed):
        it = construct_itemset_taxonomy(gen_random_dag(n, p, seed))
        oracle = make_predicate_oracle(it, gen_random_predicate(it, pseed))
        for s in ["any", "minimal", "maximal", "dual"]:
            r = mine_alg1(it, oracle, s)
            f, i = len(r.mfis), len(r.miis)
            assert r.crowd_queries <= n * (f + i) + f + i
            if s == "minimal":
                assert r.crowd_queries <= i + (n + 1) * f


class TestExhaustive:
    def test_counts(self, cycling_it):
        r = mine_exhaustive(cycling_it, make_predicate_oracle(cycling_it, [(3,), (4,)]))
        assert r.crowd_queries == 8
        assert (r.mfis, r.miis) == ([(3,), (4,)], [(2, 3)])

    def test_empty_taxonomy(self):
        it = construct_itemset_taxonomy(gen_flat(0))
        assert mine_exhaustive(it, all_true).crowd_queries == 1

    def test_non_monotone(self, cycling_it):
        with pytest.raises(NonMonotoneOracle):
            mine_exhaustive(cycling_it, lambda a: a != (1,))

    def test_plain_poset(self):
        p = GenericPoset("abc", [("a", "b")])
        r = mine_exhaustive(p, make_predicate_oracle(p, ["a"]))
        assert r.mfis == ["a"] and r.miis == ["b", "c"]


class TestBestSplit:
    @pytest.mark.parametrize("m", range(0, 6))
    def test_chain_middle(self, m):
        p = GenericPoset(range(2 * m + 1), [(i, i + 1) for i in range(2 * m)])
        st_ = ClassificationState(p)
        assert best_split_element(p, st_) == m
        s, t = split_scores(p, st_)[m]
        assert min(s, t) == m + 1 and s + t == 2 * m + 2

    def test_single(self):
        p = GenericPoset(["x"])
        assert best_split_element(p, ClassificationState(p)) == 0

    def test_none_left(self):
        p = GenericPoset(["x"])
        st_ = ClassificationState(p)
        st_.mark_frequent(0)
        with pytest.raises(IncompleteState):
            best_split_element(p, st_)

    @given(st.integers(1, 6), st.floats(0, 1), st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_scores_against_brute(self, n, p, seed):
        poset = GenericPoset(range(n), gen_random_dag(n, p, seed).cover_edges)
        st_ = ClassificationState(poset)
        leq = {a: set(iter_bits(poset.up[a])) for a in range(n)}
        sols = brute.antichains(range(n), leq)
        for a, (s, t) in split_scores(poset, st_).items():
            # s: solutions holding a or a descendant of a
            assert s == sum(1 for x in sols if any(y in leq[a] for y in x))
            assert s + t == len(sols)

    def test_halving_chain7(self):
        it = construct_itemset_taxonomy(gen_chain(7))
        worst = 0
        for mfis in [[], [()]] + [[(k,)] for k in range(7)]:
            r = mine_halving(it, make_predicate_oracle(it, mfis))
            assert r.mfis == mfis
            worst = max(worst, r.crowd_queries)
        # 9 outcomes cannot be told apart with 3 yes/no answers
        assert worst == 4 == math.ceil(math.log2(9))
        assert worst <= halving_bound(9)

    def test_halving_all_false(self, cycling_it):
        r = mine_halving(cycling_it, all_false)
        assert r.completed and r.miis == [()]

    @given(st.integers(0, 5), st.floats(0, 1), st.integers(0, 10**6), st.integers(0, 10**6))
    @settings(max_examples=60, deadline=None)
    def test_halving_bound(self, n, p, seed, pseed):
        it = construct_itemset_taxonomy(gen_random_dag(n, p, seed))
        r = mine_halving(it, make_predicate_oracle(it, gen_random_predicate(it, pseed)))
        assert r.crowd_queries <= halving_bound(count_antichains(it.as_poset))


class TestChainPartition:
    @pytest.mark.parametrize("n", range(0, 9))
    def test_chain(self, n):
        it = construct_itemset_taxonomy(gen_chain(n))
        for k in range(-1, n):
            mfis = [] if k < 0 else [(k,)]
            r = mine_chain_partition(it, make_predicate_oracle(it, mfis))
            assert r.info["chains"] == 1
            assert r.mfis == mfis
            assert r.crowd_queries <= math.ceil(math.log2(n + 2))

    def test_flat_all_true(self):
        it = construct_itemset_taxonomy(gen_flat(3))
        r = mine_chain_partition(it, all_true)
        assert r.info["chains"] == 3
        assert r.crowd_queries <= 3 * math.ceil(math.log2(r.info["longest_chain"] + 1))
        assert r.mfis == [(0, 1, 2)]

    def test_cycling(self, cycling_it):
        r = mine_chain_partition(cycling_it, make_predicate_oracle(cycling_it, [(3,), (4,)]))
        assert (r.mfis, r.miis) == ([(3,), (4,)], [(2, 3)])


class TestGreedy:
    def test_chain_plus_incomparable(self):
        p = gen_chain_plus_incomparable(3)
        st_ = ClassificationState(p)
        best = greedy_best_split_itemset(p, st_)
        assert p.elements[best] == "c3"
        assert min(greedy_scores(p, st_)[best]) == 4
        assert min(greedy_scores(p, st_)[p.index("A")]) == 1

    def test_chain_of_2n_elements(self):
        n = 3
        p = gen_chain_plus_incomparable(n, length=2 * n)
        assert count_antichains(p) == 2 + 4 * n
        st_ = ClassificationState(p)
        best = greedy_best_split_itemset(p, st_)
        assert min(greedy_scores(p, st_)[best]) == n

    def test_single_and_flat(self):
        p = GenericPoset(["x"])
        assert greedy_best_split_itemset(p, ClassificationState(p)) == 0
        flat = GenericPoset(range(5))
        scores = greedy_scores(flat, ClassificationState(flat))
        assert all(min(v) == 1 for v in scores.values())

    def test_budget_zero(self, cycling_it):
        r = mine_greedy_anytime(cycling_it, all_true, budget=0)
        assert not r.completed and r.crowd_queries == 0
        assert r.state.unclassified == cycling_it.as_poset.full_mask

    def test_negative_budget(self, cycling_it):
        with pytest.raises(ValueError):
            mine_greedy_anytime(cycling_it, all_true, budget=-1)

    def test_large_budget(self, cycling_it):
        o = make_predicate_oracle(cycling_it, [(3,), (4,)])
        r = mine_greedy_anytime(cycling_it, o, budget=100)
        ex = mine_exhaustive(cycling_it, o)
        assert r.completed and (r.mfis, r.miis) == (ex.mfis, ex.miis)

    @given(st.integers(0, 5), st.floats(0, 1), st.integers(0, 10**6), st.integers(0, 10**6),
           st.integers(0, 10))
    @settings(max_examples=60, deadline=None)
    def test_anytime(self, n, p, seed, pseed, budget):
        it = construct_itemset_taxonomy(gen_random_dag(n, p, seed))
        mfis = gen_random_predicate(it, pseed)
        r = mine_greedy_anytime(it, make_predicate_oracle(it, mfis), budget=budget)
        assert r.crowd_queries <= budget
        progress = r.info["classified_after"]
        assert all(a < b for a, b in zip(progress, progress[1:]))
        true_mfis, true_miis = _brute_borders(it, mfis)
        assert {frozenset(m) for m in r.mfis} <= true_mfis
        assert {frozenset(m) for m in r.miis} <= true_miis


class TestAgreement:
    @given(st.integers(0, 5), st.floats(0, 1), st.integers(0, 10**6), st.integers(0, 10**6))
    @settings(max_examples=60, deadline=None)
    def test_all_miners_match_brute(self, n, p, seed, pseed):
        it = construct_itemset_taxonomy(gen_random_dag(n, p, seed))
        mfis = gen_random_predicate(it, pseed)
        want = _brute_borders(it, mfis)
        oracle = make_predicate_oracle(it, mfis)
        for name in COMPLETE:
            r = run_miner(name, it, oracle)
            assert r.completed
            assert ({frozenset(m) for m in r.mfis}, {frozenset(m) for m in r.miis}) == want, name
            assert set(r.mfis) | set(r.miis) <= r.queried

    @pytest.mark.parametrize("name", ["exhaustive", "halving", "chain", "greedy"])
    def test_k_itemsets(self, cycling, name):
        kit = construct_k_itemset_taxonomy(cycling, 1)
        o = make_predicate_oracle(kit, [(3,), (2,)])
        r = run_miner(name, kit, o)
        assert r.mfis == [(2,), (3,)] and r.miis == [(4,)]

    def test_shared_oracle_counts_delta(self, cycling, cycling_it):
        shared = InstrumentedOracle(make_predicate_oracle(cycling_it, [(3,), (4,)]), cycling)
        first = mine_exhaustive(cycling_it, shared)
        second = mine_alg1(cycling_it, shared)
        assert first.crowd_queries == 8 and second.crowd_queries == 0


class TestSessionClosed:
    def test_state_attached(self, cycling_it):
        answers = iter([True, True])

        def flaky(_):
            try:
                return next(answers)
            except StopIteration:
                raise SessionClosed() from None

        with pytest.raises(SessionClosed) as info:
            mine_alg1(cycling_it, flaky, "minimal")
        state = info.value.state
        assert isinstance(state, ClassificationState)
        assert state.frequent and state.unclassified


class TestResult:
    def test_roundtrip(self, cycling_it):
        r = mine_alg1(cycling_it, make_predicate_oracle(cycling_it, [(3,), (4,)]))
        back = MiningResult.from_dict(r.to_dict())
        assert back == r
        assert back.to_dict() == r.to_dict()
