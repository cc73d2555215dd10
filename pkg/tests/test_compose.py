"""Set-valued concatenation against the paper's worked examples and the
naive full-subset oracle."""

import random

from hmsckit import figures
from hmsckit.cmsc import is_msc, validate
from hmsckit.compose import concat_pair, concat_pair_naive, concat_sets

from oracles import check_cmsc_conditions, random_cmsc


def test_concat_m2_m3_gives_m4_and_m5():
    out = concat_pair(figures.m2(), figures.m3())
    assert out == frozenset({figures.m4(), figures.m5()})


def test_concat_m3_m2_gives_only_m5():
    assert concat_pair(figures.m3(), figures.m2()) == frozenset({figures.m5()})


def test_concat_m1_m3_forces_the_match():
    assert concat_pair(figures.m1(), figures.m3()) == frozenset({figures.m6()})


def test_concat_sets_unions_pairwise_results():
    l1 = frozenset({figures.m2()})
    l2 = frozenset({figures.m3()})
    assert concat_sets(l1, l2) == frozenset({figures.m4(), figures.m5()})
    assert concat_sets(frozenset(), l2) == frozenset()
    both = concat_sets(frozenset({figures.m2(), figures.m3()}), frozenset({figures.m2()}))
    expected = concat_pair(figures.m2(), figures.m2()) | concat_pair(
        figures.m3(), figures.m2()
    )
    assert both == expected


def test_every_output_validates_and_preserves_sizes():
    rng = random.Random(3)
    for _ in range(60):
        m1 = random_cmsc(rng, messages=("a", "b"), max_events=4)
        m2 = random_cmsc(rng, messages=("a", "b"), max_events=4)
        for out in concat_pair(m1, m2):
            check_cmsc_conditions(out)
            assert out.n_events == m1.n_events + m2.n_events
            # per-process orders preserved as sub-orders
            for p, chain in m1.chains.items():
                sub = [a for a in out.chains.get(p, ()) if out.eids[a].startswith("1.")]
                assert [out.eids[a][2:] for a in sub] == [m1.eids[i] for i in chain]


def test_contiguous_alignment_matches_naive_subset_oracle():
    rng = random.Random(5)
    for _ in range(80):
        m1 = random_cmsc(rng, messages=("a", "b"), max_events=4)
        m2 = random_cmsc(rng, messages=("a", "b"), max_events=4)
        assert concat_pair(m1, m2) == concat_pair_naive(m1, m2)


def test_concat_is_associative_on_random_sets():
    rng = random.Random(9)
    for _ in range(25):
        a = frozenset({random_cmsc(rng, max_events=3)})
        b = frozenset({random_cmsc(rng, max_events=3)})
        c = frozenset({random_cmsc(rng, max_events=2)})
        left = concat_sets(concat_sets(a, b), c)
        right = concat_sets(a, concat_sets(b, c))
        assert left == right


def test_plain_stacking_included_when_tail_allows():
    """The no-new-matches stacking appears whenever it stays well-formed."""
    rng = random.Random(13)
    hits = 0
    for _ in range(80):
        m1 = random_cmsc(rng, messages=("a",), max_events=3)
        m2 = random_cmsc(rng, messages=("a",), max_events=3)
        out = concat_pair(m1, m2)
        plain = None
        from hmsckit.cmsc import InvalidCMsc, stack

        try:
            plain = stack(m1, m2, [])
        except InvalidCMsc:
            continue
        hits += 1
        assert plain in out
    assert hits > 10


def test_result_can_be_empty_only_by_invalidity():
    # matched receive in the suffix with a pending same-action unmatched
    # receive forces the match; leaving both open is invalid too
    left = figures.m1()
    right = figures.m3()
    everything = concat_pair_naive(left, right)
    assert everything == frozenset({figures.m6()})
