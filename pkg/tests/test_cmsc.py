"""Core chart model: validation, connectivity, canonical forms, linearizations."""

import random

import pytest

from hmsckit import figures
from hmsckit.cmsc import (
    Action,
    CapExceeded,
    Event,
    InvalidCMsc,
    canonicalize,
    communication_graph,
    connected,
    from_canonical,
    graph_is_connected,
    is_msc,
    linearizations,
    make_cmsc,
    recv,
    send,
    validate,
    weakly_connected,
)

from oracles import check_cmsc_conditions, random_cmsc


def test_action_parsing_and_channels():
    a = Action.parse("p!q")
    assert a.proc == "p" and a.channel == ("p", "q") and str(a) == "p!q"
    b = Action.parse("p?q")  # p receives from q
    assert b.proc == "p" and b.channel == ("q", "p") and str(b) == "p?q"
    assert send("p", "q") == a and recv("p", "q") == b
    with pytest.raises(ValueError):
        Action.parse("pq")
    with pytest.raises(ValueError):
        send("p", "p")


def test_fig1_m1_validates_with_unmatched_second_send():
    m1 = figures.m1()
    assert m1.n_events == 3
    unm = [m1.eids[i] for i in m1.unmatched]
    assert unm == ["ep"]
    assert m1.msgs[m1.index_of("ep")] == "a"


def test_single_unmatched_send_is_valid():
    m = make_cmsc("p q", "a", [("e", "p!q", "a")])
    assert m.unmatched == (0,)


def test_missing_label_raises_mu_domain():
    with pytest.raises(InvalidCMsc) as err:
        make_cmsc("p q", "a", [("e", "p!q"), ("ep", "p!q"), ("f", "q?p")], [("e", "f")])
    assert err.value.condition == "mu-domain"
    assert "ep" in err.value.events


def test_label_on_matched_event_raises():
    with pytest.raises(InvalidCMsc) as err:
        make_cmsc("p q", "a", [("e", "p!q", "a"), ("f", "q?p")], [("e", "f")])
    assert err.value.condition == "mu-domain"


def test_match_between_two_sends_raises_condition_i():
    with pytest.raises(InvalidCMsc) as err:
        make_cmsc("p q", "a", [("e", "p!q"), ("f", "p!q")], [("e", "f")])
    assert err.value.condition == "match-actions"


def test_fifo_violation_detected():
    # crossing matches on one channel
    with pytest.raises(InvalidCMsc) as err:
        make_cmsc(
            "p q",
            "a",
            [("s1", "p!q"), ("s2", "p!q"), ("r1", "q?p"), ("r2", "q?p")],
            [("s1", "r2"), ("s2", "r1")],
        )
    assert err.value.condition == "fifo"


def test_cyclic_event_graph_detected():
    with pytest.raises(InvalidCMsc) as err:
        make_cmsc(
            "p q",
            "",
            [("u", "p?q"), ("s", "p!q"), ("r", "q?p"), ("t", "q!p")],
            [("s", "r"), ("t", "u")],
        )
    assert err.value.condition == "cyclic"


def test_tail_condition_unmatched_send_before_matched():
    with pytest.raises(InvalidCMsc) as err:
        make_cmsc("p q", "a", [("g", "p!q", "a"), ("e", "p!q"), ("f", "q?p")], [("e", "f")])
    assert err.value.condition == "tail"


def test_tail_condition_unmatched_receive_after_matched():
    with pytest.raises(InvalidCMsc) as err:
        make_cmsc("p q", "a", [("e", "p!q"), ("f", "q?p"), ("g", "q?p", "a")], [("e", "f")])
    assert err.value.condition == "tail"


def test_undeclared_process_and_message():
    with pytest.raises(InvalidCMsc) as err:
        make_cmsc("p q", "a", [("e", "p!r", "a")])
    assert err.value.condition == "process"
    with pytest.raises(InvalidCMsc) as err:
        make_cmsc("p q", "a", [("e", "p!q", "b")])
    assert err.value.condition == "message"


def test_is_msc_on_figures():
    assert is_msc(figures.m4())
    assert not is_msc(figures.m2())
    assert is_msc(figures.m6())


def test_connected_matches_paper_examples():
    values = {name: connected(m) for name, m in figures.fig1().items()}
    assert values == {
        "M1": True,
        "M2": True,
        "M3": True,
        "M4": True,
        "M5": False,
        "M6": True,
    }


def test_single_process_chain_is_connected():
    m = make_cmsc("p q", "a", [("a0", "p!q", "a"), ("a1", "p!q", "a"), ("a2", "p!q", "a")])
    assert connected(m)


def test_connected_two_matched_messages():
    assert connected(figures.m6())


def test_weakly_connected_m5_and_m4():
    assert weakly_connected(figures.m5())
    assert weakly_connected(figures.m4())


def test_weakly_connected_false_without_receives():
    m = make_cmsc("p q r s", "a", [("e", "p!q", "a"), ("f", "r!s", "a")])
    assert not weakly_connected(m)


def test_communication_graph_shapes():
    nodes, edges = communication_graph(figures.m4())
    assert nodes == ("p", "q") and edges == frozenset({frozenset(("p", "q"))})
    nodes5, edges5 = communication_graph(figures.m5())
    assert edges5 == frozenset({frozenset(("p", "q"))})
    solo = make_cmsc("p q", "a", [("e", "p!q", "a")])
    nodes1, edges1 = communication_graph(solo)
    assert nodes1 == ("p",) and not edges1
    assert graph_is_connected(nodes1, edges1)


def test_canonicalize_identifies_isomorphic_copies():
    m4 = figures.m4()
    relabeled = make_cmsc("p q", "a", [("x", "p!q"), ("y", "q?p")], [("x", "y")])
    assert canonicalize(m4) == canonicalize(relabeled)
    assert m4 == relabeled and hash(m4) == hash(relabeled)
    assert canonicalize(m4) != canonicalize(figures.m5())


def test_canonical_round_trip_revalidates():
    for m in figures.fig1().values():
        again = from_canonical(canonicalize(m))
        assert again == m


def test_linearizations_counts():
    assert len(linearizations(figures.m4())) == 1
    assert len(linearizations(figures.m6())) == 2
    chain = make_cmsc("p q", "a", [(f"e{i}", "p!q", "a") for i in range(4)])
    assert len(linearizations(chain)) == 1


def test_linearizations_cap_exceeded_is_distinct():
    m5 = figures.m5()  # two unordered events: 2 linearizations
    assert len(linearizations(m5, cap=2)) == 2
    with pytest.raises(CapExceeded):
        linearizations(m5, cap=1)


def test_linearizations_respect_order_and_fifo():
    m = figures.fig2_msc()
    for lin in linearizations(m, cap=5000):
        pos = {eid: k for k, eid in enumerate(lin)}
        for i in range(m.n_events):
            for j in range(m.n_events):
                if m.le(i, j):
                    assert pos[m.eids[i]] <= pos[m.eids[j]]
        for s, r in m.matches:
            assert pos[m.eids[s]] < pos[m.eids[r]]


def test_random_cmscs_connected_implies_weakly_connected():
    rng = random.Random(7)
    for _ in range(150):
        m = random_cmsc(rng, processes=("p", "q", "r"), messages=("a", "b"), max_events=6)
        check_cmsc_conditions(m)
        if connected(m):
            assert weakly_connected(m)


def test_connected_equals_matched_channel_process_graph():
    """Event-graph connectivity coincides with connectivity of the graph on
    active processes whose edges are the channels of matched pairs."""
    rng = random.Random(11)
    for _ in range(200):
        m = random_cmsc(rng, processes=("p", "q", "r"), messages=("a",), max_events=8)
        nodes = m.active_processes
        edges = {frozenset(m.actions[s].channel) for s, _r in m.matches}
        assert connected(m) == graph_is_connected(nodes, edges)
