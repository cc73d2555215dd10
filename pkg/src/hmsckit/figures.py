"""The running examples used throughout the test suite.

Six small cMSCs over processes p, q and message a; a five-state HMSC whose
language is "a block of a-messages from p to q and a block of b-messages
from q to p, sends before receives on both processes"; the equivalent
two-machine CFM; and the first-order sentence describing the same language.
"""

from __future__ import annotations

from . import logic
from .cfm import Cfm, ProcessMachine
from .cmsc import CMsc, make_cmsc
from .hmsc import Hmsc
from .logic import ActIs, And, Exists, LeProc, Next, Not, OnProc


def m1() -> CMsc:
    """Two sends on p, the first matched by a receive on q."""
    return make_cmsc(
        "p q", "a", [("e", "p!q"), ("ep", "p!q", "a"), ("f", "q?p")], [("e", "f")]
    )


def m2() -> CMsc:
    """A single unmatched send p!q labeled a."""
    return make_cmsc("p q", "a", [("e", "p!q", "a")])


def m3() -> CMsc:
    """A single unmatched receive q?p labeled a."""
    return make_cmsc("p q", "a", [("f", "q?p", "a")])


def m4() -> CMsc:
    """One complete message from p to q."""
    return make_cmsc("p q", "a", [("e", "p!q"), ("f", "q?p")], [("e", "f")])


def m5() -> CMsc:
    """An unmatched send on p and an unmatched receive on q, unordered."""
    return make_cmsc("p q", "a", [("e", "p!q", "a"), ("f", "q?p", "a")])


def m6() -> CMsc:
    """Two complete messages from p to q."""
    return make_cmsc(
        "p q",
        "a",
        [("e1", "p!q"), ("e2", "p!q"), ("f1", "q?p"), ("f2", "q?p")],
        [("e1", "f1"), ("e2", "f2")],
    )


def fig1() -> dict[str, CMsc]:
    return {"M1": m1(), "M2": m2(), "M3": m3(), "M4": m4(), "M5": m5(), "M6": m6()}


def msg_send_p() -> CMsc:
    """Mp: unmatched send p!q labeled a."""
    return make_cmsc("p q", "a b", [("e", "p!q", "a")])


def msg_send_q() -> CMsc:
    """Mq: unmatched send q!p labeled b."""
    return make_cmsc("p q", "a b", [("e", "q!p", "b")])


def msg_recv_q() -> CMsc:
    """Mp': unmatched receive q?p labeled a."""
    return make_cmsc("p q", "a b", [("e", "q?p", "a")])


def msg_recv_p() -> CMsc:
    """Mq': unmatched receive p?q labeled b."""
    return make_cmsc("p q", "a b", [("e", "p?q", "b")])


def fig2_hmsc() -> Hmsc:
    """Five states in a row, each with a self-loop; accepting state 5."""
    mp, mq, mpp, mqq = msg_send_p(), msg_send_q(), msg_recv_q(), msg_recv_p()
    return Hmsc(
        states=("1", "2", "3", "4", "5"),
        initial="1",
        messages=("a", "b"),
        transitions=(
            ("1", mp, "1"),
            ("1", mp, "2"),
            ("2", mq, "2"),
            ("2", mq, "3"),
            ("3", mpp, "3"),
            ("3", mpp, "4"),
            ("4", mqq, "4"),
            ("4", mqq, "5"),
        ),
        accepting=frozenset({"5"}),
    )


def fig2_msc() -> CMsc:
    """The member of L(H) with three a-messages and two b-messages."""
    events = [(f"s{i}", "p!q") for i in range(3)]
    events += [(f"u{i}", "p?q") for i in range(2)]
    events += [(f"t{i}", "q!p") for i in range(2)]
    events += [(f"r{i}", "q?p") for i in range(3)]
    matches = [(f"s{i}", f"r{i}") for i in range(3)] + [
        (f"t{i}", f"u{i}") for i in range(2)
    ]
    return make_cmsc("p q", "a b", events, matches)


def fig3_cfm() -> Cfm:
    """Two machines: send a block, then receive the other block."""
    ap = ProcessMachine(
        process="p",
        states=("1", "2"),
        initial="1",
        transitions=(
            ("1", "p!q", "a", "1"),
            ("1", "p!q", "a", "2"),
            ("2", "p?q", "b", "2"),
        ),
    )
    aq = ProcessMachine(
        process="q",
        states=("1", "2"),
        initial="1",
        transitions=(
            ("1", "q!p", "b", "1"),
            ("1", "q!p", "b", "2"),
            ("2", "q?p", "a", "2"),
        ),
    )
    return Cfm(
        machines=(ap, aq),
        messages=("a", "b"),
        accepting=(("2", "2"),),
    )


def _maximal(z: str) -> logic.FoAst:
    return Not(Exists(z + "_n", Next(z, z + "_n")))


def sec24_formula() -> logic.EmsoFormula:
    """First-order sentence with the same language as the Fig. 2 HMSC.

    It requires maximal receive events on both processes (hence finiteness
    and nonemptiness of both blocks) and forbids a receive before a send on
    either process.
    """
    from .cmsc import Action

    p_recv = Action.parse("p?q")
    p_send = Action.parse("p!q")
    q_recv = Action.parse("q?p")
    q_send = Action.parse("q!p")
    part1 = Exists(
        "x",
        Exists(
            "y",
            And((ActIs("x", p_recv), _maximal("x"), ActIs("y", q_recv), _maximal("y"))),
        ),
    )
    part2 = Not(
        Exists(
            "x",
            Exists(
                "y",
                And((ActIs("x", p_recv), ActIs("y", p_send), LeProc("x", "y"), OnProc("x", "p"))),
            ),
        )
    )
    part3 = Not(
        Exists(
            "x",
            Exists(
                "y",
                And((ActIs("x", q_recv), ActIs("y", q_send), LeProc("x", "y"), OnProc("x", "q"))),
            ),
        )
    )
    return logic.EmsoFormula((), And((part1, part2, part3)))
