"""Deterministic DOT export for charts and machines."""

from __future__ import annotations

from .cfm import Cfm
from .cmsc import CMsc
from .hmsc import Hmsc


def render_dot(obj, names: dict | None = None) -> str:
    if isinstance(obj, CMsc):
        return render_cmsc(obj)
    if isinstance(obj, Hmsc):
        return render_hmsc(obj, names)
    if isinstance(obj, Cfm):
        return render_cfm(obj)
    raise TypeError(f"cannot render {type(obj).__name__}")


def render_cmsc(m: CMsc) -> str:
    """Timelines as one column per process; matched pairs become arrows,
    unmatched events keep a message-labeled stub."""
    out = ["digraph cmsc {", "  rankdir=TB;", "  node [shape=box, fontsize=10];"]
    for p in m.active_processes:
        out.append(f"  subgraph cluster_{p} {{")
        out.append(f'    label="{p}";')
        for i in m.chains[p]:
            label = str(m.actions[i])
            if m.msgs[i] is not None:
                label += f" [{m.msgs[i]}]"
            out.append(f'    e{i} [label="{m.eids[i]}: {label}"];')
        chain = m.chains[p]
        for a, b in zip(chain, chain[1:]):
            out.append(f"    e{a} -> e{b};")
        out.append("  }")
    for s, r in m.matches:
        out.append(f"  e{s} -> e{r} [style=dashed, constraint=false];")
    out.append("}")
    return "\n".join(out) + "\n"


def render_hmsc(h: Hmsc, names: dict | None = None) -> str:
    names = names or {}
    out = ["digraph hmsc {", "  rankdir=LR;", "  node [shape=circle, fontsize=10];"]
    out.append('  init [shape=point, label=""];')
    for s in h.states:
        shape = "doublecircle" if s in h.accepting else "circle"
        mark = "*" if s in h.omega_accepting else ""
        out.append(f'  s_{s} [shape={shape}, label="{s}{mark}"];')
    out.append(f"  init -> s_{h.initial};")
    auto: dict = {}
    for src, label, dst in h.transitions:
        name = names.get(label.key())
        if name is None:
            name = auto.setdefault(label.key(), f"m{len(auto)}")
        out.append(f'  s_{src} -> s_{dst} [label="{name}"];')
    out.append("}")
    return "\n".join(out) + "\n"


def render_cfm(a: Cfm) -> str:
    out = ["digraph cfm {", "  rankdir=LR;", "  node [shape=circle, fontsize=10];"]
    for pm in a.machines:
        out.append(f"  subgraph cluster_{pm.process} {{")
        out.append(f'    label="{pm.process}";')
        out.append(f'    init_{pm.process} [shape=point, label=""];')
        for s in pm.states:
            out.append(f'    n_{pm.process}_{s} [label="{s}"];')
        out.append(f"    init_{pm.process} -> n_{pm.process}_{pm.initial};")
        for src, action, msg, dst in pm.transitions:
            out.append(
                f'    n_{pm.process}_{src} -> n_{pm.process}_{dst} [label="{action},{msg}"];'
            )
        out.append("  }")
    accept = "; ".join("(" + ",".join(t) + ")" for t in a.accepting)
    out.append(f'  label="accepting: {accept}";')
    out.append("}")
    return "\n".join(out) + "\n"
