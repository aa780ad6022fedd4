"""Checkers for the conditions under which gluing and descent statements apply.

Every report is a list of rows ``{condition, pass, witness}``.  Stability
under pullback only quantifies over cospans whose pullback exists.
"""
from __future__ import annotations

from typing import Sequence

from ..errors import ValidationError
from ..fincat import EdgeClass, FinCat, class_properties, diagonal_of, factorization_check, stable_under_pullback


def _row(condition: str, ok: bool, witness=None) -> dict:
    return {"condition": condition, "pass": bool(ok), "witness": None if ok else witness}


def _subset_witness(C: FinCat, A: EdgeClass, B: EdgeClass):
    extra = sorted(A.members - B.members)
    return C.names[extra[0]] if extra else None


def _composition_witness(C: FinCat, E: EdgeClass):
    for g in sorted(E.members):
        for f in sorted(E.members):
            if C.src[g] == C.dst[f] and C.comp[g, f] not in E:
                return [C.names[g], C.names[f], C.names[C.comp[g, f]]]
    return None


def _composite_witness(C: FinCat, E1: EdgeClass, E2: EdgeClass, E0: EdgeClass):
    """``p∘q`` with ``p`` in ``E1``, ``q`` in ``E2`` outside ``E0``."""
    for p in sorted(E1.members):
        for q in sorted(E2.members):
            if C.src[p] == C.dst[q] and C.comp[p, q] not in E0:
                return [C.names[p], C.names[q]]
    return None


def subcategory_pullbacks(C: FinCat, E: EdgeClass) -> dict:
    """Whether the wide subcategory on ``E`` has pullbacks that stay pullbacks in ``C``."""
    bad = _composition_witness(C, E)
    if bad is not None:
        return _row(f"C_{E.name} admits pullbacks preserved by the inclusion", False, {"not a subcategory": bad})
    sub = C.subcategory(E.members)
    to_sub = {m: sub.mor_index[C.names[m]] for m in E.members}
    for f in sorted(E.members):
        for g in sorted(E.members):
            if C.dst[f] != C.dst[g]:
                continue
            pb = sub.pullback(to_sub[f], to_sub[g])
            if pb is None:
                return _row(
                    f"C_{E.name} admits pullbacks preserved by the inclusion",
                    False,
                    {"no pullback in subcategory": [C.names[f], C.names[g]]},
                )
            legs = (C.mor_index[sub.names[pb.leg_y]], C.mor_index[sub.names[pb.leg_z]])
            if not C.is_terminal_cone(f, g, (pb.apex, legs[0], legs[1])):
                return _row(
                    f"C_{E.name} admits pullbacks preserved by the inclusion",
                    False,
                    {"not a pullback in C": [C.names[f], C.names[g]]},
                )
    return _row(f"C_{E.name} admits pullbacks preserved by the inclusion", True)


def check_descent_hypotheses(
    C: FinCat,
    E0: EdgeClass,
    E1: EdgeClass,
    E2: EdgeClass,
    others: dict | None = None,
) -> list[dict]:
    """Conditions for the two-class descent and the filteredness of compactifications."""
    others = others or {}
    rows = []
    rows.append(_row("C admits pullbacks", C.admits_pullbacks, C.pullback_failure))
    rows.append(_row("E1 ⊆ E0", E1.members <= E0.members, _subset_witness(C, E1, E0)))
    rows.append(_row("E2 ⊆ E0", E2.members <= E0.members, _subset_witness(C, E2, E0)))
    w = _composition_witness(C, E0)
    rows.append(_row("E0 stable under composition", w is None, w))
    w = _composite_witness(C, E1, E2, E0)
    rows.append(_row("E1∘E2 ⊆ E0", w is None, w))
    for name, E in (("E1", E1), ("E2", E2)):
        w = _composition_witness(C, E)
        rows.append(_row(f"{name} stable under composition", w is None, w))
    for name, E in (("E1", E1), ("E2", E2)):
        props = class_properties(C, E)
        rows.append(_row(f"{name} stable under pullback", props["stable_under_pullback"]["pass"], props["stable_under_pullback"]["witness"]))
        rows.append(_row(f"{name} cancellation", props["cancellation"]["pass"], props["cancellation"]["witness"]))
    fc = factorization_check(C, E1, E2, sorted(E0.members))
    rows.append(_row("every f in E0 factors as p∘q, p in E1, q in E2", fc["pass"], fc["witness"]))
    rows.append(subcategory_pullbacks(C, E1))
    for name, Ek in sorted(others.items()):
        r = stable_under_pullback(C, E1, Ek)
        rows.append(_row(f"E1 stable under pullback by {name}", r["pass"], r["witness"]))
        r = stable_under_pullback(C, E2, Ek)
        rows.append(_row(f"E2 stable under pullback by {name}", r["pass"], r["witness"]))
        r = stable_under_pullback(C, Ek, E1)
        rows.append(_row(f"{name} stable under pullback by E1", r["pass"], r["witness"]))
    return rows


def build_truncation_chain(C: FinCat, E: EdgeClass, max_len: int = 16) -> list[EdgeClass] | None:
    """``E'_0`` = isomorphisms, ``E'_i`` = members of ``E`` whose diagonal is in ``E'_{i-1}``.

    Returns the chain up to the first term equal to ``E``, or ``None`` if
    it stops growing first.
    """
    chain = [EdgeClass.isos(C, "E'0")]
    if chain[0].members >= E.members:
        return chain
    for i in range(1, max_len + 1):
        prev = chain[-1]
        members = set()
        for f in E.members:
            if C.pullback(f, f) is None:
                continue
            if diagonal_of(C, f) in prev:
                members.add(f)
        nxt = EdgeClass(C, frozenset(members), f"E'{i}")
        if nxt.members == prev.members and prev.members != E.members:
            return None
        chain.append(nxt)
        if nxt.members >= E.members:
            return chain
    return None


def check_gluing_hypotheses(
    C: FinCat,
    E1: EdgeClass,
    E2: EdgeClass,
    chain: Sequence[EdgeClass] | None = None,
    others: dict | None = None,
    E0: EdgeClass | None = None,
) -> list[dict]:
    """Conditions on a diagonal-truncation chain ending at ``E1 ∩ E2``.

    With ``chain=None`` the chain is built by :func:`build_truncation_chain`.
    """
    others = others or {}
    E0 = E0 if E0 is not None else EdgeClass.all(C, "E0")
    rows = []
    rows.append(_row("C admits pullbacks", C.admits_pullbacks, C.pullback_failure))
    inter = E1 & E2
    built = chain is None
    if built:
        chain = build_truncation_chain(C, inter)
        if chain is None:
            rows.append(_row("truncation chain reaches E1∩E2", False, sorted(C.names[m] for m in inter.members)[:5]))
            return rows
    chain = list(chain)
    rows.append({"condition": "chain length", "pass": True, "witness": None, "value": len(chain)})
    isos = C.isomorphisms
    rows.append(_row("E'0 = isomorphisms", chain[0].members == isos, sorted(C.names[m] for m in chain[0].members ^ isos)[:1]))
    nested = next((i for i in range(1, len(chain)) if not chain[i - 1].members <= chain[i].members), None)
    rows.append(_row("chain is nested", nested is None, nested))
    rows.append(_row("last term = E1∩E2", chain[-1].members == inter.members, sorted(C.names[m] for m in chain[-1].members ^ inter.members)[:1]))
    for i, Ei in enumerate(chain):
        w = _composition_witness(C, Ei)
        rows.append(_row(f"E'{i} stable under composition", w is None, w))
        r = stable_under_pullback(C, Ei, E0)
        rows.append(_row(f"E'{i} stable under pullback by E0", r["pass"], r["witness"]))
    for i in range(1, len(chain)):
        bad = None
        for f in sorted(chain[i].members):
            pb = C.pullback(f, f)
            if pb is None:
                bad = {"morphism": C.names[f], "reason": "no pullback of f along itself"}
                break
            d = diagonal_of(C, f)
            if d not in chain[i - 1]:
                bad = {"morphism": C.names[f], "diagonal": C.names[d]}
                break
        rows.append(_row(f"diagonals of E'{i} lie in E'{i - 1}", bad is None, bad))
    for name, Ek in sorted(others.items()):
        for cname, E in (("E1", E1), ("E2", E2)):
            r = stable_under_pullback(C, E, Ek)
            rows.append(_row(f"{cname} stable under pullback by {name}", r["pass"], r["witness"]))
    return rows


def all_pass(rows: list[dict]) -> bool:
    return all(r["pass"] for r in rows)


def failing(rows: list[dict]) -> list[str]:
    return [r["condition"] for r in rows if not r["pass"]]
