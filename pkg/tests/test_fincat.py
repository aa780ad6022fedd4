from __future__ import annotations

import json

import pytest
from hypothesis import given

from nervelab.errors import NoPullback, PreconditionError, ValidationError
from nervelab.fincat import (
    EdgeClass,
    FinCat,
    Square,
    class_properties,
    diagonal_of,
    factorization_check,
    is_cartesian_square,
    is_filtered,
    stable_under_pullback,
    validate_category,
)
from nervelab.poset import FinPoset
from nervelab.toys import one_compactification, two_compactifications, z2_sets

from strategies import posets


def _glb(P: FinPoset, a: int, b: int):
    lower = [w for w in range(len(P)) if P.leq(w, a) and P.leq(w, b)]
    top = [w for w in lower if all(P.leq(v, w) for v in lower)]
    return top[0] if top else None


def _arrow(C: FinCat, P: FinPoset, i: int, j: int) -> int:
    a, b = str(P.labels[i]), str(P.labels[j])
    return C.m(f"id_{a}" if i == j else f"{a}->{b}")


def test_identities_are_added():
    C = FinCat(["a", "b"], [("f", "a", "b")], [])
    assert C.n_morphisms == 3
    assert C.compose(C.m("f"), C.m("id_a")) == C.m("f")
    assert C.compose(C.m("id_b"), C.m("f")) == C.m("f")


def test_missing_composite_is_rejected():
    with pytest.raises(ValidationError, match="missing composite"):
        FinCat(["a", "b", "c"], [("f", "a", "b"), ("g", "b", "c"), ("h", "a", "c")], [])


def test_associativity_failure_is_reported():
    # Two endomorphisms e, k of x with e∘e = e, k∘k = e, e∘k = k, k∘e = e.
    # Then (k∘k)∘k = e∘k = k but k∘(k∘k) = k∘e = e.
    objs = ["x"]
    mors = [("e", "x", "x"), ("k", "x", "x")]
    comp = [("e", "e", "e"), ("k", "k", "e"), ("e", "k", "k"), ("k", "e", "e")]
    with pytest.raises(ValidationError, match="associativity"):
        FinCat(objs, mors, comp)


def test_wrong_composite_type_is_rejected():
    with pytest.raises(ValidationError, match="wrong source or target"):
        FinCat(["a", "b"], [("f", "a", "b")], [("f", "id_a", "id_a")])


def test_validate_category_roundtrip():
    C = two_compactifications().category
    doc = json.loads(json.dumps(C.to_json()))
    D = validate_category(doc)
    assert sorted(D.names) == sorted(C.names)
    for (g, f), h in C.comp.items():
        assert D.comp[D.m(C.names[g]), D.m(C.names[f])] == D.m(C.names[h])


def test_validate_category_malformed():
    with pytest.raises(ValidationError):
        validate_category({"objects": ["a"]})
    with pytest.raises(ValidationError):
        validate_category({"objects": ["a"], "morphisms": [{"id": "f", "src": "a", "dst": "zz"}]})


@given(posets(1, 5))
def test_poset_pullbacks_are_meets(P):
    C = FinCat.from_poset(P)
    n = len(P)
    for c in range(n):
        below = [i for i in range(n) if P.leq(i, c)]
        for a in below:
            for b in below:
                pb = C.pullback(_arrow(C, P, a, c), _arrow(C, P, b, c))
                m = _glb(P, a, b)
                if m is None:
                    assert pb is None
                else:
                    assert pb is not None and C.objects[pb.apex] == str(P.labels[m])


@given(posets(1, 5))
def test_poset_maps_are_mono(P):
    C = FinCat.from_poset(P)
    assert all(C.is_mono(m) for m in range(C.n_morphisms))
    assert C.isomorphisms == frozenset(C.identity)


def test_z2_hom_counts_match_orbit_formula():
    # An equivariant map out of a free orbit is fixed by the image of a generator;
    # out of the point it must land on a fixed point.
    C = z2_sets().category
    size = {"*": 1, "F": 2, "D": 4}
    fixed = {"*": 1, "F": 0, "D": 0}
    free_orbits = {"*": 0, "F": 1, "D": 2}
    total = 0
    for s in C.objects:
        for d in C.objects:
            expect = fixed[d] if s == "*" else size[d] ** free_orbits[s]
            assert len(C.hom[C.o(s)][C.o(d)]) == expect
            total += expect
    assert total == 29


def test_z2_non_mono_and_diagonal():
    C = z2_sets().category
    t = C.m("F*_00")
    assert not C.is_mono(t)
    a, b = C.mono_witness(t)
    assert a != b and C.comp[t, a] == C.comp[t, b]
    d = diagonal_of(C, t)
    assert C.objects[C.dst[d]] == "D"
    assert not C.is_iso(d)
    pb = C.pullback(t, t)
    assert C.objects[pb.apex] == "D"


def test_z2_has_no_pullback_somewhere():
    C = z2_sets().category
    assert not C.admits_pullbacks
    f, g = C.pullback_failure
    with pytest.raises(NoPullback):
        C.pullback(C.m(f), C.m(g), strict=True)


def test_cartesian_square_in_toy():
    C = one_compactification().category
    ids = {o: C.identity[C.o(o)] for o in C.objects}
    sq = Square.from_edges(C, top=ids["U"], left=C.m("q"), right=C.m("q"), bottom=ids["Xb"])
    assert is_cartesian_square(C, sq)
    bad = Square.from_edges(C, top=C.m("q"), left=C.m("q"), right=ids["Xb"], bottom=ids["Xb"])
    assert bad.commutes(C)
    assert not is_cartesian_square(C, bad)


def test_non_commuting_square_raises():
    C = two_compactifications().category
    ids = {o: C.identity[C.o(o)] for o in C.objects}
    sq = Square.from_edges(C, top=ids["U"], left=ids["U"], right=C.m("q1"), bottom=C.m("q1"))
    assert sq.commutes(C)
    with pytest.raises(PreconditionError):
        Square.from_edges(C, top=C.m("q1"), left=ids["U"], right=ids["X"], bottom=C.m("q1"))


def test_class_properties_poset_chain():
    P = FinPoset.chain(2)
    C = FinCat.from_poset(P)
    E = EdgeClass.from_names(C, ["0->2"], "E")
    rep = class_properties(C, E)
    assert rep["contains_identities"]["pass"]
    assert not rep["stable_under_pullback"]["pass"]
    assert rep["stable_under_pullback"]["witness"]["right"] == "0->2"
    assert not rep["admissible"]["pass"]
    full = class_properties(C, EdgeClass.all(C))
    assert all(v["pass"] for v in full.values())


def test_composition_witness():
    C = FinCat.from_poset(FinPoset.chain(2))
    E = EdgeClass.from_names(C, ["0->1", "1->2"])
    rep = class_properties(C, E)
    assert rep["stable_under_composition"]["witness"] == ("1->2", "0->1")


def test_stable_under_pullback_relative():
    C = FinCat.from_poset(FinPoset.chain(2))
    E = EdgeClass.from_names(C, ["0->2"])
    only_ids = EdgeClass(C, frozenset())
    assert stable_under_pullback(C, E, only_ids)["pass"]
    assert not stable_under_pullback(C, E)["pass"]


def test_factorization_table():
    m = two_compactifications()
    C = m.category
    rep = factorization_check(C, m.E("E1"), m.E("E2"))
    assert rep["pass"]
    assert sorted(rep["factorizations"]["j"]) == [("p1", "q1"), ("p2", "q2")]
    rep2 = factorization_check(C, m.E("E2"), m.E("E1"))
    assert not rep2["pass"]


def test_is_filtered():
    C = FinCat.from_poset(FinPoset.grid(1))
    ok, info = is_filtered(C)
    assert ok and info["cocones"]
    ok, info = is_filtered(FinCat.from_poset(FinPoset.antichain(2)))
    assert not ok and info["failure"] == "no cocone"
    par = FinCat(["a", "b"], [("f", "a", "b"), ("g", "a", "b")], [])
    ok, info = is_filtered(par)
    assert not ok and info["failure"] == "no coequalizing map"


def test_edgeclass_always_has_identities():
    C = one_compactification().category
    E = EdgeClass.from_names(C, ["p"])
    assert all(i in E for i in C.identity)
    with pytest.raises(ValidationError):
        EdgeClass.from_names(C, ["nope"])


def test_opposite_and_subcategory():
    C = two_compactifications().category
    Cop = C.opposite()
    f = C.m("r")
    assert Cop.src[Cop.m("r")] == Cop.o(C.objects[C.dst[f]])
    with pytest.raises(ValidationError):
        C.subcategory([C.m("q1"), C.m("p1")])
    S = C.subcategory([C.m("q1"), C.m("p1"), C.m("j")])
    assert S.n_morphisms == 4 + 3
