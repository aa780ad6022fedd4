from __future__ import annotations

import json
import random
from itertools import product
from math import comb

import pytest
from hypothesis import given, strategies as st

from nervelab.errors import PreconditionError, ValidationError
from nervelab.fincat import EdgeClass, FinCat, Square, is_filtered, validate_category
from nervelab.multinerve import (
    GridFunctor,
    Representable,
    RestrictedNerve,
    Tiling,
    all_chains,
    alpha_beta_sections,
    box_product,
    build_truncation_chain,
    cartesianize,
    cell_count,
    check_descent_hypotheses,
    check_gluing,
    check_gluing_hypotheses,
    compactifications,
    failing,
    gluing_map,
    grid_points,
    komp_category,
    make_chain,
    square_decomposition,
)
from nervelab.poset import FinPoset, crt
from nervelab.simplicial import standard_complex
from nervelab.toys import (
    all_builders,
    boolean_lattice,
    bundled,
    grid_model,
    model_from_json,
    negative_controls,
    one_compactification,
    positive_models,
    two_compactifications,
    z2_sets,
)


# --- independent oracle for thin categories -------------------------------


def _hom(C: FinCat, a: int, b: int):
    ms = C.hom[a][b]
    return ms[0] if ms else None


def _glb(C: FinCat, a: int, b: int, c: int) -> bool:
    """``c`` is a greatest lower bound of ``a`` and ``b`` in a thin category."""
    n = len(C.objects)
    if _hom(C, c, a) is None or _hom(C, c, b) is None:
        return False
    return all(_hom(C, w, c) is not None for w in range(n) if _hom(C, w, a) is not None and _hom(C, w, b) is not None)


def _oracle_count(C: FinCat, marking, shape) -> int:
    """Monotone maps grid -> C with every straight edge marked and every
    rectangle a meet square."""
    pts = grid_points(shape)
    k = len(shape)
    n = len(C.objects)

    def ok(obj):
        for p in pts:
            for q in pts:
                diff = [i for i in range(k) if p[i] != q[i]]
                if len(diff) == 1 and p[diff[0]] < q[diff[0]]:
                    m = _hom(C, obj[p], obj[q])
                    if m is None or m not in marking[diff[0]]:
                        return False
        for p in pts:
            for i in range(k):
                for j in range(i + 1, k):
                    for a in range(1, shape[i] - p[i] + 1):
                        for b in range(1, shape[j] - p[j] + 1):
                            pi = tuple(v + a * (t == i) for t, v in enumerate(p))
                            pj = tuple(v + b * (t == j) for t, v in enumerate(p))
                            if not _glb(C, obj[pi], obj[pj], obj[p]):
                                return False
        return True

    count = 0

    def rec(idx, obj):
        nonlocal count
        if idx == len(pts):
            count += ok(obj)
            return
        p = pts[idx]
        preds = [tuple(v - (t == i) for t, v in enumerate(p)) for i in range(k) if p[i] > 0]
        for o in range(n):
            if all(_hom(C, obj[q], o) is not None for q in preds):
                obj[p] = o
                rec(idx + 1, obj)
                del obj[p]

    rec(0, {})
    return count


# --- box products ---------------------------------------------------------


def test_box_counts_and_degenerate_cells():
    R = Representable([1, 1])
    assert cell_count(R, (0, 1)) == 6
    assert cell_count(R, (0, 1), nondegenerate=True) == 2
    assert cell_count(R, (1, 1)) == 9
    assert cell_count(R, (1, 1), nondegenerate=True) == 1
    B = box_product(standard_complex("simplex", 1, D=3), standard_complex("simplex", 1, D=3))
    for shape in product(range(3), repeat=2):
        assert cell_count(B, shape) == cell_count(R, shape)
        assert cell_count(B, shape, nondegenerate=True) == cell_count(R, shape, nondegenerate=True)


@given(st.lists(st.integers(0, 2), min_size=1, max_size=3), st.data())
def test_representable_counts_formula(ns, data):
    shape = data.draw(st.tuples(*[st.integers(0, 3) for _ in ns]))
    R = Representable(ns)
    total, nd = 1, 1
    for m, n in zip(shape, ns):
        total *= comb(n + m + 1, m + 1)
        nd *= comb(n + 1, m + 1)
    assert cell_count(R, shape) == total
    assert cell_count(R, shape, nondegenerate=True) == nd


def test_box_faces_act_per_direction():
    R = Representable([2, 1])
    x = ((0, 1, 2), (0, 1))
    assert R.face(x, 1, 1) == ((0, 2), (0, 1))
    assert R.face(x, 2, 0) == ((0, 1, 2), (1,))
    assert R.degeneracy(x, 2, 0) == ((0, 1, 2), (0, 0, 1))
    with pytest.raises(PreconditionError):
        R.face(((0,), (1,)), 1, 0)


# --- restricted nerves ----------------------------------------------------


@pytest.mark.parametrize("build", [one_compactification, two_compactifications, grid_model, boolean_lattice])
@pytest.mark.parametrize("shape", [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)])
def test_grid_counts_match_oracle(build, shape):
    m = build()
    C = m.category
    marking = [m.E("E1"), m.E("E2")]
    N = RestrictedNerve(C, marking)
    assert len(N.simplices(shape)) == _oracle_count(C, marking, shape)


def test_three_direction_counts_match_oracle():
    m = two_compactifications()
    marking = [m.E("E1"), m.E("E2"), m.E("E0")]
    N = RestrictedNerve(m.category, marking)
    for shape in [(1, 1, 1), (2, 1, 1)]:
        assert len(N.simplices(shape)) == _oracle_count(m.category, marking, shape)


@pytest.mark.parametrize("build", [two_compactifications, grid_model])
def test_twist_is_a_reindexing(build):
    m = build()
    N = RestrictedNerve(m.category, [m.E("E1"), m.E("E2"), m.E("E0")])
    for shape in [(1, 1, 1), (1, 2, 1)]:
        plain = N.simplices(shape)
        twisted = N.simplices(shape, {3})
        assert len(plain) == len(twisted)
        upright = {GridFunctor(shape, (), *F.to_upright()) for F in twisted}
        assert upright == set(plain)
        for F in twisted:
            assert N.is_simplex(F)


def test_restriction_identities():
    m = grid_model()
    N = RestrictedNerve(m.category, [m.E("E1"), m.E("E2")])
    for F in N.simplices((2, 2))[:40]:
        for d in (1, 2):
            for j in range(3):
                for i in range(j):
                    assert F.face(d, j).face(d, i) == F.face(d, i).face(d, j - 1)
                assert F.degeneracy(d, j).face(d, j) == F
                assert F.degeneracy(d, j).face(d, j + 1) == F
        assert F.face(1, 0).face(2, 1) == F.face(2, 1).face(1, 0)
        assert N.is_simplex(F.face(1, 2)) and N.is_simplex(F.degeneracy(2, 0))
        assert F.diagonal_face(1) == F.restrict([(0, 2), (0, 2)])


def test_violation_reports_bad_edges():
    m = two_compactifications()
    C = m.category
    N = RestrictedNerve(C, [m.E("E2"), m.E("E1")])
    F = RestrictedNerve(C, [m.E("E1"), m.E("E2")]).simplices((1, 1))
    bad = [G for G in F if not N.is_simplex(G)]
    assert bad
    assert N.violation(bad[0]) is not None
    with pytest.raises(ValidationError):
        N.simplices((1, 1), {3})


def test_tiling_all_admits_more_squares():
    m = boolean_lattice()
    C = m.category
    cart = RestrictedNerve(C, [m.E("E1"), m.E("E2")])
    loose = RestrictedNerve(C, [m.E("E1"), m.E("E2")], Tiling(C, "ALL"))
    assert len(loose.simplices((1, 1))) > len(cart.simplices((1, 1)))
    # every commuting square in a thin category is admitted under ALL
    assert len(loose.simplices((1, 1))) == sum(
        1 for a, b, c, d in product(range(8), repeat=4)
        if all(C.hom[x][y] for x, y in ((a, b), (a, c), (b, d), (c, d)))
    )


# --- gluing ---------------------------------------------------------------


@pytest.mark.parametrize("build", [one_compactification, two_compactifications])
def test_gluing_commutes_and_is_bijective(build):
    m = build()
    C = m.category
    source = RestrictedNerve(C, [m.E("E1"), m.E("E2")])
    target = RestrictedNerve(C, [m.E("E0")])
    res = check_gluing(source, target, 3)
    assert res["pass"], res["rows"]
    for ch in all_chains(C, 1, m.E("E0")):
        assert compactifications(C, m.E("E1"), m.E("E2"), ch)


def test_gluing_with_twisted_third_direction():
    m = two_compactifications()
    C = m.category
    source = RestrictedNerve(C, [m.E("E1"), m.E("E2"), m.E("E0")])
    target = RestrictedNerve(C, [m.E("E0"), m.E("E0")])
    assert check_gluing(source, target, 1, {3})["pass"]


def test_gluing_map_shape():
    m = two_compactifications()
    N = RestrictedNerve(m.category, [m.E("E1"), m.E("E2")])
    F = N.simplices((1, 1))[-1]
    G = gluing_map(F)
    assert G.shape == (1,)
    assert G.mor[(0,), (1,)] == F.mor[(0, 0), (1, 1)]
    with pytest.raises(PreconditionError):
        gluing_map(N.simplices((1, 0))[0])


def test_gluing_target_mismatch_fails():
    m = two_compactifications()
    C = m.category
    source = RestrictedNerve(C, [m.E("E1"), m.E("E2")])
    target = RestrictedNerve(C, [m.E("E2")])
    assert not check_gluing(source, target, 1)["pass"]


# --- compactifications ----------------------------------------------------


def test_komp_toy_counts():
    m1 = one_compactification()
    K1 = komp_category(m1.category, m1.E("E1"), m1.E("E2"), "j", 1)
    assert K1.summary()["objects"] == 1 and K1.category.n_morphisms == 1
    m2 = two_compactifications()
    K2 = komp_category(m2.category, m2.E("E1"), m2.E("E2"), "j", 1)
    assert K2.summary()["objects"] == 2 and K2.category.n_morphisms == 3


def test_komp_objects_are_factorizations():
    m = boolean_lattice()
    C = m.category
    for ch in all_chains(C, 1):
        found = compactifications(C, m.E("E1"), m.E("E2"), ch)
        f = ch.maps[0]
        expect = sum(1 for o in range(len(C.objects)) if C.hom[C.src[f]][o] and C.hom[o][C.dst[f]])
        assert len(found) == expect


def test_komp_two_simplex():
    m = grid_model()
    C = m.category
    ch = make_chain(C, ["00->01", "01->11"])
    K = komp_category(C, m.E("E1"), m.E("E2"), ch, 2)
    assert K.n == 2 and K.functors


def test_komp_rejects_non_composable_class():
    C = FinCat.from_poset(FinPoset.chain(2))
    E = EdgeClass.from_names(C, ["0->1", "1->2"])
    with pytest.raises(PreconditionError):
        komp_category(C, E, EdgeClass.all(C), "0->2", 1)
    with pytest.raises(ValidationError):
        komp_category(C, E, E, "0->2", 3)
    with pytest.raises(ValidationError):
        make_chain(C, ["1->2", "0->1"])


# --- cartesianization -----------------------------------------------------


def _random_b3_grid(rng: random.Random, n: int) -> GridFunctor:
    C = boolean_lattice().category
    val = {}
    for a in range(n + 1):
        for b in range(n + 1):
            bits = rng.getrandbits(3) & rng.getrandbits(3)
            for q in ((a - 1, b), (a, b - 1)):
                if q in val:
                    bits |= val[q]
            val[a, b] = bits
    obj = {p: C.o(format(v, "03b")) for p, v in val.items()}
    pts = sorted(obj)
    mor = {(p, q): C.hom[obj[p]][obj[q]][0] for p in pts for q in pts if p[0] <= q[0] and p[1] <= q[1]}
    return GridFunctor((n, n), (), obj, mor)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_cartesianize_random_b3(n):
    rng = random.Random(n)
    C = boolean_lattice().category
    for _ in range(5):
        K = cartesianize(C, _random_b3_grid(rng, n))
        assert K.restriction_violations() == []
        assert K.exact_square_violations() == []


def test_cartesianize_needs_pullbacks():
    m = z2_sets()
    C = m.category
    F = C.o("F")
    s = C.o("*")
    t = C.m("F*_00")
    obj = {(0, 0): F, (0, 1): s, (1, 0): F, (1, 1): s}
    mor = {(p, p): C.identity[o] for p, o in obj.items()}
    mor.update({((0, 0), (0, 1)): t, ((0, 0), (1, 0)): C.identity[F], ((0, 1), (1, 1)): C.identity[s],
                ((1, 0), (1, 1)): t, ((0, 0), (1, 1)): t})
    K = cartesianize(C, GridFunctor((1, 1), (), obj, mor))
    assert K.restriction_violations() == []
    with pytest.raises(PreconditionError):
        cartesianize(C, GridFunctor((1, 2), (), {}, {}))


def test_alpha_beta_sections():
    L = crt(2)
    rep = alpha_beta_sections(L, [L.xi(1, 2), L.sigma(1, 2)])
    assert rep.monotone and rep.meet_identity
    assert rep.interval == (1, 2)
    with pytest.raises(ValidationError):
        alpha_beta_sections(L, [L.sigma(1, 2), L.xi(0, 0)])


def test_square_decomposition():
    m = z2_sets()
    C = m.category
    t = C.m("F*_00")
    F = C.o("F")
    sq = Square.from_edges(C, top=C.identity[F], left=C.identity[F], right=t, bottom=t)
    dec = square_decomposition(C, sq, EdgeClass.isos(C))
    assert C.objects[dec.apex] == "D"
    assert not dec.comparison_is_iso and not dec.in_class


# --- hypotheses -----------------------------------------------------------


@pytest.mark.parametrize("model", positive_models(), ids=lambda m: m.name)
def test_positive_models_pass(model):
    C = model.category
    E0, E1, E2 = model.E("E0"), model.E("E1"), model.E("E2")
    assert failing(check_descent_hypotheses(C, E0, E1, E2)) == []
    assert failing(check_gluing_hypotheses(C, E1, E2, None, {}, E0)) == []


CHAIN_LENGTHS = {"toy1": 1, "toy2": 1, "grid": 2, "b3": 2, "z2sets": 3}


@pytest.mark.parametrize("name", sorted(CHAIN_LENGTHS))
def test_truncation_chain_length(name):
    m = all_builders()[name]()
    chain = build_truncation_chain(m.category, m.E("E1") & m.E("E2"))
    assert len(chain) == CHAIN_LENGTHS[name]


def test_z2_chain_terms():
    m = z2_sets()
    C = m.category
    chain = build_truncation_chain(C, m.E("E1") & m.E("E2"))
    assert chain[0].members == C.isomorphisms
    assert C.m("F*_00") in chain[2] and C.m("F*_00") not in chain[1]
    assert all(C.is_mono(f) for f in chain[1].members)


NEGATIVE = {
    "neg_e0_composition": ("descent", "E0 stable under composition", ["2->3", "0->2", "0->3"]),
    "neg_e1_subset": ("descent", "E1 ⊆ E0", "1->2"),
    "neg_factorization": ("descent", "every f in E0 factors as p∘q, p in E1, q in E2", "0->2"),
    "neg_pullback_stability": (
        "descent",
        "E1 stable under pullback",
        {"top": "id_0", "left": "0->1", "right": "0->2", "bottom": "1->2"},
    ),
    "neg_subcategory_pullbacks": (
        "descent",
        "C_E1 admits pullbacks preserved by the inclusion",
        {"not a pullback in C": ["a->top", "b->top"]},
    ),
    "neg_gluing_chain": ("gluing", "diagonals of E'1 lie in E'0", {"morphism": "F*_00", "diagonal": "FD_01"}),
}


@pytest.mark.parametrize("model", negative_controls(), ids=lambda m: m.name)
def test_negative_controls_fail_with_witness(model):
    mode, condition, witness = NEGATIVE[model.name]
    C = model.category
    E0, E1, E2 = model.E("E0"), model.E("E1"), model.E("E2")
    if mode == "descent":
        rows = check_descent_hypotheses(C, E0, E1, E2)
    else:
        rows = check_gluing_hypotheses(C, E1, E2, model.chain, {}, E0)
    row = next(r for r in rows if r["condition"] == condition)
    assert model.breaks == condition
    assert not row["pass"]
    assert row["witness"] == witness


def test_negative_controls_are_distinct():
    assert len({m.breaks for m in negative_controls()}) == 6


# --- bundled data ---------------------------------------------------------


@pytest.mark.parametrize("name", sorted(all_builders()))
def test_bundled_data_matches_builders(name):
    built = all_builders()[name]()
    loaded = bundled(name)
    C, D = built.category, loaded.category
    assert sorted(C.names) == sorted(D.names)
    for (g, f), h in C.comp.items():
        assert D.comp[D.m(C.names[g]), D.m(C.names[f])] == D.m(C.names[h])
    for key, E in built.classes.items():
        assert sorted(E.names()) == sorted(loaded.E(key).names())
    again = model_from_json(json.loads(json.dumps(built.to_json())))
    assert again.breaks == built.breaks
    if built.chain is not None:
        assert [sorted(E.names()) for E in again.chain] == [sorted(E.names()) for E in built.chain]


def test_unknown_bundled_name():
    with pytest.raises(ValidationError):
        bundled("nope")


@pytest.mark.parametrize("model", positive_models(), ids=lambda m: m.name)
def test_komp_is_filtered_under_hypotheses(model):
    C = model.category
    for ch in all_chains(C, 1, model.E("E0")):
        K = komp_category(C, model.E("E1"), model.E("E2"), ch, 1)
        assert K.functors
        again = validate_category(K.category.to_json())
        assert again.n_morphisms == K.category.n_morphisms
        ok, witness = is_filtered(K.category.opposite())
        assert ok, (C.names[ch.maps[0]], witness)
