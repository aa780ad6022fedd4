from __future__ import annotations

from itertools import combinations, product
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nervelab.errors import CapExceeded, NotDistributive, PreconditionError, ValidationError
from nervelab.poset import (
    FinLattice,
    FinPoset,
    UpSet,
    birkhoff,
    crt,
    crt_dot,
    crt_induced,
    crt_size,
    exact_decompose,
    hasse_dot,
    parse_dot_edges,
    product_irreducibles,
    transport_laws,
    upset_lattice,
    upset_transport,
)

from strategies import monotone_maps, posets


def brute_upsets(P: FinPoset) -> set[frozenset]:
    """Independent oracle: test every subset for upward closure."""
    n = len(P)
    out = set()
    for r in range(n + 1):
        for sub in combinations(range(n), r):
            s = set(sub)
            if all(j in s for i in s for j in range(n) if P.leq(i, j)):
                out.add(frozenset(s))
    return out


# ---------------------------------------------------------------- posets


def test_from_relation_closes_transitively():
    P = FinPoset.from_relation("abc", [("a", "b"), ("b", "c")])
    assert P.leq(P.index["a"], P.index["c"])
    assert not P.leq(P.index["c"], P.index["a"])


def test_cycle_rejected_with_witness():
    with pytest.raises(ValidationError, match="antisymmetry|cycle"):
        FinPoset.from_relation("ab", [("a", "b"), ("b", "a")])


def test_grid_and_rcpt_sizes():
    assert len(FinPoset.grid(2)) == 9
    # RCpt^n has one element per pair i <= j
    for n in range(4):
        assert len(FinPoset.rcpt(n)) == (n + 1) * (n + 2) // 2


def test_width_of_grid_is_diagonal_length():
    assert FinPoset.grid(3).width() == 4
    assert FinPoset.chain(5).width() == 1
    assert FinPoset.antichain(4).width() == 4


@given(posets())
def test_upsets_match_subset_scan(P):
    assert {frozenset(i for i in range(len(P)) if m >> i & 1) for m in P.upsets()} == brute_upsets(P)


@given(posets())
def test_covers_generate_the_order(P):
    # reflexive-transitive closure of the cover relation is the order
    reach = {i: {i} for i in range(len(P))}
    changed = True
    while changed:
        changed = False
        for i, j in P.covers:
            for k in list(reach):
                if i in reach[k] and j not in reach[k]:
                    reach[k].add(j)
                    changed = True
    for i in range(len(P)):
        for j in range(len(P)):
            assert (j in reach[i]) == P.leq(i, j)


@given(posets())
def test_linear_extension_respects_order(P):
    pos = {v: k for k, v in enumerate(P.linear_extension)}
    assert all(pos[i] <= pos[j] for i in range(len(P)) for j in range(len(P)) if P.leq(i, j))


def test_poset_json_roundtrip():
    P = FinPoset.grid(1)
    Q = FinPoset.from_json(P.to_json())
    assert Q.labels == P.labels and Q.up == P.up


# ---------------------------------------------------------------- up-set lattices


@given(posets(max_size=5))
def test_upset_lattice_laws(P):
    L = upset_lattice(P)
    n = len(L)
    for a in range(n):
        for b in range(n):
            m, j = L.meet(a, b), L.join(a, b)
            assert L.leq(m, a) and L.leq(m, b) and L.leq(a, j) and L.leq(b, j)
            assert L.meet(a, b) == L.meet(b, a)
            assert L.join(a, L.meet(a, b)) == a
    assert L.distributivity_witness() is None


def test_order_is_reverse_containment():
    L = upset_lattice(FinPoset.chain(1))
    full = L.mask_index[0b11]
    empty = L.mask_index[0]
    assert L.bottom == full and L.top == empty
    assert L.leq(full, empty)


def test_upset_cap_reports_width_bound():
    P = FinPoset.antichain(30)
    with pytest.raises(CapExceeded, match="width 30"):
        upset_lattice(P)


def test_upset_transport_directions():
    P = FinPoset.chain(1)
    P2 = FinPoset.chain(2)
    f = [0, 2]
    Q = UpSet.from_mask(P2, P2.up[1])
    assert upset_transport(f, P, P2, "pullback", Q).members == frozenset({1})
    Q1 = UpSet.from_mask(P, P.up[0])
    assert upset_transport(f, P, P2, "pushforward", Q1).members == frozenset({0, 1, 2})
    with pytest.raises(ValidationError, match="monotone"):
        upset_transport([1, 0], P, P2, "pullback", Q)


@given(posets(max_size=4), posets(max_size=4), st.randoms(use_true_random=False))
def test_pushforward_preserves_unions(P, P2, rnd):
    # a random monotone map: send elements along a linear extension to an increasing chain
    target = P2.linear_extension
    if not all(P2.leq(a, b) for a, b in zip(target, target[1:])):
        # fall back to a constant map, which is always monotone
        f = [target[0]] * len(P)
    else:
        rank = {v: k for k, v in enumerate(P.linear_extension)}
        f = [target[min(rank[i], len(target) - 1)] for i in range(len(P))]
    laws = transport_laws(f, P, P2)
    assert laws["products"]


# ---------------------------------------------------------------- Crt


def test_crt_sizes_match_formula_and_subset_scan():
    # formula values for n = 0..6
    assert [crt_size(n) for n in range(7)] == [1, 5, 19, 69, 251, 923, 3431]
    for n in range(3):
        assert len(crt(n)) == len(brute_upsets(FinPoset.grid(n))) - 1
    for n in range(7):
        assert len(crt(n)) == comb(2 * n + 2, n + 1) - 1


def test_crt1_elements():
    L = crt(1)
    assert sorted(L.bitstring(i) for i in range(len(L))) == ["0001", "0011", "0101", "0111", "1111"]
    assert L.bitstring(L.bottom) == "1111"
    assert L.bitstring(L.top) == "0001"
    assert L.bitstring(L.xi(1, 1)) == "0111"


@pytest.mark.parametrize("n", range(4))
def test_structure_maps(n):
    L = crt(n)
    for p, q in product(range(n + 1), repeat=2):
        s = L.sigma(p, q)
        assert L.pi(s) == (p, q)
        assert s == L.join(L.sigma(p, 0), L.sigma(0, q))
        assert L.xi(p, q) == L.meet(L.sigma(p, 0), L.sigma(0, q))
        assert L.leq(L.xi(p, q), s)
        assert L.masks[s] == L.carrier.up[L.bit(p, q)]


@pytest.mark.parametrize("n", range(3))
def test_lambda_mu_identities(n):
    L = crt(n)
    for x in range(len(L)):
        for y in range(len(L)):
            if not L.leq(x, y):
                continue
            lam, mu = L.lambda_mu(x, y)
            assert L.meet(lam, mu) == L.join(L.xi(*L.pi(y)), x)
            assert L.pi(lam) == (L.pi(y)[0], L.pi(x)[1])
            assert L.pi(mu) == (L.pi(x)[0], L.pi(y)[1])
            assert L.leq(x, lam) and L.leq(lam, y)
    if len(L) > 1:
        with pytest.raises(PreconditionError):
            L.lam(L.top, L.bottom)


@given(st.integers(0, 2), st.integers(0, 2), st.data())
def test_crt_functoriality(m, n, data):
    d = data.draw(monotone_maps(m, n))
    e = data.draw(monotone_maps(n, 2))
    Lm, Ln, L2 = crt(m), crt(n), crt(2)
    f = crt_induced(d, Lm, Ln)
    g = crt_induced(e, Ln, L2)
    ge = crt_induced(tuple(e[v] for v in d), Lm, L2)
    assert g.compose(f).table == ge.table
    for x in range(len(Lm)):
        assert Ln.pi(f(x)) == tuple(d[v] for v in Lm.pi(x))
    for p, q in product(range(m + 1), repeat=2):
        assert f(Lm.sigma(p, q)) == Ln.sigma(d[p], d[q])
    for x in range(len(Lm)):
        for y in range(len(Lm)):
            if Lm.leq(x, y):
                assert f(Lm.lam(x, y)) == Ln.lam(f(x), f(y))
                assert f(Lm.mu(x, y)) == Ln.mu(f(x), f(y))


def test_crt_induced_rejects_non_monotone():
    with pytest.raises(ValidationError, match="monotone"):
        crt_induced((1, 0), crt(1), crt(1))


@pytest.mark.parametrize("n", range(3))
def test_intervals_cover_when_second_index_is_n(n):
    L = crt(n)
    cover = set().union(*(L.intervals[p, n] for p in range(n + 1)))
    assert cover == set(range(len(L)))


def test_punctured_isomorphism():
    L = crt(2)
    target, iso = L.isomorphism_to_punctured()
    assert sorted(iso) == list(range(len(target)))
    for x in range(len(L)):
        for y in range(len(L)):
            assert L.leq(x, y) == target.leq(iso[x], iso[y])


@given(st.integers(1, 2), st.data())
def test_exact_decomposition_squares(n, data):
    L = crt(n)
    x = data.draw(st.integers(0, len(L) - 1))
    y = data.draw(st.integers(0, len(L) - 1))
    if not L.leq(x, y):
        x, y = L.meet(x, y), L.join(x, y)
    moves = exact_decompose(L, x, y)
    assert len(moves) == bin(L.masks[x]).count("1") - bin(L.masks[y]).count("1")
    cur = x
    for mv in moves:
        assert mv.before == cur
        assert L.is_exact_square(mv.before, mv.principal, mv.after, mv.punctured)
        cur = mv.after
    assert cur == y


def test_exact_decompose_crt1_bottom_to_top():
    L = crt(1)
    assert len(exact_decompose(L, L.bottom, L.top)) == 3


# ---------------------------------------------------------------- Birkhoff


def test_birkhoff_grid():
    L = upset_lattice(FinPoset.grid(1))
    res = birkhoff(L)
    assert res.is_isomorphism
    assert len(res.irreducibles) == 4


@given(posets(max_size=5))
def test_birkhoff_recovers_poset_size(P):
    res = birkhoff(upset_lattice(P))
    assert res.is_isomorphism
    assert len(res.irreducibles) == len(P)


def _lattice(labels, pairs):
    return FinLattice(FinPoset.from_relation(labels, pairs))


def test_non_distributive_lattices_rejected():
    # the diamond with three atoms and the pentagon
    m3 = _lattice("0abc1", [("0", "a"), ("0", "b"), ("0", "c"), ("a", "1"), ("b", "1"), ("c", "1")])
    n5 = _lattice("0abc1", [("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")])
    for L in (m3, n5):
        w = L.distributivity_witness()
        assert w is not None
        p, q, r = w
        assert L.meet(p, L.join(q, r)) != L.join(L.meet(p, q), L.meet(p, r))
        with pytest.raises(NotDistributive):
            birkhoff(L)


def test_product_irreducibles_of_chain():
    L = _lattice("abc", [("a", "b"), ("b", "c")])
    assert len(product_irreducibles(L)) == 2


# ---------------------------------------------------------------- DOT


def test_dot_export_is_parseable_and_stable():
    L = crt(2)
    text = crt_dot(L)
    assert text == crt_dot(crt(2))
    nodes, edges = parse_dot_edges(text)
    assert len(nodes) == 19
    assert len(edges) == len(L.covers) == 29
    assert text.count("fillcolor=black") == 9


def test_hasse_dot_of_chain():
    L = _lattice("ab", [("a", "b")])
    nodes, edges = parse_dot_edges(hasse_dot(L, "C"))
    assert nodes == ["n0", "n1"] and edges == [("n0", "n1")]
