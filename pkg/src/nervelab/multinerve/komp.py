"""Categories of compactifications of a chain.

An object is a functor ``F`` on the triangle ``{(i, j) : i <= j <= n}`` whose
diagonal is the given chain, with first-coordinate edges in ``E1`` and
second-coordinate edges in ``E2``.  A morphism ``F -> F'`` has components
``F(x) -> F'(x)`` in ``E_alpha``, identities on the diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..caps import check_cap
from ..errors import PreconditionError, ValidationError
from ..fincat import EdgeClass, FinCat
from .grid import Constraints, GridFunctor, enumerate_functors

ORIENTATION = "morphisms F -> F' have components F(x) -> F'(x)"


def rcpt_points(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n + 1) for j in range(i, n + 1)]


@dataclass(frozen=True)
class Chain:
    """An ``n``-simplex of the nerve: objects ``x_0..x_n`` and maps ``x_{i-1} -> x_i``."""

    objects: tuple
    maps: tuple

    @property
    def n(self) -> int:
        return len(self.maps)

    def composite(self, C: FinCat, i: int, j: int) -> int:
        m = C.identity[self.objects[i]]
        for t in range(i, j):
            m = C.comp[self.maps[t], m]
        return m


def make_chain(C: FinCat, spec) -> Chain:
    """From a list of morphism names/indices, or a single object name for ``n = 0``."""
    if isinstance(spec, str):
        if spec in C.obj_index:
            return Chain((C.obj_index[spec],), ())
        spec = [s for s in spec.split(",") if s]
    maps = []
    for s in spec:
        if isinstance(s, str):
            if s not in C.mor_index:
                raise ValidationError(f"unknown morphism {s!r}")
            maps.append(C.mor_index[s])
        else:
            maps.append(int(s))
    if not maps:
        raise ValidationError("empty chain")
    for a, b in zip(maps, maps[1:]):
        if C.dst[a] != C.src[b]:
            raise ValidationError(f"{C.names[a]} and {C.names[b]} are not composable")
    objs = (C.src[maps[0]],) + tuple(C.dst[m] for m in maps)
    return Chain(objs, tuple(maps))


@dataclass
class KompCat:
    base: FinCat = field(repr=False)
    sigma: Chain
    alpha: int
    functors: list = field(repr=False)
    transformations: list = field(repr=False)
    category: FinCat = field(repr=False)
    orientation: str = ORIENTATION

    @property
    def n(self) -> int:
        return self.sigma.n

    def summary(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "objects": len(self.functors),
            "morphisms": self.category.n_morphisms,
            "orientation": self.orientation,
        }


def compactifications(C: FinCat, E1: EdgeClass, E2: EdgeClass, sigma: Chain) -> list[GridFunctor]:
    n = sigma.n
    pts = rcpt_points(n)
    fixed_obj = {(i, i): sigma.objects[i] for i in range(n + 1)}
    fixed_mor = {((i, i), (j, j)): sigma.composite(C, i, j) for i in range(n + 1) for j in range(i + 1, n + 1)}
    cons = Constraints(
        edge_ok=lambda d, m: m in (E1 if d == 1 else E2),
        fixed_obj=fixed_obj,
        fixed_mor=fixed_mor,
    )
    return [GridFunctor((n, n), (), o, m) for o, m in enumerate_functors(C, pts, cons)]


def _composition_witness(C: FinCat, E: EdgeClass):
    for g in E.members:
        for f in E.members:
            if C.src[g] == C.dst[f] and C.comp[g, f] not in E:
                return (C.names[g], C.names[f])
    return None


def transformations(C: FinCat, F: GridFunctor, G: GridFunctor, E: EdgeClass, n: int) -> list[tuple]:
    """Component tuples (in triangle point order) of all admissible ``F -> G``."""
    pts = rcpt_points(n)
    preds = {p: [q for q in ((p[0] - 1, p[1]), (p[0], p[1] - 1)) if q in F.obj] for p in pts}
    out = []
    comps: dict = {}

    def rec(k: int) -> None:
        if k == len(pts):
            out.append(tuple(comps[p] for p in pts))
            return
        p = pts[k]
        if p[0] == p[1]:
            cands = [C.identity[F.obj[p]]] if F.obj[p] == G.obj[p] else []
        else:
            cands = [m for m in C.hom[F.obj[p]][G.obj[p]] if m in E]
        for m in cands:
            if all(C.comp[G.mor[q, p], comps[q]] == C.comp[m, F.mor[q, p]] for q in preds[p]):
                comps[p] = m
                rec(k + 1)
        comps.pop(p, None)

    rec(0)
    return out


def komp_category(C: FinCat, E1: EdgeClass, E2: EdgeClass, sigma, alpha: int, max_objects: int | None = None) -> KompCat:
    if alpha not in (1, 2):
        raise ValidationError("alpha must be 1 or 2")
    if not isinstance(sigma, Chain):
        sigma = make_chain(C, sigma)
    E = E1 if alpha == 1 else E2
    bad = _composition_witness(C, E)
    if bad is not None:
        raise PreconditionError(
            f"E{alpha} is not stable under composition ({bad[0]}∘{bad[1]}), so compactifications do not form a category"
        )
    functors = compactifications(C, E1, E2, sigma)
    check_cap("compactifications", len(functors), "CATEGORY_OBJECTS", max_objects)
    n = sigma.n
    pts = rcpt_points(n)
    names = [f"F{i}" for i in range(len(functors))]
    morphisms = []
    by_components: dict = {}
    trans = []
    for a, F in enumerate(functors):
        for b, G in enumerate(functors):
            for t, comps in enumerate(transformations(C, F, G, E, n)):
                if a == b and all(C.is_identity(m) for m in comps):
                    name = f"id_{names[a]}"
                else:
                    name = f"{names[a]}>{names[b]}#{t}"
                morphisms.append((name, names[a], names[b]))
                by_components[a, b, comps] = name
                trans.append((a, b, comps))
    compose = []
    for a, b, comps_f in trans:
        for b2, c, comps_g in trans:
            if b2 != b:
                continue
            gf = tuple(C.comp[g, f] for g, f in zip(comps_g, comps_f))
            key = (a, c, gf)
            if key not in by_components:
                raise ValidationError("composite of transformations is not admissible")
            compose.append((by_components[b, c, comps_g], by_components[a, b, comps_f], by_components[key]))
    cat = FinCat(names, [m for m in morphisms if not m[0].startswith("id_")], compose)
    return KompCat(C, sigma, alpha, functors, trans, cat)


def all_chains(C: FinCat, n: int, E: EdgeClass | None = None) -> list[Chain]:
    """Every ``n``-simplex of the nerve (degenerate ones included), edges in ``E``."""
    if n == 0:
        return [Chain((o,), ()) for o in range(len(C.objects))]
    out = []

    def rec(maps):
        if len(maps) == n:
            objs = (C.src[maps[0]],) + tuple(C.dst[m] for m in maps)
            out.append(Chain(objs, tuple(maps)))
            return
        start = C.dst[maps[-1]] if maps else None
        cands = range(C.n_morphisms) if start is None else C.hom_from(start)
        for m in cands:
            if E is None or m in E:
                rec(maps + [m])

    rec([])
    return out
