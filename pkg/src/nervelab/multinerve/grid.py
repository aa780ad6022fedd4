"""Grid functors ``[n_1] x ... x [n_k] -> C`` and restricted multisimplicial nerves.

Direction ``i`` (1-indexed) is the ``i``-th grid coordinate; direction 1 is
drawn vertically.  A twisted direction ``i in L`` has its edges reversed:
the unit edge runs from ``a + e_i`` to ``a``.  Enumeration works on the
reindexed grid where every edge points upward, so twisting never builds an
opposite category.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Sequence

from ..caps import cap, check_cap
from ..errors import PreconditionError, ValidationError
from ..fincat import EdgeClass, FinCat, Square, is_cartesian_square

Point = tuple


def grid_points(shape: Sequence[int]) -> list[Point]:
    return list(product(*(range(n + 1) for n in shape)))


def _leq(p: Point, q: Point) -> bool:
    return all(a <= b for a, b in zip(p, q))


@lru_cache(maxsize=1024)
def _pairs(shape: tuple, twist: frozenset) -> tuple:
    """All ``(p, q)`` with ``p <= q`` in the twisted order on the grid."""
    pts = grid_points(shape)
    rev = [(i + 1) in twist for i in range(len(shape))]
    return tuple(
        (p, q) for p in pts for q in pts
        if all((a >= b) if r else (a <= b) for r, a, b in zip(rev, p, q))
    )


@lru_cache(maxsize=1024)
def _flip(shape: tuple, twist: frozenset) -> dict:
    """Point map between own and upright coordinates (an involution)."""
    return {
        p: tuple(shape[i] - v if (i + 1) in twist else v for i, v in enumerate(p))
        for p in grid_points(shape)
    }


class GridFunctor:
    """A functor on a grid (or a region of one), stored in its own coordinates.

    ``obj[p]`` is an object index and ``mor[p, q]`` the morphism for every
    pair ``p <= q`` in the twisted order (coordinates in ``twist`` compare
    reversed).
    """

    __slots__ = ("shape", "twist", "obj", "mor", "_key")

    def __init__(self, shape: Sequence[int], twist: Iterable[int], obj: dict, mor: dict):
        self.shape = tuple(shape)
        self.twist = frozenset(twist)
        self.obj = obj
        self.mor = mor
        self._key = None

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = (
                self.shape,
                tuple(sorted(self.twist)),
                tuple(sorted(self.obj.items())),
                tuple(sorted(self.mor.items())),
            )
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, GridFunctor) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"GridFunctor(shape={self.shape}, twist={sorted(self.twist)})"

    @property
    def k(self) -> int:
        return len(self.shape)

    def tleq(self, p: Point, q: Point) -> bool:
        return all((a >= b) if (i + 1) in self.twist else (a <= b) for i, (a, b) in enumerate(zip(p, q)))

    def unit_edge(self, p: Point, direction: int) -> int:
        """Morphism of the unit step from ``p`` in ``direction`` (source end first)."""
        i = direction - 1
        q = p[:i] + (p[i] + 1,) + p[i + 1 :]
        if direction in self.twist:
            return self.mor[q, p]
        return self.mor[p, q]

    def restrict(self, alphas: Sequence[Sequence[int]]) -> "GridFunctor":
        """Precompose with monotone maps ``alpha_i: [m_i] -> [n_i]``."""
        if len(alphas) != self.k:
            raise PreconditionError("need one map per direction")
        for alpha, n in zip(alphas, self.shape):
            if any(not 0 <= v <= n for v in alpha) or any(a > b for a, b in zip(alpha, alpha[1:])):
                raise PreconditionError(f"{tuple(alpha)} is not a monotone map into [{n}]")
        new_shape = tuple(len(a) - 1 for a in alphas)
        pts = grid_points(new_shape)
        image = {b: tuple(alphas[i][b[i]] for i in range(self.k)) for b in pts}
        obj = {b: self.obj[image[b]] for b in pts}
        out = GridFunctor(new_shape, self.twist, obj, {})
        out.mor = {(b, c): self.mor[image[b], image[c]] for b, c in _pairs(new_shape, self.twist)}
        return out

    def face(self, direction: int, j: int) -> "GridFunctor":
        n = self.shape[direction - 1]
        if n == 0 or not 0 <= j <= n:
            raise PreconditionError(f"no face d_{j} in direction {direction}")
        alphas = [list(range(m + 1)) for m in self.shape]
        alphas[direction - 1] = [v for v in range(n + 1) if v != j]
        return self.restrict(alphas)

    def degeneracy(self, direction: int, j: int) -> "GridFunctor":
        n = self.shape[direction - 1]
        if not 0 <= j <= n:
            raise PreconditionError(f"no degeneracy s_{j} in direction {direction}")
        alphas = [list(range(m + 1)) for m in self.shape]
        alphas[direction - 1] = list(range(j + 1)) + list(range(j, n + 1))
        return self.restrict(alphas)

    def diagonal_face(self, j: int) -> "GridFunctor":
        n = self._diag_n()
        keep = [v for v in range(n + 1) if v != j]
        return self.restrict([keep] * self.k)

    def diagonal_degeneracy(self, j: int) -> "GridFunctor":
        n = self._diag_n()
        return self.restrict([list(range(j + 1)) + list(range(j, n + 1))] * self.k)

    def _diag_n(self) -> int:
        if len(set(self.shape)) != 1:
            raise PreconditionError("diagonal operators need a cubical shape")
        return self.shape[0]

    def to_upright(self) -> tuple[dict, dict]:
        """Object and morphism tables in coordinates where every edge points up."""
        if not self.twist:
            return dict(self.obj), dict(self.mor)
        flip = _flip(self.shape, self.twist).__getitem__
        obj = {flip(p): o for p, o in self.obj.items()}
        mor = {(flip(p), flip(q)): m for (p, q), m in self.mor.items()}
        return obj, mor

    @classmethod
    def from_upright(cls, shape, twist, obj: dict, mor: dict) -> "GridFunctor":
        twist = frozenset(twist)
        shape = tuple(shape)
        if not twist:
            return cls(shape, twist, obj, mor)
        flip = _flip(shape, twist).__getitem__
        return cls(shape, twist, {flip(p): o for p, o in obj.items()}, {(flip(p), flip(q)): m for (p, q), m in mor.items()})

    def to_json(self, C: FinCat) -> dict:
        return {
            "shape": list(self.shape),
            "twist": sorted(self.twist),
            "objects": {",".join(map(str, p)): C.objects[o] for p, o in sorted(self.obj.items())},
            "edges": {
                f"{','.join(map(str, p))}->{','.join(map(str, q))}": C.names[m]
                for (p, q), m in sorted(self.mor.items())
                if p != q and sum(abs(a - b) for a, b in zip(p, q)) == 1
            },
        }


@dataclass
class Constraints:
    """Conditions on a functor over a region, in upright coordinates.

    ``edge_ok(direction, m)`` and ``square_ok(i, j, square)`` (with ``i < j``,
    direction ``i`` vertical) are applied to every edge and every
    rectangle, not only unit ones.
    """

    edge_ok: Callable[[int, int], bool]
    square_ok: Callable[[int, int, Square], bool] | None = None
    fixed_obj: dict = field(default_factory=dict)
    fixed_mor: dict = field(default_factory=dict)


class _Region:
    def __init__(self, points: Iterable[Point]):
        self.points = sorted(points)
        self.pset = set(self.points)
        self.k = len(self.points[0])
        self.below = {a: [b for b in self.points if b != a and _leq(b, a)] for a in self.points}
        self.preds = {}
        for a in self.points:
            ps = []
            for i in range(self.k):
                if a[i] > 0:
                    b = a[:i] + (a[i] - 1,) + a[i + 1 :]
                    if b in self.pset:
                        ps.append((i, b))
            self.preds[a] = ps
        # per b < a: a route predecessor, the other predecessors above b,
        # and the edge direction or rectangle corners spanned by (b, a)
        self.plan = {}
        for a in self.points:
            rows = []
            for b in self.below[a]:
                via = [c for _, c in self.preds[a] if _leq(b, c)]
                if not via:
                    raise ValidationError(f"region is not generated by unit steps at {b} -> {a}")
                diff = [i for i in range(self.k) if b[i] != a[i]]
                edge = diff[0] + 1 if len(diff) == 1 else None
                square = None
                if len(diff) == 2:
                    i, j = diff
                    sw = b[:i] + (a[i],) + b[i + 1 :]
                    ne = b[:j] + (a[j],) + b[j + 1 :]
                    if sw in self.pset and ne in self.pset:
                        square = (i + 1, j + 1, sw, ne)
                rows.append((b, via[0], via[1:], edge, square))
            self.plan[a] = rows


@lru_cache(maxsize=256)
def _region(points: tuple) -> _Region:
    return _Region(points)


def _check_point(C: FinCat, R: _Region, cons: Constraints, a: Point, obj: dict, mor: dict):
    """Fill ``mor[b, a]`` for all ``b < a`` and test every condition with top corner ``a``."""
    comp = C.comp
    plan = R.plan[a]
    for b, c, _, _, _ in plan:
        mor[b, a] = comp[mor[c, a], mor[b, c]]
    fixed_mor = cons.fixed_mor
    for b, _, others, edge, square in plan:
        val = mor[b, a]
        for c in others:
            if comp[mor[c, a], mor[b, c]] != val:
                return ("not functorial", b, a)
        if fixed_mor:
            fixed = fixed_mor.get((b, a))
            if fixed is not None and fixed != val:
                return ("fixed morphism", b, a)
        if edge is not None:
            if not cons.edge_ok(edge, val):
                return ("edge", edge, b, a)
        elif square is not None and cons.square_ok is not None:
            i, j, sw, ne = square
            sq = Square(obj[b], obj[ne], obj[sw], obj[a], mor[b, ne], mor[sw, a], mor[b, sw], mor[ne, a])
            if not cons.square_ok(i, j, sq):
                return ("square", i, j, b, a)
    return None


def enumerate_functors(C: FinCat, points: Iterable[Point], cons: Constraints, limit: int | None = None) -> list[tuple[dict, dict]]:
    """All functors on the region satisfying ``cons``, in upright coordinates."""
    R = _region(tuple(sorted(points)))
    out: list[tuple[dict, dict]] = []
    obj: dict = {}
    mor: dict = {}
    n_obj = len(C.objects)

    def rec(idx: int) -> None:
        if idx == len(R.points):
            out.append((dict(obj), dict(mor)))
            if limit is not None and len(out) > limit:
                raise ValidationError(f"more than {limit} functors")
            return
        a = R.points[idx]
        preds = R.preds[a]
        fixed = cons.fixed_obj.get(a)
        if not preds:
            for o in [fixed] if fixed is not None else range(n_obj):
                obj[a] = o
                mor[a, a] = C.identity[o]
                if _check_point(C, R, cons, a, obj, mor) is None:
                    rec(idx + 1)
            return
        i0, b0 = preds[0]
        for m0 in C.hom_from(obj[b0]):
            o = C.dst[m0]
            if fixed is not None and o != fixed:
                continue
            if not cons.edge_ok(i0 + 1, m0):
                continue
            obj[a] = o
            mor[a, a] = C.identity[o]
            mor[b0, a] = m0
            choices = []
            for i, b in preds[1:]:
                choices.append([m for m in C.hom[obj[b]][o] if cons.edge_ok(i + 1, m)])
            for combo in product(*choices):
                for (i, b), m in zip(preds[1:], combo):
                    mor[b, a] = m
                if _check_point(C, R, cons, a, obj, mor) is None:
                    rec(idx + 1)
        obj.pop(a, None)

    rec(0)
    return out


def functor_violation(C: FinCat, points: Iterable[Point], cons: Constraints, obj: dict, mor: dict):
    """First violated condition of a complete upright functor table, or ``None``."""
    R = _region(tuple(sorted(points)))
    scratch = {key: val for key, val in mor.items() if key[0] == key[1] or (key[1] in R.pset and key[0] in [c for _, c in R.preds[key[1]]])}
    for a in R.points:
        fixed = cons.fixed_obj.get(a)
        if fixed is not None and obj[a] != fixed:
            return ("fixed object", a)
        if scratch.get((a, a)) != C.identity[obj[a]]:
            return ("identity", a)
        for _, c in R.preds[a]:
            m = scratch[c, a]
            if C.src[m] != obj[c] or C.dst[m] != obj[a]:
                return ("endpoints", c, a)
        bad = _check_point(C, R, cons, a, obj, scratch)
        if bad is not None:
            return bad
    for key, val in mor.items():
        if scratch.get(key) != val:
            return ("table mismatch", key)
    return None


class Tiling:
    """Square classes per direction pair ``(i, j)``, ``i < j``.

    Entries are ``"CART"``, ``"ALL"``, ``("E", EdgeClass)`` for squares whose
    comparison map to the pullback lies in the class, or an explicit set of
    ``(top, left, right, bottom)`` tuples.  Transposed squares are covered by
    storing only ``i < j``; degenerate squares are always admitted.
    """

    def __init__(self, C: FinCat, default="CART", pairs: dict | None = None):
        self.C = C
        self.default = default
        self.pairs = {}
        for (i, j), spec in (pairs or {}).items():
            if i == j:
                raise ValidationError("a tile needs two distinct directions")
            if i > j:
                spec = _transpose_spec(spec)
                i, j = j, i
            self.pairs[i, j] = spec
        for spec in [default, *self.pairs.values()]:
            _validate_spec(C, spec)

    def spec(self, i: int, j: int):
        return self.pairs.get((i, j), self.default)

    def admits(self, i: int, j: int, sq: Square) -> bool:
        C = self.C
        if _degenerate_square(C, sq):
            return True
        spec = self.spec(i, j)
        if spec == "ALL":
            return True
        if spec == "CART":
            return is_cartesian_square(C, sq)
        if isinstance(spec, tuple) and spec and spec[0] == "E":
            from .kart import square_decomposition

            dec = square_decomposition(C, sq, spec[1])
            return dec is not None and dec.in_class
        return (sq.top, sq.left, sq.right, sq.bottom) in spec


def _degenerate_square(C: FinCat, sq: Square) -> bool:
    return (C.is_identity(sq.top) and C.is_identity(sq.bottom) and sq.left == sq.right) or (
        C.is_identity(sq.left) and C.is_identity(sq.right) and sq.top == sq.bottom
    )


def _transpose_spec(spec):
    if isinstance(spec, (set, frozenset)):
        return frozenset((left, top, bottom, right) for (top, left, right, bottom) in spec)
    return spec


def _validate_spec(C: FinCat, spec) -> None:
    if spec in ("CART", "ALL"):
        return
    if isinstance(spec, tuple) and len(spec) == 2 and spec[0] == "E":
        if not isinstance(spec[1], EdgeClass) or spec[1].carrier is not C:
            raise ValidationError("E-decomposition tiles need an edge class over the same category")
        return
    if isinstance(spec, (set, frozenset)):
        return
    raise ValidationError(f"unknown tile specification {spec!r}")


class RestrictedNerve:
    """Grid functors with direction-``i`` edges in ``marking[i-1]`` and squares in the tiling."""

    def __init__(self, C: FinCat, marking: Sequence[EdgeClass], tiling: Tiling | None = None, max_k: int | None = None, max_n: int | None = None):
        check_cap("number of directions", len(marking), "GRID_DIRECTIONS", max_k)
        for E in marking:
            if E.carrier is not C:
                raise ValidationError(f"class {E.name} lives over a different category")
        self.C = C
        self.marking = tuple(marking)
        self.tiling = tiling if tiling is not None else Tiling(C)
        self.max_n = cap("GRID_N") if max_n is None else max_n
        self._cache: dict = {}
        self.constraints = Constraints(
            edge_ok=lambda d, m: m in self.marking[d - 1],
            square_ok=self.tiling.admits,
        )

    @property
    def k(self) -> int:
        return len(self.marking)

    def simplices(self, shape: Sequence[int], twist: Iterable[int] = ()) -> list[GridFunctor]:
        shape = tuple(shape)
        twist = frozenset(twist)
        if len(shape) != self.k:
            raise ValidationError(f"shape needs {self.k} entries")
        if any(t < 1 or t > self.k for t in twist):
            raise ValidationError(f"twist directions must lie in 1..{self.k}")
        for n in shape:
            check_cap("grid size", n, "GRID_N", self.max_n)
        key = (shape, twist)
        if key not in self._cache:
            found = enumerate_functors(self.C, grid_points(shape), self.constraints)
            self._cache[key] = [GridFunctor.from_upright(shape, twist, o, m) for o, m in found]
        return self._cache[key]

    def is_simplex(self, F: GridFunctor) -> bool:
        return self.violation(F) is None

    def violation(self, F: GridFunctor):
        if F.k != self.k:
            return ("wrong number of directions",)
        obj, mor = F.to_upright()
        return functor_violation(self.C, grid_points(F.shape), self.constraints, obj, mor)

    def diagonal_simplices(self, n: int, twist: Iterable[int] = ()) -> list[GridFunctor]:
        return self.simplices((n,) * self.k, twist)

    def epsilon_restrict(self, j: int, n: int) -> list[GridFunctor]:
        if not 1 <= j <= self.k:
            raise ValidationError(f"direction {j} out of range")
        shape = [0] * self.k
        shape[j - 1] = n
        return self.simplices(shape)

    def counts(self, max_n: int, twist: Iterable[int] = ()) -> list[int]:
        return [len(self.diagonal_simplices(n, twist)) for n in range(max_n + 1)]


def gluing_map(F: GridFunctor) -> GridFunctor:
    """Partial diagonal: ``H(a, rest) = F(a, a, rest)``; direction 1 of the result
    carries the composites of directions 1 and 2."""
    if F.k < 2:
        raise PreconditionError("gluing needs at least two directions")
    if 1 in F.twist or 2 in F.twist:
        raise PreconditionError("directions 1 and 2 may not be twisted")
    if F.shape[0] != F.shape[1]:
        raise PreconditionError("directions 1 and 2 must have equal length")
    shape = (F.shape[0],) + F.shape[2:]
    twist = frozenset(t - 1 for t in F.twist)
    pts = grid_points(shape)

    def lift(c):
        return (c[0], c[0]) + c[1:]

    obj = {c: F.obj[lift(c)] for c in pts}
    out = GridFunctor(shape, twist, obj, {})
    out.mor = {(b, c): F.mor[lift(b), lift(c)] for b, c in _pairs(shape, twist)}
    return out


def check_gluing(source: RestrictedNerve, target: RestrictedNerve, max_n: int, twist: Iterable[int] = ()) -> dict:
    """Commutation of the gluing map with diagonal faces and degeneracies.

    Also checks that images land in ``target`` and that the map is bijective
    on vertices.
    """
    twist = frozenset(twist)
    if target.k != source.k - 1:
        raise PreconditionError("target must have one direction fewer")
    shifted = frozenset(t - 1 for t in twist)
    rows = []
    for n in range(max_n + 1):
        cells = source.diagonal_simplices(n, twist)
        for F in cells:
            G = gluing_map(F)
            if not target.is_simplex(G):
                rows.append({"condition": "image is a simplex", "pass": False, "witness": F.key})
                return {"pass": False, "rows": rows}
            for j in range(n + 1) if n > 0 else []:
                if gluing_map(F.diagonal_face(j)) != G.diagonal_face(j):
                    rows.append({"condition": f"commutes with d_{j}", "pass": False, "witness": F.key})
                    return {"pass": False, "rows": rows}
            if n < max_n:
                for j in range(n + 1):
                    if gluing_map(F.diagonal_degeneracy(j)) != G.diagonal_degeneracy(j):
                        rows.append({"condition": f"commutes with s_{j}", "pass": False, "witness": F.key})
                        return {"pass": False, "rows": rows}
        rows.append({"condition": f"dimension {n}", "pass": True, "witness": None, "count": len(cells)})
    src0 = source.diagonal_simplices(0, twist)
    tgt0 = target.diagonal_simplices(0, shifted)
    images = [gluing_map(F) for F in src0]
    bijective = len(set(images)) == len(images) and set(images) == set(tgt0)
    rows.append({"condition": "bijective on vertices", "pass": bijective, "witness": None if bijective else len(images)})
    return {"pass": all(r["pass"] for r in rows), "rows": rows}
