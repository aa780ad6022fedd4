"""Cartesianization of square grids, the sections built from ``lambda``/``mu``,
and decomposition of squares through a pullback."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..errors import NoPullback, PreconditionError, ValidationError
from ..fincat import EdgeClass, FinCat, Square, is_cartesian_square
from ..poset import CrtLattice, _bits, crt
from .grid import GridFunctor


@dataclass
class SquareDecomposition:
    """``sq`` factored as ``nw -> apex`` followed by the pullback square."""

    apex: int
    leg_top: int
    leg_left: int
    comparison: int
    comparison_is_iso: bool
    in_class: bool


def square_decomposition(C: FinCat, sq: Square, E: EdgeClass) -> SquareDecomposition | None:
    """Compare ``sq.nw`` with the pullback of ``ne -> se <- sw``; ``None`` if absent."""
    if not sq.commutes(C):
        raise PreconditionError("square does not commute")
    pb = C.pullback(sq.right, sq.bottom)
    if pb is None:
        return None
    u = pb.factor((sq.nw, sq.top, sq.left))
    return SquareDecomposition(pb.apex, pb.leg_y, pb.leg_z, u, C.is_iso(u), u in E)


@dataclass
class KartDiagram:
    """Extension of ``sigma: [n] x [n] -> C`` to ``Crt^n`` by finite limits.

    ``objects[x]`` is the limit over the up-set ``x`` and ``legs[x][b]`` the
    projection to ``sigma`` at grid point with bit index ``b``.
    """

    C: FinCat = field(repr=False)
    lattice: CrtLattice = field(repr=False)
    sigma: GridFunctor = field(repr=False)
    objects: list
    legs: list
    _mor: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.lattice.n

    def mor(self, x: int, y: int) -> int:
        """The map ``F(x) -> F(y)`` for ``x <= y`` (``x`` contains ``y``)."""
        key = (x, y)
        if key not in self._mor:
            if not self.lattice.leq(x, y):
                raise PreconditionError("need x <= y")
            self._mor[key] = _induced(self.C, self.objects[x], self.legs[x], self.objects[y], self.legs[y], self.lattice.masks[y])
        return self._mor[key]

    def restriction_violations(self) -> list:
        """Grid points or edges where the restriction along ``sigma`` differs from ``sigma``."""
        L = self.lattice
        bad = []
        pts = sorted(self.sigma.obj)
        for p in pts:
            if self.objects[L.sigma(*p)] != self.sigma.obj[p]:
                bad.append(("object", p))
        for p in pts:
            for q in pts:
                if p != q and p[0] <= q[0] and p[1] <= q[1]:
                    if self.mor(L.sigma(*p), L.sigma(*q)) != self.sigma.mor[p, q]:
                        bad.append(("morphism", p, q))
        return bad

    def exact_square_violations(self) -> list:
        """Pairs ``(x, y)`` whose exact square is not sent to a Cartesian square."""
        L = self.lattice
        bad = []
        for x in range(len(L)):
            for y in range(x, len(L)):
                lo, hi = L.meet(x, y), L.join(x, y)
                sq = Square(
                    self.objects[lo], self.objects[x], self.objects[y], self.objects[hi],
                    self.mor(lo, x), self.mor(y, hi), self.mor(lo, y), self.mor(x, hi),
                )
                if not sq.commutes(self.C) or not is_cartesian_square(self.C, sq):
                    bad.append((L.bitstring(x), L.bitstring(y)))
        return bad


def _induced(C: FinCat, src: int, src_legs: dict, dst: int, dst_legs: dict, dst_mask: int) -> int:
    found = [
        u for u in C.hom[src][dst] if all(C.comp[dst_legs[b], u] == src_legs[b] for b in _bits(dst_mask))
    ]
    if len(found) != 1:
        raise ValidationError(f"expected a unique induced map, found {len(found)}")
    return found[0]


def cartesianize(C: FinCat, sigma: GridFunctor) -> KartDiagram:
    """Right Kan extension of a square grid along the principal up-sets.

    A principal up-set goes to the corresponding grid value.  Any other up-set
    ``x`` is split at its lowest-index minimal element ``a`` as
    ``F(sigma(a)) x_{F(sigma(a) - a)} F(x - a)``.
    """
    if sigma.k != 2 or sigma.shape[0] != sigma.shape[1] or sigma.twist:
        raise PreconditionError("cartesianize expects an untwisted [n] x [n] grid")
    n = sigma.shape[0]
    L = crt(n)
    P = L.carrier
    objects: list = [None] * len(L)
    legs: list = [None] * len(L)
    principal = {P.up[b]: b for b in range(len(P))}

    def build(x: int) -> None:
        if objects[x] is not None:
            return
        mask = L.masks[x]
        if mask in principal:
            a = L.point(principal[mask])
            objects[x] = sigma.obj[a]
            legs[x] = {b: sigma.mor[a, L.point(b)] for b in _bits(mask)}
            return
        a = min(P.minimal(mask))
        top = L.mask_index[P.up[a]]
        punct = L.mask_index[P.up[a] & ~(1 << a)]
        rest = L.mask_index[mask & ~(1 << a)]
        for y in (top, punct, rest):
            build(y)
        f = _induced(C, objects[top], legs[top], objects[punct], legs[punct], L.masks[punct])
        g = _induced(C, objects[rest], legs[rest], objects[punct], legs[punct], L.masks[punct])
        pb = C.pullback(f, g)
        if pb is None:
            raise NoPullback((C.names[f], C.names[g]), f"limit over {L.bitstring(x)} does not exist")
        objects[x] = pb.apex
        out = {b: C.comp[leg, pb.leg_z] for b, leg in legs[rest].items()}
        out[a] = pb.leg_y
        legs[x] = out

    for x in sorted(range(len(L)), key=lambda i: bin(L.masks[i]).count("1")):
        build(x)
    return KartDiagram(C, L, sigma, objects, legs)


def alpha_section(L: CrtLattice, tau: Sequence[int]) -> dict:
    """The ``[m] x [m]`` grid ``(a, b) -> lambda(tau(b), tau(a))`` for ``a >= b``
    and ``mu(tau(a), tau(b))`` for ``a <= b``."""
    m = len(tau) - 1
    if m < 0:
        raise ValidationError("tau must be nonempty")
    for a in range(m):
        if not L.leq(tau[a], tau[a + 1]):
            raise ValidationError(f"tau is not monotone at {a}")
    grid = {}
    for a in range(m + 1):
        for b in range(m + 1):
            if a >= b:
                grid[a, b] = L.lam(tau[b], tau[a])
            else:
                grid[a, b] = L.mu(tau[a], tau[b])
    return grid


@dataclass
class SectionReport:
    grid: dict
    monotone: bool
    interval: tuple | None
    meet_identity: bool


def alpha_beta_sections(L: CrtLattice, tau: Sequence[int]) -> SectionReport:
    """The section grid plus the checks that decide whether it lands in the
    Cartesian part: monotonicity, the interval ``Crt^n_{p,q}`` holding ``tau``
    (if any), and ``grid(a,b) ∧ grid(b,a) = grid(b,b)`` for ``a >= b``."""
    grid = alpha_section(L, tau)
    m = len(tau) - 1
    monotone = all(
        L.leq(grid[a, b], grid[c, d])
        for a in range(m + 1) for b in range(m + 1) for c in range(a, m + 1) for d in range(b, m + 1)
    )
    interval = next((pq for pq, members in sorted(L.intervals.items()) if all(t in members for t in tau)), None)
    meet = all(L.meet(grid[a, b], grid[b, a]) == grid[b, b] for a in range(m + 1) for b in range(a + 1))
    return SectionReport(grid, monotone, interval, meet)
