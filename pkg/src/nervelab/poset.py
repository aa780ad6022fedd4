"""Finite posets, lattices of up-sets and the ``Crt^n`` family.

Up-sets are stored as integer bitmasks over the carrier's element indices.
The lattice ``U(P)`` is ordered by *reverse* containment: ``Q <= Q'`` iff
``Q`` contains ``Q'``.  Consequently ``join`` is intersection, ``meet`` is
union, the whole carrier is the bottom element and the empty set is the top.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from math import comb
from typing import Hashable, Iterable, Sequence

from .caps import cap, check_cap
from .errors import CapExceeded, NotDistributive, PreconditionError, ValidationError


def _bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


class FinPoset:
    """Finite partial order on elements ``0..N-1`` with arbitrary labels.

    ``up[i]`` and ``down[i]`` are bitmasks of the elements ``>= i`` and ``<= i``.
    """

    def __init__(self, labels: Sequence[Hashable], leq: Sequence[Sequence[bool]], check: bool = True):
        n = len(labels)
        if len(leq) != n or any(len(row) != n for row in leq):
            raise ValidationError("leq must be an N x N relation")
        self.labels = tuple(labels)
        if len(set(self.labels)) != n:
            raise ValidationError("element labels must be distinct")
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self.up = [sum(1 << j for j in range(n) if leq[i][j]) for i in range(n)]
        self.down = [sum(1 << j for j in range(n) if leq[j][i]) for i in range(n)]
        if check:
            witness = self.order_violation()
            if witness is not None:
                raise ValidationError(f"not a partial order: {witness}")

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"FinPoset({len(self)} elements)"

    def __eq__(self, other) -> bool:
        return isinstance(other, FinPoset) and self.labels == other.labels and self.up == other.up

    def __hash__(self) -> int:
        return hash((self.labels, tuple(self.up)))

    # construction

    @classmethod
    def from_relation(cls, labels: Sequence[Hashable], pairs: Iterable[tuple]) -> "FinPoset":
        """Reflexive-transitive closure of ``pairs`` (given as label pairs)."""
        labels = list(labels)
        idx = {lab: i for i, lab in enumerate(labels)}
        n = len(labels)
        leq = [[i == j for j in range(n)] for i in range(n)]
        for a, b in pairs:
            if a not in idx or b not in idx:
                raise ValidationError(f"relation mentions unknown element {a!r} or {b!r}")
            leq[idx[a]][idx[b]] = True
        for k in range(n):
            for i in range(n):
                if leq[i][k]:
                    row_k = leq[k]
                    row_i = leq[i]
                    for j in range(n):
                        if row_k[j]:
                            row_i[j] = True
        return cls(labels, leq)

    @classmethod
    def chain(cls, n: int) -> "FinPoset":
        """The ordinal ``[n] = {0 < 1 < ... < n}``."""
        return cls(list(range(n + 1)), [[i <= j for j in range(n + 1)] for i in range(n + 1)], check=False)

    @classmethod
    def antichain(cls, k: int) -> "FinPoset":
        return cls(list(range(k)), [[i == j for j in range(k)] for i in range(k)], check=False)

    @classmethod
    def product(cls, p: "FinPoset", q: "FinPoset") -> "FinPoset":
        labels = [(a, b) for a in p.labels for b in q.labels]
        pairs = [(i, j) for i in range(len(p)) for j in range(len(q))]
        leq = [[p.leq(a, c) and q.leq(b, d) for (c, d) in pairs] for (a, b) in pairs]
        return cls(labels, leq, check=False)

    @classmethod
    def grid(cls, n: int) -> "FinPoset":
        """``[n] x [n]`` with labels ``(p, q)``, element index ``p*(n+1)+q``."""
        return cls.product(cls.chain(n), cls.chain(n))

    @classmethod
    def rcpt(cls, n: int) -> "FinPoset":
        """The triangular poset of pairs ``(i, j)`` with ``0 <= i <= j <= n``."""
        return cls.grid(n).subposet(lambda lab: lab[0] <= lab[1])

    def subposet(self, keep) -> "FinPoset":
        """Full subposet on the elements whose label satisfies ``keep``."""
        idx = [i for i, lab in enumerate(self.labels) if keep(lab)]
        return FinPoset([self.labels[i] for i in idx], [[self.leq(i, j) for j in idx] for i in idx], check=False)

    def opposite(self) -> "FinPoset":
        n = len(self)
        return FinPoset(self.labels, [[self.leq(j, i) for j in range(n)] for i in range(n)], check=False)

    # queries

    def leq(self, i: int, j: int) -> bool:
        return bool(self.up[i] >> j & 1)

    def lt(self, i: int, j: int) -> bool:
        return i != j and self.leq(i, j)

    def comparable(self, i: int, j: int) -> bool:
        return self.leq(i, j) or self.leq(j, i)

    def order_violation(self):
        """First failing axiom as a readable string, or ``None``."""
        n = len(self)
        for i in range(n):
            if not self.leq(i, i):
                return f"reflexivity fails at {self.labels[i]!r}"
        for i in range(n):
            for j in range(i + 1, n):
                if self.leq(i, j) and self.leq(j, i):
                    return f"antisymmetry fails at ({self.labels[i]!r}, {self.labels[j]!r})"
        for i in range(n):
            for j in _bits(self.up[i]):
                if self.up[j] & ~self.up[i]:
                    k = _bits(self.up[j] & ~self.up[i])[0]
                    return (
                        f"transitivity fails at ({self.labels[i]!r}, {self.labels[j]!r}, {self.labels[k]!r})"
                    )
        return None

    @cached_property
    def covers(self) -> list[tuple[int, int]]:
        """Hasse diagram edges ``(i, j)`` with ``j`` covering ``i``."""
        out = []
        for i in range(len(self)):
            strict_up = self.up[i] & ~(1 << i)
            for j in _bits(strict_up):
                between = strict_up & self.down[j] & ~(1 << j)
                if not between:
                    out.append((i, j))
        return out

    @cached_property
    def linear_extension(self) -> list[int]:
        """Elements sorted so that ``i <= j`` implies ``i`` comes first."""
        return sorted(range(len(self)), key=lambda i: (bin(self.down[i]).count("1"), i))

    def minimal(self, mask: int) -> list[int]:
        """Minimal elements of the subset ``mask``."""
        return [i for i in _bits(mask) if not (self.down[i] & mask & ~(1 << i))]

    def maximal(self, mask: int) -> list[int]:
        return [i for i in _bits(mask) if not (self.up[i] & mask & ~(1 << i))]

    def is_upset(self, mask: int) -> bool:
        return all(self.up[i] & ~mask == 0 for i in _bits(mask))

    def width(self) -> int:
        """Size of a largest antichain (Dilworth, via bipartite matching)."""
        n = len(self)
        match_right: dict[int, int] = {}

        def augment(i: int, seen: set) -> bool:
            for j in _bits(self.up[i] & ~(1 << i)):
                if j in seen:
                    continue
                seen.add(j)
                if j not in match_right or augment(match_right[j], seen):
                    match_right[j] = i
                    return True
            return False

        matched = sum(augment(i, set()) for i in range(n))
        return n - matched

    def upsets(self) -> list[int]:
        """All up-sets as bitmasks, sorted ascending as integers."""
        order = list(reversed(self.linear_extension))
        out: list[int] = []
        n = len(order)

        def rec(k: int, mask: int) -> None:
            if k == n:
                out.append(mask)
                return
            x = order[k]
            rec(k + 1, mask)
            if (self.up[x] & ~(1 << x)) & ~mask == 0:
                rec(k + 1, mask | (1 << x))

        rec(0, 0)
        out.sort()
        return out

    def principal_upset(self, i: int) -> int:
        return self.up[i]

    def to_json(self) -> dict:
        n = len(self)
        return {
            "elements": [_jsonable(lab) for lab in self.labels],
            "leq_pairs": [[i, j] for i in range(n) for j in _bits(self.up[i]) if i != j],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FinPoset":
        labels = [tuple(x) if isinstance(x, list) else x for x in doc["elements"]]
        pairs = [(labels[i], labels[j]) for i, j in doc["leq_pairs"]]
        return cls.from_relation(labels, pairs)


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    return x


@dataclass(frozen=True)
class UpSet:
    carrier: FinPoset = field(repr=False)
    members: frozenset

    def __post_init__(self):
        mask = self.mask
        if not self.carrier.is_upset(mask):
            raise ValidationError(f"{sorted(self.members)} is not an up-set")

    @classmethod
    def from_mask(cls, carrier: FinPoset, mask: int) -> "UpSet":
        return cls(carrier, frozenset(_bits(mask)))

    @property
    def mask(self) -> int:
        return sum(1 << i for i in self.members)

    def labels(self) -> list:
        return sorted(self.carrier.labels[i] for i in self.members)


class FinLattice:
    """A finite lattice given by its order and meet/join functions.

    Subclasses override :meth:`meet` and :meth:`join`; this base class
    computes them from the order by brute force.
    """

    def __init__(self, poset: FinPoset):
        self.poset = poset
        n = len(poset)
        if n == 0:
            raise ValidationError("a lattice is nonempty")
        self._meet = {}
        self._join = {}
        for i in range(n):
            for j in range(i, n):
                lower = poset.down[i] & poset.down[j]
                upper = poset.up[i] & poset.up[j]
                top_lower = poset.maximal(lower)
                bottom_upper = poset.minimal(upper)
                if len(top_lower) != 1 or len(bottom_upper) != 1:
                    raise ValidationError(
                        f"not a lattice: {poset.labels[i]!r} and {poset.labels[j]!r} lack a meet or join"
                    )
                self._meet[i, j] = self._meet[j, i] = top_lower[0]
                self._join[i, j] = self._join[j, i] = bottom_upper[0]

    def __len__(self) -> int:
        return len(self.poset)

    def meet(self, i: int, j: int) -> int:
        return self._meet[i, j]

    def join(self, i: int, j: int) -> int:
        return self._join[i, j]

    def leq(self, i: int, j: int) -> bool:
        return self.poset.leq(i, j)

    @cached_property
    def bottom(self) -> int:
        return self.poset.minimal((1 << len(self)) - 1)[0]

    @cached_property
    def top(self) -> int:
        return self.poset.maximal((1 << len(self)) - 1)[0]

    def meet_table(self) -> list[list[int]]:
        n = len(self)
        return [[self.meet(i, j) for j in range(n)] for i in range(n)]

    def join_table(self) -> list[list[int]]:
        n = len(self)
        return [[self.join(i, j) for j in range(n)] for i in range(n)]

    def distributivity_witness(self, seed: int = 0, samples: int = 200_000):
        """A triple violating distributivity, or ``None``.

        Full scan up to the DISTRIBUTIVE_SCAN cap, seeded sampling above it.
        """
        n = len(self)
        if n <= cap("DISTRIBUTIVE_SCAN"):
            triples: Iterable = product(range(n), repeat=3)
        else:
            rng = random.Random(seed)
            triples = ((rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(samples))
        for p, q, r in triples:
            if self.meet(p, self.join(q, r)) != self.join(self.meet(p, q), self.meet(p, r)):
                return (p, q, r)
        return None

    def is_distributive(self) -> bool:
        return self.distributivity_witness() is None

    def interval(self, lo: int, hi: int) -> list[int]:
        """Elements ``x`` with ``lo <= x <= hi``."""
        return _bits(self.poset.up[lo] & self.poset.down[hi])

    def label(self, i: int) -> str:
        return str(self.poset.labels[i])

    def to_json(self) -> dict:
        doc = self.poset.to_json()
        doc["kind"] = "lattice"
        return doc


class UpSetLattice(FinLattice):
    """``U(P)`` (or its nonempty part) with up-sets as bitmasks.

    ``masks`` is sorted ascending; element ``i`` is the up-set ``masks[i]``.
    """

    def __init__(self, carrier: FinPoset, nonempty: bool = False):
        self.carrier = carrier
        masks = carrier.upsets()
        if nonempty:
            masks = [m for m in masks if m]
        self.masks = masks
        self.mask_index = {m: i for i, m in enumerate(masks)}
        self.nonempty = nonempty
        self._meet = self._join = None

    def __len__(self) -> int:
        return len(self.masks)

    @cached_property
    def poset(self) -> FinPoset:
        masks = self.masks
        n = len(masks)
        leq = [[(a & b) == b for b in masks] for a in masks]
        labels = list(range(n))
        return FinPoset(labels, leq, check=False)

    def leq(self, i: int, j: int) -> bool:
        a, b = self.masks[i], self.masks[j]
        return a & b == b

    def meet(self, i: int, j: int) -> int:
        return self.mask_index[self.masks[i] | self.masks[j]]

    def join(self, i: int, j: int) -> int:
        return self.mask_index[self.masks[i] & self.masks[j]]

    @cached_property
    def bottom(self) -> int:
        return self.mask_index[(1 << len(self.carrier)) - 1]

    @cached_property
    def top(self) -> int:
        if self.nonempty:
            maxima = [self.carrier.up[i] for i in range(len(self.carrier)) if self.carrier.up[i] == 1 << i]
            if len(maxima) != 1:
                raise PreconditionError("nonempty up-sets have no top unless the carrier has a maximum")
            return self.mask_index[maxima[0]]
        return self.mask_index[0]

    def index_of(self, upset) -> int:
        mask = upset.mask if isinstance(upset, UpSet) else int(upset)
        try:
            return self.mask_index[mask]
        except KeyError:
            raise ValidationError(f"{_bits(mask)} is not an element of this lattice") from None

    def upset(self, i: int) -> UpSet:
        return UpSet.from_mask(self.carrier, self.masks[i])

    def members(self, i: int) -> list:
        return [self.carrier.labels[b] for b in _bits(self.masks[i])]

    def sigma(self, p: int) -> int:
        """The principal up-set of carrier element ``p``."""
        return self.mask_index[self.carrier.up[p]]

    def bitstring(self, i: int) -> str:
        mask = self.masks[i]
        return "".join("1" if mask >> b & 1 else "0" for b in range(len(self.carrier)))

    def label(self, i: int) -> str:
        return self.bitstring(i)

    def is_exact_square(self, a: int, b: int, c: int, d: int) -> bool:
        """``a -> b, a -> c, b -> d, c -> d`` with ``a = b ∧ c`` and ``d = b ∨ c``."""
        return self.meet(b, c) == a and self.join(b, c) == d

    @cached_property
    def covers(self) -> list[tuple[int, int]]:
        """Hasse edges computed directly: ``y`` covers ``x`` iff ``x = y ∪ {e}``."""
        out = []
        for i, m in enumerate(self.masks):
            for b in _bits(m):
                j = self.mask_index.get(m & ~(1 << b))
                if j is not None:
                    out.append((i, j))
        return sorted(out)

    def to_json(self) -> dict:
        return {
            "kind": "upset_lattice",
            "carrier": self.carrier.to_json(),
            "elements": [self.bitstring(i) for i in range(len(self))],
            "leq_pairs": [[i, j] for (i, j) in self.covers],
            "leq_pairs_are_covers": True,
        }


def upset_lattice(P: FinPoset, max_size: int | None = None) -> UpSetLattice:
    """All up-sets of ``P`` (including the empty one)."""
    limit = cap("POSET_SIZE") if max_size is None else max_size
    if len(P) > limit:
        w = P.width()
        raise CapExceeded(f"|P| (antichain bound: width {w}, so at most 2^{w} up-sets)", len(P), limit)
    return UpSetLattice(P)


def _check_monotone(f: Sequence[int], P: FinPoset, P2: FinPoset) -> None:
    if len(f) != len(P):
        raise ValidationError("map must assign an image to every element")
    for i in range(len(P)):
        if not 0 <= f[i] < len(P2):
            raise ValidationError(f"image of {P.labels[i]!r} out of range")
    for i in range(len(P)):
        for j in _bits(P.up[i]):
            if not P2.leq(f[i], f[j]):
                raise ValidationError(
                    f"map is not monotone: {P.labels[i]!r} <= {P.labels[j]!r} but images are not ordered"
                )


def pullback_upset(f: Sequence[int], P: FinPoset, P2: FinPoset, mask: int) -> int:
    return sum(1 << i for i in range(len(P)) if mask >> f[i] & 1)


def pushforward_upset(f: Sequence[int], P: FinPoset, P2: FinPoset, mask: int) -> int:
    out = 0
    for q in _bits(mask):
        out |= P2.up[f[q]]
    return out


def upset_transport(f: Sequence[int], P: FinPoset, P2: FinPoset, direction: str, Q: UpSet) -> UpSet:
    """Carry an up-set along the monotone map ``f: P -> P2``.

    ``pullback`` takes an up-set of ``P2`` to ``f^{-1}(Q)``; ``pushforward``
    takes an up-set of ``P`` to the up-set of ``P2`` generated by ``f(Q)``.
    """
    _check_monotone(f, P, P2)
    if direction == "pullback":
        if Q.carrier != P2:
            raise ValidationError("pullback expects an up-set of the target")
        return UpSet.from_mask(P, pullback_upset(f, P, P2, Q.mask))
    if direction == "pushforward":
        if Q.carrier != P:
            raise ValidationError("pushforward expects an up-set of the source")
        return UpSet.from_mask(P2, pushforward_upset(f, P, P2, Q.mask))
    raise ValidationError(f"unknown direction {direction!r}")


def transport_laws(f: Sequence[int], P: FinPoset, P2: FinPoset) -> dict:
    """Exhaustively test which lattice operations the pushforward preserves.

    Returns flags ``products`` (unions) and ``coproducts`` (intersections),
    plus ``f_preserves_coproducts`` for pairs of ``P`` whose join exists.
    """
    _check_monotone(f, P, P2)
    ups = P.upsets()
    push = {m: pushforward_upset(f, P, P2, m) for m in ups}
    products = all(push[a | b] == push[a] | push[b] for a in ups for b in ups)
    coproducts = all(push[a & b] == push[a] & push[b] for a in ups for b in ups)
    f_joins = True
    for i in range(len(P)):
        for j in range(len(P)):
            ub = P.minimal(P.up[i] & P.up[j])
            if len(ub) == 1:
                ub2 = P2.minimal(P2.up[f[i]] & P2.up[f[j]])
                if ub2 != [f[ub[0]]]:
                    f_joins = False
    return {"products": products, "coproducts": coproducts, "f_preserves_coproducts": f_joins}


def crt_size(n: int) -> int:
    return comb(2 * n + 2, n + 1) - 1


class CrtLattice(UpSetLattice):
    """Nonempty up-sets of ``[n] x [n]`` with the maps ``sigma``, ``xi``, ``pi``."""

    def __init__(self, n: int):
        self.n = n
        super().__init__(FinPoset.grid(n), nonempty=True)
        size = n + 1
        self.sigma_table = {(p, q): self.mask_index[self.carrier.up[p * size + q]] for p in range(size) for q in range(size)}
        self.xi_table = {
            (p, q): self.meet(self.sigma_table[p, 0], self.sigma_table[0, q]) for p in range(size) for q in range(size)
        }
        self.pi_table = [self._pi(m) for m in self.masks]

    def _pi(self, mask: int) -> tuple[int, int]:
        size = self.n + 1
        pts = [(b // size, b % size) for b in _bits(mask)]
        return (min(p for p, _ in pts), min(q for _, q in pts))

    def point(self, b: int) -> tuple[int, int]:
        return (b // (self.n + 1), b % (self.n + 1))

    def bit(self, p: int, q: int) -> int:
        return p * (self.n + 1) + q

    def sigma(self, p: int, q: int | None = None) -> int:
        if q is None:
            p, q = self.point(p)
        return self.sigma_table[p, q]

    def xi(self, p: int, q: int) -> int:
        return self.xi_table[p, q]

    def pi(self, x: int) -> tuple[int, int]:
        return self.pi_table[x]

    def lam(self, x: int, y: int) -> int:
        """``lambda(x, y) = sigma(pi_1(y), 0) ∨ x`` for ``x <= y``."""
        self._require_leq(x, y)
        return self.join(self.sigma_table[self.pi_table[y][0], 0], x)

    def mu(self, x: int, y: int) -> int:
        """``mu(x, y) = sigma(0, pi_2(y)) ∨ x`` for ``x <= y``."""
        self._require_leq(x, y)
        return self.join(self.sigma_table[0, self.pi_table[y][1]], x)

    def lambda_mu(self, x: int, y: int) -> tuple[int, int]:
        return self.lam(x, y), self.mu(x, y)

    def _require_leq(self, x: int, y: int) -> None:
        if not self.leq(x, y):
            raise PreconditionError(f"need x <= y, got {self.bitstring(x)} and {self.bitstring(y)}")

    @cached_property
    def intervals(self) -> dict[tuple[int, int], frozenset]:
        """``Crt^n_{p,q}``: the interval from ``xi(p,q)`` to ``sigma(p,q)``."""
        out = {}
        for (p, q), hi in self.sigma_table.items():
            lo = self.xi_table[p, q]
            lo_mask, hi_mask = self.masks[lo], self.masks[hi]
            out[p, q] = frozenset(
                i for i, m in enumerate(self.masks) if (m & hi_mask) == hi_mask and (lo_mask & m) == m
            )
        return out

    @cached_property
    def sigma_image(self) -> frozenset:
        return frozenset(self.sigma_table.values())

    def isomorphism_to_punctured(self) -> tuple[UpSetLattice, list[int]]:
        """Witness for ``Crt^n ≅ U([n] x [n] - {(n, n)})``: drop the top point."""
        n = self.n
        punctured = self.carrier.subposet(lambda lab: lab != (n, n))
        target = UpSetLattice(punctured)
        keep = [b for b in range(len(self.carrier)) if self.point(b) != (n, n)]
        iso = []
        for m in self.masks:
            sub = sum(1 << k for k, b in enumerate(keep) if m >> b & 1)
            iso.append(target.mask_index[sub])
        return target, iso


def crt(n: int, max_n: int | None = None) -> CrtLattice:
    if n < 0:
        raise ValidationError("n must be nonnegative")
    check_cap("n", n, "CRT_N", max_n)
    return CrtLattice(n)


@dataclass(frozen=True)
class LatticeMorphism:
    source: UpSetLattice = field(repr=False)
    target: UpSetLattice = field(repr=False)
    table: tuple

    def __call__(self, x: int) -> int:
        return self.table[x]

    def compose(self, other: "LatticeMorphism") -> "LatticeMorphism":
        """``self ∘ other``."""
        return LatticeMorphism(other.source, self.target, tuple(self.table[other.table[x]] for x in range(len(other.source))))


def _check_ordinal_map(d: Sequence[int], m: int, n: int) -> None:
    if len(d) != m + 1:
        raise ValidationError(f"d must list {m + 1} images")
    if any(not 0 <= v <= n for v in d):
        raise ValidationError(f"images of d must lie in [0, {n}]")
    if any(d[i] > d[i + 1] for i in range(m)):
        raise ValidationError(f"d = {tuple(d)} is not monotone")


def crt_induced(d: Sequence[int], source: CrtLattice, target: CrtLattice) -> LatticeMorphism:
    """``Crt(d)``: pushforward of up-sets along ``d x d``."""
    m, n = source.n, target.n
    _check_ordinal_map(d, m, n)
    grid_map = [target.bit(d[p], d[q]) for p in range(m + 1) for q in range(m + 1)]
    table = tuple(
        target.mask_index[pushforward_upset(grid_map, source.carrier, target.carrier, mask)] for mask in source.masks
    )
    return LatticeMorphism(source, target, table)


@dataclass(frozen=True)
class ExactMove:
    """One elementary step ``Q -> Q - {x}`` with its exact square.

    The square is ``before -> principal``, ``before -> after``,
    ``principal -> punctured``, ``after -> punctured`` where ``principal`` is
    the principal up-set of ``x`` and ``punctured`` is it minus ``x``.
    """

    element: int
    before: int
    principal: int
    after: int
    punctured: int


def exact_decompose(L: UpSetLattice, Q: int, Q2: int) -> list[ExactMove]:
    """Factor ``Q -> Q2`` (``Q`` containing ``Q2``) into exact pullbacks of
    the maps ``sigma(x) -> sigma(x) - {x}``.

    At each step the removed element is the lowest-index minimal element of
    the remaining difference.
    """
    if not L.leq(Q, Q2):
        raise PreconditionError(f"need Q <= Q', got {L.label(Q)} and {L.label(Q2)}")
    P = L.carrier
    cur = L.masks[Q]
    goal = L.masks[Q2]
    moves = []
    while cur != goal:
        x = min(P.minimal(cur & ~goal))
        principal = P.up[x]
        after = cur & ~(1 << x)
        punctured = principal & ~(1 << x)
        moves.append(
            ExactMove(
                element=x,
                before=L.mask_index[cur],
                principal=L.mask_index[principal],
                after=L.mask_index[after],
                punctured=L.mask_index[punctured],
            )
        )
        cur = after
    return moves


@dataclass
class BirkhoffResult:
    irreducibles: list[int]
    poset: FinPoset
    eta: list[frozenset]
    is_isomorphism: bool


def product_irreducibles(L: FinLattice) -> list[int]:
    """Non-top elements with exactly one upper cover."""
    P = L.poset
    up_covers: dict[int, int] = {}
    for i, _ in P.covers:
        up_covers[i] = up_covers.get(i, 0) + 1
    return [i for i in range(len(L)) if i != L.top and up_covers.get(i, 0) == 1]


def birkhoff(L: FinLattice, seed: int = 0) -> BirkhoffResult:
    """Poset of product-irreducibles and the map ``x -> {p irreducible : p >= x}``."""
    witness = L.distributivity_witness(seed=seed)
    if witness is not None:
        raise NotDistributive(tuple(L.label(i) for i in witness))
    irr = product_irreducibles(L)
    sub = FinPoset([L.poset.labels[i] for i in irr], [[L.leq(a, b) for b in irr] for a in irr], check=False)
    pos = {p: k for k, p in enumerate(irr)}
    eta = [frozenset(pos[p] for p in irr if L.leq(x, p)) for x in range(len(L))]
    masks = [sum(1 << k for k in e) for e in eta]
    target_upsets = set(sub.upsets())
    iso = len(set(masks)) == len(L) and set(masks) == target_upsets
    if iso:
        for x in range(len(L)):
            for y in range(len(L)):
                if L.leq(x, y) != ((masks[x] & masks[y]) == masks[y]):
                    iso = False
                    break
            if not iso:
                break
    return BirkhoffResult(irr, sub, eta, iso)


def hasse_dot(L: FinLattice, name: str = "L", highlight: Iterable[int] = ()) -> str:
    """Graphviz text for the Hasse diagram; edges point from ``x`` to its covers.

    Highlighted nodes (for ``Crt^n`` the principal up-sets) are drawn filled.
    """
    mark = set(highlight)
    covers = L.covers if isinstance(L, UpSetLattice) else L.poset.covers
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=circle, fontsize=10];"]
    for i in range(len(L)):
        style = ', style=filled, fillcolor=black, fontcolor=white' if i in mark else ""
        lines.append(f'  n{i} [label="{L.label(i)}"{style}];')
    for i, j in sorted(covers):
        lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def crt_dot(L: CrtLattice) -> str:
    return hasse_dot(L, name=f"Crt{L.n}", highlight=L.sigma_image)


def parse_dot_edges(text: str) -> tuple[list[str], list[tuple[str, str]]]:
    """Nodes and edges of a DOT file written by :func:`hasse_dot`."""
    nodes, edges = [], []
    for line in text.splitlines():
        line = line.strip()
        if "->" in line:
            a, b = line.rstrip(";").split("->")
            edges.append((a.strip(), b.strip()))
        elif "[" in line and line.split()[0][1:].isdigit() and line[0] == "n":
            nodes.append(line.split()[0])
    return nodes, edges


def lattice_to_json(L: FinLattice) -> str:
    return json.dumps(L.to_json(), sort_keys=True)
