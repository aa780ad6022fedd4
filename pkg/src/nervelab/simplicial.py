"""Dimension-truncated simplicial sets.

Only nondegenerate simplices are stored.  An arbitrary ``n``-simplex is a
normal form ``(c, j, theta)``: the ``j``-th nondegenerate ``c``-simplex
pulled back along the monotone surjection ``theta: [n] -> [c]``, stored as
a tuple of length ``n + 1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Callable, Hashable, Iterable, Sequence

from .caps import cap, check_cap
from .errors import CapExceeded, PreconditionError, ValidationError

Simplex = tuple  # (core_dim, core_index, theta)


def surjections(n: int, c: int) -> list[tuple[int, ...]]:
    """Monotone surjections ``[n] -> [c]`` in lexicographic order."""
    out = []
    for jumps in combinations(range(1, n + 1), c):
        theta = []
        v = 0
        js = set(jumps)
        for k in range(n + 1):
            if k in js:
                v += 1
            theta.append(v)
        out.append(tuple(theta))
    return out


def identity_nf(c: int, j: int) -> Simplex:
    return (c, j, tuple(range(c + 1)))


class TruncSSet:
    """Simplicial set truncated at ``max_dim``.

    ``nd[k]`` lists labels of nondegenerate ``k``-simplices and
    ``faces[k][j]`` holds the ``k + 1`` faces of simplex ``j`` as normal
    forms.  ``lossless`` records whether nothing was cut off above
    ``max_dim``.  ``kind == "chains"`` means labels are vertex-label tuples
    and every face is nondegenerate.
    """

    def __init__(
        self,
        max_dim: int,
        nd: Sequence[Sequence[Hashable]],
        faces: Sequence[Sequence[Sequence[Simplex]]],
        lossless: bool = True,
        kind: str = "general",
        check: bool = True,
    ):
        if len(nd) != max_dim + 1 or len(faces) != max_dim + 1:
            raise ValidationError("need simplex and face lists for every dimension up to max_dim")
        self.max_dim = max_dim
        self.nd = [list(level) for level in nd]
        self.index = [{lab: j for j, lab in enumerate(level)} for level in self.nd]
        for k, level in enumerate(self.nd):
            if len(self.index[k]) != len(level):
                raise ValidationError(f"duplicate labels in dimension {k}")
        self.faces = [[tuple(fs) for fs in level] for level in faces]
        self.lossless = lossless
        self.kind = kind
        if check:
            witness = self.identity_violation()
            if witness is not None:
                raise ValidationError(f"simplicial identity fails: {witness}")

    def __repr__(self) -> str:
        return f"TruncSSet(max_dim={self.max_dim}, counts={self.counts()})"

    def counts(self) -> list[int]:
        return [len(level) for level in self.nd]

    def top_dim(self) -> int:
        """Largest dimension with a nondegenerate simplex."""
        return max((k for k, level in enumerate(self.nd) if level), default=-1)

    def total_cells(self, n: int) -> int:
        """Number of all ``n``-simplices, degenerate ones included."""
        from math import comb

        return sum(comb(n, c) * len(self.nd[c]) for c in range(min(n, self.max_dim) + 1))

    # simplex operators

    def face(self, x: Simplex, i: int) -> Simplex:
        c, j, theta = x
        n = len(theta) - 1
        if n == 0:
            raise PreconditionError("vertices have no faces")
        if not 0 <= i <= n:
            raise PreconditionError(f"face index {i} out of range for dimension {n}")
        v = theta[i]
        rest = theta[:i] + theta[i + 1 :]
        if v in rest:
            return (c, j, rest)
        c2, j2, phi = self.faces[c][j][v]
        shifted = tuple(t - 1 if t > v else t for t in rest)
        return (c2, j2, tuple(phi[t] for t in shifted))

    def degeneracy(self, x: Simplex, j: int) -> Simplex:
        c, idx, theta = x
        if not 0 <= j < len(theta):
            raise PreconditionError(f"degeneracy index {j} out of range")
        return (c, idx, theta[: j + 1] + theta[j:])

    def pull(self, x: Simplex, surj: Sequence[int]) -> Simplex:
        """``x`` pulled back along a monotone surjection onto its dimension."""
        c, j, theta = x
        return (c, j, tuple(theta[t] for t in surj))

    def restrict(self, x: Simplex, alpha: Sequence[int]) -> Simplex:
        """``x`` pulled back along any monotone map ``alpha: [m] -> [n]``."""
        c, j, theta = x
        comp = [theta[a] for a in alpha]
        image = sorted(set(comp))
        y: Simplex = identity_nf(c, j)
        for v in reversed(range(c + 1)):
            if v not in image:
                y = self.face(y, v)
        pos = {v: k for k, v in enumerate(image)}
        c2, j2, phi = y
        return (c2, j2, tuple(phi[pos[v]] for v in comp))

    def dim(self, x: Simplex) -> int:
        return len(x[2]) - 1

    def is_degenerate(self, x: Simplex) -> bool:
        return x[0] != len(x[2]) - 1

    def nondegenerate(self, k: int) -> list[Simplex]:
        return [identity_nf(k, j) for j in range(len(self.nd[k]))]

    def simplices(self, n: int) -> Iterable[Simplex]:
        """All ``n``-simplices (``n <= max_dim``) in a fixed order."""
        for c in range(min(n, self.max_dim) + 1):
            for theta in surjections(n, c):
                for j in range(len(self.nd[c])):
                    yield (c, j, theta)

    @cached_property
    def core_vertices(self) -> list[list[tuple[int, ...]]]:
        out: list[list[tuple[int, ...]]] = [[(j,) for j in range(len(self.nd[0]))]]
        for c in range(1, self.max_dim + 1):
            level = []
            for fs in self.faces[c]:
                front = self._nf_vertices(fs[c], out)
                back = self._nf_vertices(fs[0], out)
                level.append(front + (back[-1],))
            out.append(level)
        return out

    @staticmethod
    def _nf_vertices(x: Simplex, table) -> tuple[int, ...]:
        c, j, theta = x
        core = table[c][j]
        return tuple(core[t] for t in theta)

    def vertices(self, x: Simplex) -> tuple[int, ...]:
        return self._nf_vertices(x, self.core_vertices)

    def vertex_labels(self, x: Simplex) -> tuple:
        return tuple(self.nd[0][v][0] if self.kind == "chains" else self.nd[0][v] for v in self.vertices(x))

    def label(self, x: Simplex):
        c, j, theta = x
        return (self.nd[c][j], theta)

    def lookup(self, k: int, label) -> Simplex:
        return identity_nf(k, self.index[k][label])

    def from_vertices(self, seq: Sequence) -> Simplex:
        """For chain-type complexes: the simplex with the given vertex labels."""
        if self.kind != "chains":
            raise PreconditionError("vertex lookup needs a chain-type complex")
        core = []
        theta = []
        for v in seq:
            if not core or core[-1] != v:
                core.append(v)
            theta.append(len(core) - 1)
        c = len(core) - 1
        try:
            j = self.index[c][tuple(core)]
        except (KeyError, IndexError):
            raise ValidationError(f"{tuple(seq)} is not a simplex") from None
        return (c, j, tuple(theta))

    def identity_violation(self):
        """First ``(simplex, i, j)`` with ``d_i d_j != d_{j-1} d_i``, or ``None``."""
        for k in range(2, self.max_dim + 1):
            for j0 in range(len(self.nd[k])):
                x = identity_nf(k, j0)
                for j in range(k + 1):
                    dj = self.face(x, j)
                    for i in range(j):
                        if self.face(dj, i) != self.face(self.face(x, i), j - 1):
                            return (k, self.nd[k][j0], i, j)
        for k in range(1, self.max_dim + 1):
            for j0, fs in enumerate(self.faces[k]):
                if len(fs) != k + 1:
                    return (k, self.nd[k][j0], "wrong number of faces")
                for f in fs:
                    if len(f[2]) != k:
                        return (k, self.nd[k][j0], "face of wrong dimension")
        return None

    # construction helpers

    @classmethod
    def from_chains(cls, chains: Iterable[tuple], max_dim: int, lossless: bool | None = None) -> "TruncSSet":
        """Chain-type complex generated by vertex-label tuples, closed under faces.

        Tuples longer than ``max_dim + 1`` contribute their faces only, and
        make the result lossy unless ``lossless`` says otherwise.
        """
        levels: list[set] = [set() for _ in range(max_dim + 1)]
        cut = False
        stack = []
        for ch in chains:
            ch = tuple(ch)
            if len(ch) - 1 > max_dim:
                cut = True
                for sub in combinations(ch, max_dim + 1):
                    stack.append(sub)
            else:
                stack.append(ch)
        while stack:
            ch = stack.pop()
            k = len(ch) - 1
            if ch in levels[k]:
                continue
            levels[k].add(ch)
            if k > 0:
                for i in range(k + 1):
                    sub = ch[:i] + ch[i + 1 :]
                    if sub not in levels[k - 1]:
                        stack.append(sub)
        return cls._from_levels(levels, max_dim, (not cut) if lossless is None else lossless)

    @classmethod
    def _from_levels(cls, levels, max_dim: int, lossless: bool) -> "TruncSSet":
        vertex_order = {v[0]: r for r, v in enumerate(sorted(levels[0], key=_sort_key))}
        nd = [sorted(level, key=lambda t: tuple(vertex_order[v] for v in t)) for level in levels]
        index = [{lab: j for j, lab in enumerate(level)} for level in nd]
        faces: list[list[tuple]] = [[() for _ in nd[0]]]
        for k in range(1, max_dim + 1):
            ident = tuple(range(k))
            faces.append([tuple((k - 1, index[k - 1][ch[:i] + ch[i + 1 :]], ident) for i in range(k + 1)) for ch in nd[k]])
        return cls(max_dim, nd, faces, lossless=lossless, kind="chains", check=False)

    def to_json(self) -> dict:
        return {
            "max_dim": self.max_dim,
            "kind": self.kind,
            "lossless": self.lossless,
            "simplices": [[_jsonable(lab) for lab in level] for level in self.nd],
            "faces": [[[[c, j, list(t)] for (c, j, t) in fs] for fs in level] for level in self.faces],
        }

    @classmethod
    def from_json(cls, doc: dict | str) -> "TruncSSet":
        if isinstance(doc, str):
            doc = json.loads(doc)
        nd = [[_hashable(lab) for lab in level] for level in doc["simplices"]]
        faces = [[[(c, j, tuple(t)) for c, j, t in fs] for fs in level] for level in doc["faces"]]
        return cls(doc["max_dim"], nd, faces, lossless=doc.get("lossless", True), kind=doc.get("kind", "general"))


def _sort_key(x):
    return repr(x) if not isinstance(x, tuple) else tuple(_sort_key(y) for y in x)


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    return x


def _hashable(x):
    if isinstance(x, list):
        return tuple(_hashable(y) for y in x)
    return x


def nerve(source, D: int, max_dim: int | None = None) -> TruncSSet:
    """Nerve of a :class:`FinPoset` or :class:`FinCat` truncated at ``D``."""
    from .fincat import FinCat
    from .poset import FinPoset

    check_cap("D", D, "NERVE_DIM", max_dim)
    if isinstance(source, FinPoset):
        return _poset_nerve(source, D)
    if isinstance(source, FinCat):
        return _category_nerve(source, D)
    raise ValidationError("nerve expects a FinPoset or FinCat")


def poset_chains(P, max_len: int | None = None) -> list[tuple[int, ...]]:
    """All strictly increasing chains of element indices."""
    out = []
    order = P.linear_extension

    def rec(chain):
        out.append(tuple(chain))
        if max_len is not None and len(chain) >= max_len:
            return
        last = chain[-1]
        for j in order:
            if j != last and P.leq(last, j):
                chain.append(j)
                rec(chain)
                chain.pop()

    for i in order:
        rec([i])
    return out


def _poset_nerve(P, D: int) -> TruncSSet:
    chains = poset_chains(P, max_len=D + 2)
    lossless = all(len(ch) <= D + 1 for ch in chains)
    labels = P.labels
    rank = {i: r for r, i in enumerate(P.linear_extension)}
    levels: list[list] = [[] for _ in range(D + 1)]
    for ch in chains:
        if len(ch) <= D + 1:
            levels[len(ch) - 1].append(ch)
    nd = []
    for level in levels:
        level.sort(key=lambda ch: tuple(rank[i] for i in ch))
        nd.append([tuple(labels[i] for i in ch) for ch in level])
    index = [{lab: j for j, lab in enumerate(level)} for level in nd]
    faces: list[list[tuple]] = [[() for _ in nd[0]]]
    for k in range(1, D + 1):
        ident = tuple(range(k))
        faces.append([tuple((k - 1, index[k - 1][ch[:i] + ch[i + 1 :]], ident) for i in range(k + 1)) for ch in nd[k]])
    return TruncSSet(D, nd, faces, lossless=lossless, kind="chains", check=False)


def _category_nerve(C, D: int) -> TruncSSet:
    """Simplices are chains of non-identity composable morphisms, first map first."""
    nonid = [m for m in range(C.n_morphisms) if not C.is_identity(m)]
    from_obj: dict[int, list[int]] = {}
    for m in nonid:
        from_obj.setdefault(C.src[m], []).append(m)
    levels: list[list[tuple]] = [[(o,) for o in C.objects]]
    chains = [(m,) for m in nonid]
    lossless = True
    for k in range(1, D + 1):
        levels.append([tuple(C.names[m] for m in ch) for ch in chains])
        nxt = [ch + (m,) for ch in chains for m in from_obj.get(C.dst[ch[-1]], [])]
        if k == D and nxt:
            lossless = False
        chains = nxt
    index = [{lab: j for j, lab in enumerate(level)} for level in levels]
    idn = set(C.names[i] for i in C.identity)

    def normal(objs: list[str], mors: list[str]) -> Simplex:
        core = [m for m in mors if m not in idn]
        theta = [0]
        for m in mors:
            theta.append(theta[-1] + (0 if m in idn else 1))
        c = len(core)
        if c == 0:
            return (0, index[0][(objs[0],)], tuple(theta))
        return (c, index[c][tuple(core)], tuple(theta))

    faces: list[list[tuple]] = [[() for _ in levels[0]]]
    for k in range(1, D + 1):
        level_faces = []
        for lab in levels[k]:
            ms = [C.m(x) for x in lab]
            objs = [C.objects[C.src[ms[0]]]] + [C.objects[C.dst[m]] for m in ms]
            fs = []
            for i in range(k + 1):
                if i == 0:
                    sub_m, sub_o = ms[1:], objs[1:]
                elif i == k:
                    sub_m, sub_o = ms[:-1], objs[:-1]
                else:
                    sub_m = ms[: i - 1] + [C.comp[ms[i], ms[i - 1]]] + ms[i + 1 :]
                    sub_o = objs[:i] + objs[i + 1 :]
                fs.append(normal(sub_o, [C.names[m] for m in sub_m]))
            level_faces.append(tuple(fs))
        faces.append(level_faces)
    return TruncSSet(D, levels, faces, lossless=lossless, kind="general", check=False)


def standard_complex(kind: str, n: int, k: int | None = None, D: int | None = None) -> TruncSSet:
    """``Δ^n``, ``∂Δ^n`` or the horn ``Λ^n_k`` on vertices ``0..n``."""
    if n < 0:
        raise ValidationError("n must be nonnegative")
    D = n if D is None else D
    full = tuple(range(n + 1))
    if kind == "simplex":
        return TruncSSet.from_chains([full], D)
    if kind == "boundary":
        if n == 0:
            return TruncSSet(D, [[] for _ in range(D + 1)], [[] for _ in range(D + 1)], kind="chains")
        return TruncSSet.from_chains([full[:i] + full[i + 1 :] for i in range(n + 1)], D, lossless=True)
    if kind == "horn":
        if k is None or not 0 <= k <= n or n < 1:
            raise ValidationError(f"horn index k={k} out of range for n={n}")
        return TruncSSet.from_chains([full[:i] + full[i + 1 :] for i in range(n + 1) if i != k], D, lossless=True)
    raise ValidationError(f"unknown complex kind {kind!r}")


def subcomplex(X: TruncSSet, keep: Callable[[int, Hashable], bool]) -> tuple[TruncSSet, "SMap"]:
    """Nondegenerate simplices satisfying ``keep(dim, label)``; must be face-closed."""
    kept = [[j for j, lab in enumerate(X.nd[k]) if keep(k, lab)] for k in range(X.max_dim + 1)]
    new_index = [{j: r for r, j in enumerate(level)} for level in kept]
    faces: list[list[tuple]] = []
    for k in range(X.max_dim + 1):
        level = []
        for j in kept[k]:
            fs = []
            for c, jj, t in X.faces[k][j]:
                if jj not in new_index[c]:
                    raise ValidationError(f"not closed under faces: {X.nd[k][j]!r} has a face outside")
                fs.append((c, new_index[c][jj], t))
            level.append(tuple(fs))
        faces.append(level)
    nd = [[X.nd[k][j] for j in kept[k]] for k in range(X.max_dim + 1)]
    Y = TruncSSet(X.max_dim, nd, faces, lossless=X.lossless, kind=X.kind, check=False)
    inc = SMap(Y, X, [[identity_nf(k, j) for j in kept[k]] for k in range(X.max_dim + 1)])
    return Y, inc


def product(X: TruncSSet, Y: TruncSSet, D: int | None = None) -> TruncSSet:
    """Levelwise product; nondegenerate simplices are jointly injective pairs.

    By default the result reaches ``dim X + dim Y`` when both factors are
    lossless and the common truncation otherwise.
    """
    if D is None:
        if X.lossless and Y.lossless:
            D = max(X.top_dim(), 0) + max(Y.top_dim(), 0)
        else:
            D = min(X.max_dim, Y.max_dim)
    elif D > min(X.max_dim, Y.max_dim) and not (X.lossless and Y.lossless):
        raise PreconditionError("cannot extend a lossy factor past its truncation")
    chain_kind = X.kind == "chains" and Y.kind == "chains"
    keys: list[list[tuple]] = []
    for n in range(D + 1):
        level = []
        for cx in range(min(n, X.max_dim) + 1):
            for cy in range(min(n, Y.max_dim) + 1):
                sx = surjections(n, cx)
                sy = surjections(n, cy)
                for tx in sx:
                    for ty in sy:
                        if len(set(zip(tx, ty))) != n + 1:
                            continue
                        for jx in range(len(X.nd[cx])):
                            for jy in range(len(Y.nd[cy])):
                                level.append(((cx, jx, tx), (cy, jy, ty)))
        keys.append(level)

    def label(key):
        x, y = key
        if chain_kind:
            return tuple(zip(X.vertex_labels(x), Y.vertex_labels(y)))
        return (X.label(x), Y.label(y))

    nd = [[label(key) for key in level] for level in keys]
    if chain_kind:
        order = [sorted(range(len(level)), key=lambda r, lv=level: _sort_key(lv[r])) for level in nd]
        keys = [[keys[k][r] for r in order[k]] for k in range(D + 1)]
        nd = [[nd[k][r] for r in order[k]] for k in range(D + 1)]
    index = [{key: j for j, key in enumerate(level)} for level in keys]

    def normalize(x: Simplex, y: Simplex) -> Simplex:
        pairs = list(zip(x[2], y[2]))
        rho = [0]
        for a, b in zip(pairs, pairs[1:]):
            rho.append(rho[-1] + (a != b))
        distinct = []
        for p in pairs:
            if not distinct or distinct[-1] != p:
                distinct.append(p)
        core = ((x[0], x[1], tuple(p[0] for p in distinct)), (y[0], y[1], tuple(p[1] for p in distinct)))
        m = len(distinct) - 1
        return (m, index[m][core], tuple(rho))

    faces: list[list[tuple]] = [[() for _ in keys[0]]]
    for n in range(1, D + 1):
        faces.append([tuple(normalize(X.face(x, i), Y.face(y, i)) for i in range(n + 1)) for x, y in keys[n]])
    lossless = X.lossless and Y.lossless and D >= max(X.top_dim(), 0) + max(Y.top_dim(), 0)
    return TruncSSet(D, nd, faces, lossless=lossless, kind="chains" if chain_kind else "general", check=False)


@dataclass
class SMap:
    """Images of nondegenerate simplices as normal forms in the target."""

    source: TruncSSet = field(repr=False)
    target: TruncSSet = field(repr=False)
    images: list

    def __call__(self, x: Simplex) -> Simplex:
        c, j, theta = x
        return self.target.pull(self.images[c][j], theta)

    @classmethod
    def from_vertex_map(cls, source: TruncSSet, target: TruncSSet, f: Callable) -> "SMap":
        """For chain-type complexes: map determined by vertex labels."""
        images = []
        for k in range(source.max_dim + 1):
            level = []
            for lab in source.nd[k]:
                verts = lab if source.kind == "chains" else None
                if verts is None:
                    raise PreconditionError("vertex maps need a chain-type source")
                level.append(target.from_vertices([f(v) for v in verts]))
            images.append(level)
        return cls(source, target, images)


def check_simplicial_map(f: SMap) -> tuple[bool, tuple | None]:
    """Commutation with faces and degeneracies; witness ``(dim, label, op, i)``."""
    X, Y = f.source, f.target
    if X.max_dim != Y.max_dim:
        return False, ("max_dim mismatch", X.max_dim, Y.max_dim)
    for k in range(X.max_dim + 1):
        for j in range(len(X.nd[k])):
            x = identity_nf(k, j)
            fx = f(x)
            if Y.dim(fx) != k:
                return False, (k, X.nd[k][j], "dim", None)
            if k > 0:
                for i in range(k + 1):
                    if f(X.face(x, i)) != Y.face(fx, i):
                        return False, (k, X.nd[k][j], "d", i)
            if k < X.max_dim:
                for i in range(k + 1):
                    if f(X.degeneracy(x, i)) != Y.degeneracy(fx, i):
                        return False, (k, X.nd[k][j], "s", i)
    return True, None


def identity_map(X: TruncSSet) -> SMap:
    return SMap(X, X, [X.nondegenerate(k) for k in range(X.max_dim + 1)])


@dataclass
class HornReport:
    max_dim: int
    counts: dict = field(default_factory=dict)
    unfillable: list = field(default_factory=list)
    multiple: list = field(default_factory=list)

    @property
    def classification(self) -> str:
        if self.unfillable:
            return "not inner-fibrant"
        if self.multiple:
            return "inner-fibrant"
        return "nerve-like"

    def to_json(self) -> dict:
        return {
            "max_dim": self.max_dim,
            "classification": self.classification,
            "horn_maps": {f"{n},{k}": v for (n, k), v in self.counts.items()},
            "unfillable": [list(map(repr, h)) for h in self.unfillable[:20]],
        }


def inner_horn_report(X: TruncSSet, D: int | None = None, max_maps: int | None = None) -> HornReport:
    """Count fillers of every inner horn ``Λ^n_k -> X`` for ``n <= D``."""
    D = X.max_dim if D is None else D
    if D > X.max_dim:
        raise PreconditionError(f"D = {D} exceeds the truncation {X.max_dim}")
    limit = cap("HORN_MAPS") if max_maps is None else max_maps
    report = HornReport(D)
    total = 0
    for n in range(2, D + 1):
        lower = list(X.simplices(n - 1))
        for k in range(1, n):
            fill: dict[tuple, int] = {}
            for x in X.simplices(n):
                key = tuple(X.face(x, i) for i in range(n + 1) if i != k)
                fill[key] = fill.get(key, 0) + 1
            idx = [i for i in range(n + 1) if i != k]
            horn_count = 0
            chosen: list[Simplex] = []

            def rec(pos: int):
                nonlocal horn_count, total
                if pos == len(idx):
                    horn_count += 1
                    total += 1
                    if total > limit:
                        raise CapExceeded("horn maps", total, limit)
                    cnt = fill.get(tuple(chosen), 0)
                    if cnt == 0:
                        report.unfillable.append((n, k, tuple(chosen)))
                    elif cnt > 1:
                        report.multiple.append((n, k, tuple(chosen), cnt))
                    return
                j = idx[pos]
                for y in lower:
                    ok = True
                    for p, i in enumerate(idx[:pos]):
                        # d_i y_j = d_{j-1} y_i for i < j
                        if X.face(y, i) != X.face(chosen[p], j - 1):
                            ok = False
                            break
                    if ok:
                        chosen.append(y)
                        rec(pos + 1)
                        chosen.pop()

            rec(0)
            report.counts[n, k] = horn_count
    return report
