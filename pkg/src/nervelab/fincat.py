"""Finite categories with a total composition table.

Objects and morphisms are addressed by integer index; names are kept for
reports and JSON.  ``C.comp[g, f]`` is ``g ∘ f`` (``f`` first).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .caps import check_cap
from .errors import NoPullback, PreconditionError, ValidationError
from .poset import FinPoset


class FinCat:
    def __init__(
        self,
        objects: Sequence[str],
        morphisms: Sequence[tuple[str, str, str]],
        compose: Iterable[tuple[str, str, str]],
        max_objects: int | None = None,
    ):
        """``morphisms`` are ``(name, src, dst)``; ``compose`` lists ``(g, f, g∘f)``.

        Identities ``id_<obj>`` and composites involving them are added when
        omitted.
        """
        objects = [str(o) for o in objects]
        check_cap("number of objects", len(objects), "CATEGORY_OBJECTS", max_objects)
        if len(set(objects)) != len(objects):
            raise ValidationError("duplicate object names")
        self.objects = tuple(objects)
        self.obj_index = {o: i for i, o in enumerate(objects)}
        names: list[str] = []
        src: list[int] = []
        dst: list[int] = []
        for name, s, d in morphisms:
            name = str(name)
            if s not in self.obj_index or d not in self.obj_index:
                raise ValidationError(f"morphism {name} has dangling src/dst ({s!r}, {d!r})")
            if name in names:
                raise ValidationError(f"duplicate morphism name {name}")
            names.append(name)
            src.append(self.obj_index[s])
            dst.append(self.obj_index[d])
        identity = []
        for o, oname in enumerate(objects):
            idname = f"id_{oname}"
            if idname in names:
                k = names.index(idname)
                if src[k] != o or dst[k] != o:
                    raise ValidationError(f"{idname} must be an endomorphism of {oname}")
            else:
                names.append(idname)
                src.append(o)
                dst.append(o)
                k = len(names) - 1
            identity.append(k)
        self.names = tuple(names)
        self.mor_index = {n: i for i, n in enumerate(names)}
        self.src = tuple(src)
        self.dst = tuple(dst)
        self.identity = tuple(identity)
        idset = set(identity)

        comp: dict[tuple[int, int], int] = {}
        for g, f, h in compose:
            try:
                gi, fi, hi = self.mor_index[str(g)], self.mor_index[str(f)], self.mor_index[str(h)]
            except KeyError as exc:
                raise ValidationError(f"composition entry mentions unknown morphism {exc.args[0]}") from None
            if self.src[gi] != self.dst[fi]:
                raise ValidationError(f"composition entry ({g}, {f}) is not composable")
            if self.src[hi] != self.src[fi] or self.dst[hi] != self.dst[gi]:
                raise ValidationError(f"composite {h} of ({g}, {f}) has the wrong source or target")
            if (gi, fi) in comp and comp[gi, fi] != hi:
                raise ValidationError(f"conflicting composites for ({g}, {f})")
            comp[gi, fi] = hi
        for m in range(len(names)):
            for i in (identity[self.src[m]],):
                comp.setdefault((m, i), m)
            for i in (identity[self.dst[m]],):
                comp.setdefault((i, m), m)
        self.comp = comp

        self.hom: list[list[list[int]]] = [[[] for _ in objects] for _ in objects]
        self._into: list[list[int]] = [[] for _ in objects]
        self._from: list[list[int]] = [[] for _ in objects]
        for m in range(len(names)):
            self.hom[self.src[m]][self.dst[m]].append(m)
            self._into[self.dst[m]].append(m)
            self._from[self.src[m]].append(m)
        self._cone_cache: dict = {}
        self._pullback_cache: dict = {}
        self._cartesian_cache: dict = {}
        self._validate(idset)

    def _validate(self, idset: set) -> None:
        n = len(self.names)
        for g in range(n):
            for f in self.hom_into(self.src[g]):
                if (g, f) not in self.comp:
                    raise ValidationError(f"missing composite {self.names[g]}∘{self.names[f]}")
        for m in range(n):
            if self.comp[m, self.identity[self.src[m]]] != m or self.comp[self.identity[self.dst[m]], m] != m:
                raise ValidationError(f"unit law fails for {self.names[m]}")
        for g in range(n):
            for f in self.hom_into(self.src[g]):
                gf = self.comp[g, f]
                for h in self.hom_into(self.src[f]):
                    left = self.comp[g, self.comp[f, h]]
                    right = self.comp[gf, h]
                    if left != right:
                        raise ValidationError(
                            f"associativity fails at ({self.names[g]}, {self.names[f]}, {self.names[h]}): "
                            f"g∘(f∘h) = {self.names[left]} but (g∘f)∘h = {self.names[right]}"
                        )

    def __repr__(self) -> str:
        return f"FinCat({len(self.objects)} objects, {len(self.names)} morphisms)"

    @property
    def n_morphisms(self) -> int:
        return len(self.names)

    def m(self, name: str) -> int:
        return self.mor_index[name]

    def o(self, name: str) -> int:
        return self.obj_index[name]

    def hom_into(self, x: int) -> list[int]:
        return self._into[x]

    def hom_from(self, x: int) -> list[int]:
        return self._from[x]

    def compose(self, *ms: int) -> int:
        """``compose(g, f, h) = g ∘ f ∘ h``."""
        out = ms[-1]
        for g in reversed(ms[:-1]):
            if self.src[g] != self.dst[out]:
                raise PreconditionError(f"{self.names[g]} and {self.names[out]} are not composable")
            out = self.comp[g, out]
        return out

    def is_identity(self, m: int) -> bool:
        return self.identity[self.src[m]] == m

    def inverse(self, m: int) -> int | None:
        for k in self.hom[self.dst[m]][self.src[m]]:
            if self.comp[k, m] == self.identity[self.src[m]] and self.comp[m, k] == self.identity[self.dst[m]]:
                return k
        return None

    def is_iso(self, m: int) -> bool:
        return self.inverse(m) is not None

    def is_mono(self, m: int) -> bool:
        return self.mono_witness(m) is None

    def mono_witness(self, m: int):
        """A parallel pair ``(a, b)`` with ``m∘a = m∘b`` and ``a != b``."""
        y = self.src[m]
        for w in range(len(self.objects)):
            maps = self.hom[w][y]
            seen: dict[int, int] = {}
            for a in maps:
                c = self.comp[m, a]
                if c in seen:
                    return (seen[c], a)
                seen[c] = a
        return None

    @cached_property
    def isomorphisms(self) -> frozenset:
        return frozenset(m for m in range(len(self.names)) if self.is_iso(m))

    # pullbacks

    def cones(self, f: int, g: int) -> list[tuple[int, int, int]]:
        """All ``(w, a, b)`` with ``f∘a = g∘b`` over the cospan ``f, g``."""
        key = (f, g)
        if key not in self._cone_cache:
            if self.dst[f] != self.dst[g]:
                raise PreconditionError(f"{self.names[f]} and {self.names[g]} do not form a cospan")
            y, z = self.src[f], self.src[g]
            out = []
            for w in range(len(self.objects)):
                for a in self.hom[w][y]:
                    fa = self.comp[f, a]
                    for b in self.hom[w][z]:
                        if self.comp[g, b] == fa:
                            out.append((w, a, b))
            self._cone_cache[key] = out
        return self._cone_cache[key]

    def factorizations(self, cone, apex) -> list[int]:
        """Maps ``u`` from ``cone`` to ``apex`` with ``a∘u = a'`` and ``b∘u = b'``."""
        w2, a2, b2 = cone
        w, a, b = apex
        return [u for u in self.hom[w2][w] if self.comp[a, u] == a2 and self.comp[b, u] == b2]

    def is_terminal_cone(self, f: int, g: int, apex) -> bool:
        return all(len(self.factorizations(c, apex)) == 1 for c in self.cones(f, g))

    def pullback(self, f: int, g: int, strict: bool = False) -> "PullbackCone | None":
        """Terminal cone over ``f: y -> x <- z: g``, smallest apex then legs.

        Returns ``None`` when no terminal cone exists, or raises
        :class:`NoPullback` if ``strict``.
        """
        key = (f, g)
        if key not in self._pullback_cache:
            cones = self.cones(f, g)
            found = None
            for cone in cones:
                if self.is_terminal_cone(f, g, cone):
                    found = cone
                    break
            if found is None:
                self._pullback_cache[key] = None
            else:
                witness = tuple((c, self.factorizations(c, found)[0]) for c in cones)
                self._pullback_cache[key] = PullbackCone(found[0], found[1], found[2], f, g, witness)
        result = self._pullback_cache[key]
        if result is None and strict:
            cones = self.cones(f, g)
            reason = "no commuting cones" if not cones else f"none of the {len(cones)} cones is terminal"
            raise NoPullback((self.names[f], self.names[g]), reason)
        return result

    def cospans(self) -> Iterable[tuple[int, int]]:
        n = len(self.names)
        for f in range(n):
            for g in range(n):
                if self.dst[f] == self.dst[g]:
                    yield f, g

    @cached_property
    def pullback_failure(self):
        """First cospan without a pullback, or ``None``."""
        for f, g in self.cospans():
            if self.pullback(f, g) is None:
                return (self.names[f], self.names[g])
        return None

    @property
    def admits_pullbacks(self) -> bool:
        return self.pullback_failure is None

    def terminal_cones(self, f: int, g: int) -> list[tuple[int, int, int]]:
        """Every cone isomorphic to the chosen pullback."""
        pb = self.pullback(f, g)
        if pb is None:
            return []
        return [c for c in self.cones(f, g) if self.is_iso(pb.factor(c))]

    # constructions

    @classmethod
    def from_poset(cls, P: FinPoset) -> "FinCat":
        """Poset as a category; the arrow ``a <= b`` is named ``a->b``."""
        labels = [_label(x) for x in P.labels]
        n = len(P)

        def name(i, j):
            return f"id_{labels[i]}" if i == j else f"{labels[i]}->{labels[j]}"

        morphisms = [(name(i, j), labels[i], labels[j]) for i in range(n) for j in range(n) if P.leq(i, j)]
        compose = [
            (name(j, k), name(i, j), name(i, k))
            for i in range(n)
            for j in range(n)
            if P.leq(i, j)
            for k in range(n)
            if P.leq(j, k)
        ]
        return cls(labels, morphisms, compose)

    def opposite(self) -> "FinCat":
        morphisms = [(self.names[m], self.objects[self.dst[m]], self.objects[self.src[m]]) for m in range(len(self.names))]
        compose = [(self.names[f], self.names[g], self.names[h]) for (g, f), h in self.comp.items()]
        return FinCat(self.objects, morphisms, compose)

    def subcategory(self, morphisms: Iterable[int]) -> "FinCat":
        """Wide subcategory on ``morphisms`` plus identities; must be closed."""
        keep = set(morphisms) | set(self.identity)
        for g in keep:
            for f in keep:
                if self.src[g] == self.dst[f] and self.comp[g, f] not in keep:
                    raise ValidationError(
                        f"not closed under composition: {self.names[g]}∘{self.names[f]} = {self.names[self.comp[g, f]]}"
                    )
        order = sorted(keep)
        return FinCat(
            self.objects,
            [(self.names[m], self.objects[self.src[m]], self.objects[self.dst[m]]) for m in order],
            [(self.names[g], self.names[f], self.names[self.comp[g, f]]) for g in order for f in order if self.src[g] == self.dst[f]],
        )

    def to_json(self, classes: dict | None = None) -> dict:
        doc = {
            "objects": list(self.objects),
            "morphisms": [
                {"id": self.names[m], "src": self.objects[self.src[m]], "dst": self.objects[self.dst[m]]}
                for m in range(len(self.names))
                if not self.is_identity(m)
            ],
            "compose": [
                [self.names[g], self.names[f], self.names[h]]
                for (g, f), h in sorted(self.comp.items())
                if not self.is_identity(g) and not self.is_identity(f)
            ],
        }
        if classes:
            doc["classes"] = {
                k: [self.names[m] for m in sorted(E.members) if not self.is_identity(m)] for k, E in classes.items()
            }
        return doc


def _label(x) -> str:
    if isinstance(x, tuple):
        return "".join(str(v) for v in x)
    return str(x)


def validate_category(doc: dict | str) -> FinCat:
    """Build a :class:`FinCat` from the JSON schema, checking all laws."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    for key in ("objects", "morphisms"):
        if key not in doc:
            raise ValidationError(f"category document lacks {key!r}")
    morphisms = []
    for m in doc["morphisms"]:
        try:
            morphisms.append((m["id"], m["src"], m["dst"]))
        except (KeyError, TypeError):
            raise ValidationError(f"malformed morphism entry {m!r}") from None
    compose = []
    for entry in doc.get("compose", []):
        if len(entry) != 3:
            raise ValidationError(f"composition entry {entry!r} must be [g, f, g∘f]")
        compose.append(tuple(entry))
    return FinCat(doc["objects"], morphisms, compose)


def load_classes(C: FinCat, doc: dict) -> dict[str, "EdgeClass"]:
    out = {}
    for name, members in doc.get("classes", {}).items():
        out[name] = EdgeClass.from_names(C, members, name)
    return out


@dataclass(frozen=True)
class EdgeClass:
    """A set of morphisms; identities are always added."""

    carrier: FinCat = field(repr=False)
    members: frozenset
    name: str = "E"

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members) | frozenset(self.carrier.identity))

    def __contains__(self, m: int) -> bool:
        return m in self.members

    @classmethod
    def from_names(cls, C: FinCat, names: Iterable[str], name: str = "E") -> "EdgeClass":
        try:
            return cls(C, frozenset(C.mor_index[str(n)] for n in names), name)
        except KeyError as exc:
            raise ValidationError(f"class {name} mentions unknown morphism {exc.args[0]}") from None

    @classmethod
    def all(cls, C: FinCat, name: str = "all") -> "EdgeClass":
        return cls(C, frozenset(range(C.n_morphisms)), name)

    @classmethod
    def isos(cls, C: FinCat, name: str = "iso") -> "EdgeClass":
        return cls(C, C.isomorphisms, name)

    def __and__(self, other: "EdgeClass") -> "EdgeClass":
        return EdgeClass(self.carrier, self.members & other.members, f"{self.name}∩{other.name}")

    def names(self) -> list[str]:
        return [self.carrier.names[m] for m in sorted(self.members)]


@dataclass(frozen=True)
class Square:
    """``top: nw -> ne``, ``left: nw -> sw``, ``right: ne -> se``, ``bottom: sw -> se``."""

    nw: int
    ne: int
    sw: int
    se: int
    top: int
    bottom: int
    left: int
    right: int

    @classmethod
    def from_edges(cls, C: FinCat, top: int, left: int, right: int, bottom: int) -> "Square":
        sq = cls(C.src[top], C.dst[top], C.dst[left], C.dst[right], top, bottom, left, right)
        if C.src[left] != sq.nw or C.src[right] != sq.ne or C.src[bottom] != sq.sw or C.dst[bottom] != sq.se:
            raise PreconditionError("square edges do not fit together")
        return sq

    def commutes(self, C: FinCat) -> bool:
        return C.comp[self.right, self.top] == C.comp[self.bottom, self.left]


@dataclass(frozen=True)
class PullbackCone:
    """Apex with legs ``a: apex -> y`` and ``b: apex -> z`` over ``f: y -> x <- z: g``.

    ``witness`` pairs every commuting cone with its unique factorization.
    """

    apex: int
    leg_y: int
    leg_z: int
    f: int
    g: int
    witness: tuple = field(repr=False, compare=False)

    def factor(self, cone) -> int:
        for c, u in self.witness:
            if c == tuple(cone):
                return u
        raise PreconditionError(f"{cone} is not a cone over this cospan")


def is_cartesian_square(C: FinCat, sq: Square) -> bool:
    """Whether ``(nw, top, left)`` is terminal over ``ne -> se <- sw``."""
    if not sq.commutes(C):
        raise PreconditionError("square does not commute")
    key = (sq.top, sq.left, sq.right, sq.bottom)
    cache = C._cartesian_cache
    if key not in cache:
        cache[key] = C.is_terminal_cone(sq.right, sq.bottom, (sq.nw, sq.top, sq.left))
    return cache[key]


def pullback(C: FinCat, f: int, g: int) -> PullbackCone | None:
    return C.pullback(f, g)


def diagonal_of(C: FinCat, f: int) -> int:
    """The map ``y -> y ×_x y`` induced by ``(id_y, id_y)``."""
    pb = C.pullback(f, f, strict=True)
    y = C.src[f]
    ident = C.identity[y]
    return pb.factor((y, ident, ident))


def cartesian_squares(C: FinCat, right_class=None, bottom_class=None) -> Iterable[Square]:
    """All Cartesian squares with ``right`` and ``bottom`` in the given sets."""
    for e in range(C.n_morphisms):
        if right_class is not None and e not in right_class:
            continue
        for f in C.hom_into(C.dst[e]):
            if bottom_class is not None and f not in bottom_class:
                continue
            for w, a, b in C.terminal_cones(e, f):
                yield Square(w, C.src[e], C.src[f], C.dst[e], a, f, b, e)


def _flag(ok: bool, witness=None) -> dict:
    return {"pass": ok, "witness": None if ok else witness}


def _square_names(C: FinCat, sq: Square) -> dict:
    return {k: C.names[getattr(sq, k)] for k in ("top", "left", "right", "bottom")}


def stable_under_pullback(C: FinCat, E: EdgeClass, F: EdgeClass | None = None) -> dict:
    for sq in cartesian_squares(C, E.members, None if F is None else F.members):
        if sq.left not in E:
            return _flag(False, _square_names(C, sq))
    return _flag(True)


def class_properties(C: FinCat, E: EdgeClass, others: Sequence[EdgeClass] = ()) -> dict:
    """Flags with counterexamples for the closure properties of ``E``.

    Pullback stability only quantifies over cospans whose pullback exists.
    """
    names = C.names
    report: dict = {}
    missing = [names[i] for i in C.identity if i not in E]
    report["contains_identities"] = _flag(not missing, missing[:1])

    comp_witness = None
    for g in E.members:
        for f in E.members:
            if C.src[g] == C.dst[f] and C.comp[g, f] not in E:
                comp_witness = (names[g], names[f])
                break
        if comp_witness:
            break
    report["stable_under_composition"] = _flag(comp_witness is None, comp_witness)
    report["stable_under_pullback"] = stable_under_pullback(C, E)
    for F in others:
        report[f"stable_under_pullback_by_{F.name}"] = stable_under_pullback(C, E, F)

    cancel_witness = None
    for p in E.members:
        for q in C.hom_into(C.src[p]):
            if (C.comp[p, q] in E) != (q in E):
                cancel_witness = (names[p], names[q])
                break
        if cancel_witness:
            break
    report["cancellation"] = _flag(cancel_witness is None, cancel_witness)

    diag_witness = None
    for f in E.members:
        pb = C.pullback(f, f)
        if pb is not None:
            d = pb.factor((C.src[f], C.identity[C.src[f]], C.identity[C.src[f]]))
            if d not in E:
                diag_witness = (names[f], names[d])
                break
    report["stable_under_diagonal"] = _flag(diag_witness is None, diag_witness)
    report["admissible"] = {
        "pass": all(report[k]["pass"] for k in ("contains_identities", "stable_under_pullback", "cancellation")),
        "witness": None,
    }
    return report


def factorization_check(C: FinCat, E1: EdgeClass, E2: EdgeClass, morphisms: Iterable[int] | None = None) -> dict:
    """All ``f = p∘q`` with ``p`` in ``E1`` and ``q`` in ``E2``."""
    targets = range(C.n_morphisms) if morphisms is None else morphisms
    table = {}
    failing = None
    for f in targets:
        found = []
        for q in C.hom_from(C.src[f]):
            if q not in E2:
                continue
            for p in C.hom[C.dst[q]][C.dst[f]]:
                if p in E1 and C.comp[p, q] == f:
                    found.append((C.names[p], C.names[q]))
        table[C.names[f]] = found
        if not found and failing is None:
            failing = C.names[f]
    return {"pass": failing is None, "witness": failing, "factorizations": table}


def is_filtered(D: FinCat) -> tuple[bool, dict]:
    """Nonempty, cocones on pairs of objects, coequalizing maps for parallel pairs."""
    if not D.objects:
        return False, {"failure": "empty"}
    n = len(D.objects)
    cocones = {}
    for a in range(n):
        for b in range(a, n):
            c = next((c for c in range(n) if D.hom[a][c] and D.hom[b][c]), None)
            if c is None:
                return False, {"failure": "no cocone", "pair": (D.objects[a], D.objects[b])}
            cocones[D.objects[a], D.objects[b]] = D.objects[c]
    coeq = {}
    for x in range(n):
        for y in range(n):
            maps = D.hom[x][y]
            for i, f in enumerate(maps):
                for g in maps[i + 1 :]:
                    h = next((h for h in D.hom_from(y) if D.comp[h, f] == D.comp[h, g]), None)
                    if h is None:
                        return False, {"failure": "no coequalizing map", "pair": (D.names[f], D.names[g])}
                    coeq[D.names[f], D.names[g]] = D.names[h]
    return True, {"cocones": cocones, "coequalizers": coeq}
