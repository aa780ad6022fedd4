"""Small bundled categories with edge classes.

Positive models satisfy the two-class factorization hypotheses; negative
controls each break one named condition.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from itertools import product

from .errors import ValidationError
from .fincat import EdgeClass, FinCat, load_classes, validate_category
from .poset import FinPoset


@dataclass
class Model:
    name: str
    category: FinCat
    classes: dict = field(default_factory=dict)
    description: str = ""
    breaks: str | None = None
    chain: list | None = None

    def E(self, name: str) -> EdgeClass:
        return self.classes[name]

    def to_json(self) -> dict:
        doc = self.category.to_json(self.classes)
        doc["name"] = self.name
        doc["description"] = self.description
        if self.breaks:
            doc["breaks"] = self.breaks
        if self.chain is not None:
            doc["chain"] = [[self.category.names[m] for m in sorted(E.members) if not self.category.is_identity(m)] for E in self.chain]
        return doc


def model_from_json(doc: dict) -> Model:
    C = validate_category(doc)
    classes = load_classes(C, doc)
    if "E0" not in classes:
        classes["E0"] = EdgeClass.all(C, "E0")
    chain = None
    if "chain" in doc:
        chain = [EdgeClass.from_names(C, names, f"E'{i}") for i, names in enumerate(doc["chain"])]
    return Model(doc.get("name", "model"), C, classes, doc.get("description", ""), doc.get("breaks"), chain)


def _named(C: FinCat, names, label):
    return EdgeClass.from_names(C, names, label)


def one_compactification() -> Model:
    """``U -q-> Xb -p-> X`` with ``j = p∘q``; ``E1 = {p}``, ``E2 = {q}``."""
    C = FinCat(
        ["U", "Xb", "X"],
        [("q", "U", "Xb"), ("p", "Xb", "X"), ("j", "U", "X")],
        [("p", "q", "j")],
    )
    classes = {"E0": EdgeClass.all(C, "E0"), "E1": _named(C, ["p"], "E1"), "E2": _named(C, ["q"], "E2")}
    return Model("toy1", C, classes, "one compactification of j")


def two_compactifications() -> Model:
    """``U -> X1 -r-> X2 -> X``: two compactifications of ``j`` compared by ``r``."""
    C = FinCat(
        ["U", "X1", "X2", "X"],
        [
            ("q1", "U", "X1"),
            ("q2", "U", "X2"),
            ("r", "X1", "X2"),
            ("p1", "X1", "X"),
            ("p2", "X2", "X"),
            ("j", "U", "X"),
        ],
        [("r", "q1", "q2"), ("p2", "r", "p1"), ("p1", "q1", "j"), ("p2", "q2", "j")],
    )
    classes = {
        "E0": EdgeClass.all(C, "E0"),
        "E1": _named(C, ["r", "p1", "p2"], "E1"),
        "E2": _named(C, ["q1", "q2"], "E2"),
    }
    return Model("toy2", C, classes, "two compactifications of j with comparison r")


def poset_model(name: str, P: FinPoset, e1, e2, e0=None, description: str = "", breaks=None) -> Model:
    C = FinCat.from_poset(P)
    allm = range(C.n_morphisms)

    def cls(pred, label):
        if pred is None:
            return EdgeClass.all(C, label)
        return EdgeClass(C, frozenset(m for m in allm if pred(P.labels[P.index[_unlabel(P, C.objects[C.src[m]])]], P.labels[P.index[_unlabel(P, C.objects[C.dst[m]])]])), label)

    classes = {"E0": cls(e0, "E0"), "E1": cls(e1, "E1"), "E2": cls(e2, "E2")}
    return Model(name, C, classes, description, breaks)


def _unlabel(P: FinPoset, name: str):
    for lab in P.labels:
        if _lab(lab) == name:
            return lab
    raise ValidationError(name)


def _lab(x) -> str:
    return "".join(map(str, x)) if isinstance(x, tuple) else str(x)


def grid_model() -> Model:
    """The poset ``[2] x [2]``: ``E1`` all maps, ``E2`` maps fixing the first coordinate."""
    P = FinPoset.grid(2)
    return poset_model("grid", P, None, lambda a, b: a[0] == b[0], description="3x3 grid, E2 horizontal")


def boolean_lattice() -> Model:
    """Subsets of a 3-element set as a poset category; all classes are everything."""
    labels = ["".join(bits) for bits in product("01", repeat=3)]
    P = FinPoset.from_relation(labels, [(a, b) for a in labels for b in labels if all(x <= y for x, y in zip(a, b))])
    return poset_model("b3", P, None, None, description="Boolean lattice on 3 atoms")


def z2_sets() -> Model:
    """Finite sets with an involution: a point, a free orbit and two free orbits.

    ``t: F -> *`` is not a monomorphism; its kernel pair is ``D``.  ``E1 = E2``
    holds the isomorphisms, ``t`` and the maps ``F -> D``.
    """
    sets = {"*": (0,), "F": (1, 0), "D": (1, 0, 3, 2)}
    objs = list(sets)
    mors = []
    table = {}
    for s in objs:
        for d in objs:
            act_s, act_d = sets[s], sets[d]
            for f in product(range(len(act_d)), repeat=len(act_s)):
                if all(f[act_s[x]] == act_d[f[x]] for x in range(len(act_s))):
                    if s == d and f == tuple(range(len(act_s))):
                        name = f"id_{s}"
                    else:
                        name = f"{s}{d}_{''.join(map(str, f))}"
                    mors.append((name, s, d))
                    table[name] = (s, d, f)
    compose = []
    by_data = {v: k for k, v in table.items()}
    for g, (gs, gd, gf) in table.items():
        for f, (fs, fd, ff) in table.items():
            if fd == gs:
                h = tuple(gf[x] for x in ff)
                compose.append((g, f, by_data[fs, gd, h]))
    C = FinCat(objs, [m for m in mors if not m[0].startswith("id_")], compose)
    E = [n for n in C.names if n == "F*_00" or n.startswith("FD_") or C.is_iso(C.m(n))]
    classes = {"E0": EdgeClass.all(C, "E0"), "E1": _named(C, E, "E1"), "E2": _named(C, E, "E2")}
    return Model("z2sets", C, classes, "sets with involution; F -> * is not mono")


def _chain_poset(n: int) -> FinPoset:
    return FinPoset.chain(n)


def negative_controls() -> list[Model]:
    out = []
    P3 = _chain_poset(3)
    out.append(
        poset_model(
            "neg_e0_composition",
            P3,
            e1=lambda a, b: (a, b) == (1, 2),
            e2=lambda a, b: (a, b) in ((0, 1), (2, 3)),
            e0=lambda a, b: (a, b) in ((0, 1), (1, 2), (2, 3), (0, 2)),
            description="E0 misses 1->3 = (2->3)∘(1->2)",
            breaks="E0 stable under composition",
        )
    )
    P2 = _chain_poset(2)
    out.append(
        poset_model(
            "neg_e1_subset",
            P2,
            e1=lambda a, b: (a, b) == (1, 2),
            e2=lambda a, b: (a, b) == (0, 1),
            e0=lambda a, b: (a, b) in ((0, 1), (0, 2)),
            description="1->2 is in E1 but not E0",
            breaks="E1 ⊆ E0",
        )
    )
    out.append(
        poset_model(
            "neg_factorization",
            P2,
            e1=lambda a, b: a == b,
            e2=lambda a, b: (a, b) == (0, 1),
            description="1->2 has no factorization",
            breaks="every f in E0 factors as p∘q, p in E1, q in E2",
        )
    )
    out.append(
        poset_model(
            "neg_pullback_stability",
            P2,
            e1=lambda a, b: (a, b) == (0, 2),
            e2=None,
            description="pulling 0->2 back along 1->2 gives 0->1, not in E1",
            breaks="E1 stable under pullback",
        )
    )
    out.append(_neg_subcategory_pullbacks())
    z = z2_sets()
    C = z.category
    inter = z.E("E1") & z.E("E2")
    z.name = "neg_gluing_chain"
    z.chain = [EdgeClass.isos(C, "E'0"), EdgeClass(C, inter.members, "E'1")]
    z.description = "chain skips the monomorphisms: the diagonal of F -> * is not an isomorphism"
    z.breaks = "diagonals of E'1 lie in E'0"
    out.append(z)
    return out


def _neg_subcategory_pullbacks() -> Model:
    """``⊥ < a, b < 1`` with ``0`` below ``a, b`` only through ``⊥``.

    Chosen by search: the pullback of ``a->1`` and ``b->1`` inside ``C_E1``
    differs from the one in ``C``.
    """
    labels = ["bot", "m", "a", "b", "top"]
    P = FinPoset.from_relation(labels, [("bot", "m"), ("m", "a"), ("m", "b"), ("a", "top"), ("b", "top")])
    keep = {("a", "top"), ("b", "top"), ("bot", "a"), ("bot", "b"), ("bot", "top")}
    return poset_model(
        "neg_subcategory_pullbacks",
        P,
        e1=lambda x, y: (x, y) in keep,
        e2=None,
        description="in C_E1 the pullback of a->top, b->top is bot, in C it is m",
        breaks="C_E1 admits pullbacks preserved by the inclusion",
    )


def positive_models() -> list[Model]:
    return [one_compactification(), two_compactifications(), grid_model(), boolean_lattice()]


BUILDERS = {
    "toy1": one_compactification,
    "toy2": two_compactifications,
    "grid": grid_model,
    "b3": boolean_lattice,
    "z2sets": z2_sets,
}


def bundled(name: str) -> Model:
    """A bundled model by name, read from the package data directory."""
    try:
        text = resources.files("nervelab").joinpath("data", f"{name}.json").read_text()
    except FileNotFoundError:
        raise ValidationError(f"no bundled model named {name!r}") from None
    return model_from_json(json.loads(text))


def all_builders() -> dict:
    out = dict(BUILDERS)
    for m in negative_controls():
        out[m.name] = (lambda mm=m: mm)
    return out


def write_bundled(directory) -> list[str]:
    """Regenerate the JSON files for every bundled model."""
    from pathlib import Path

    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in sorted(all_builders().items()):
        (path / f"{name}.json").write_text(json.dumps(build().to_json(), indent=1, sort_keys=True) + "\n")
        written.append(name)
    return written
