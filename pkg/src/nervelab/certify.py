"""Inner-anodyne certificates: sequences of inner-horn fillings with a replay check.

A certificate starts from a face-closed set of nondegenerate simplices of a
chain-type complex (the nerve of a poset) and adds, per move, an
``m``-simplex together with its ``k``-th face (``0 < k < m``) once every
other face is present.  Pushouts of inner horns compose to inner-anodyne
maps, so a certificate that replays to the full ambient proves the
inclusion inner anodyne.

The verifier reads faces from the ambient's face tables; the searcher
computes faces by deleting vertices.  The two share no code.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .caps import cap, check_cap
from .errors import BudgetExhausted, PreconditionError, ValidationError
from .poset import CrtLattice, FinPoset, crt
from .simplicial import TruncSSet, nerve

SimplexId = tuple  # (dim, index)


@dataclass(frozen=True)
class Move:
    m: int
    k: int
    vertices: tuple
    stage: int = 0

    def to_json(self) -> dict:
        return {"m": self.m, "k": self.k, "vertices": [_plain(v) for v in self.vertices], "stage": self.stage}


@dataclass
class Certificate:
    ambient: TruncSSet = field(repr=False)
    start: frozenset = field(repr=False)
    moves: list
    stats: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.moves)

    def to_json(self) -> dict:
        return {
            "ambient_hash": ambient_hash(self.ambient),
            "start": sorted([d, j] for d, j in self.start),
            "moves": [mv.to_json() for mv in self.moves],
        }

    @classmethod
    def from_json(cls, ambient: TruncSSet, doc: dict | str) -> "Certificate":
        if isinstance(doc, str):
            doc = json.loads(doc)
        if doc.get("ambient_hash") != ambient_hash(ambient):
            raise ValidationError("certificate was issued for a different ambient complex")
        start = frozenset((int(d), int(j)) for d, j in doc["start"])
        moves = [Move(int(m["m"]), int(m["k"]), tuple(_unplain(v) for v in m["vertices"]), int(m.get("stage", 0))) for m in doc["moves"]]
        return cls(ambient, start, moves)


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


def _unplain(v):
    return tuple(v) if isinstance(v, list) else v


def ambient_hash(X: TruncSSet) -> str:
    """Digest of the nondegenerate simplex list, dimension by dimension."""
    payload = json.dumps([[repr(lab) for lab in level] for level in X.nd], separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


@dataclass
class Verdict:
    ok: bool
    failure_index: int | None = None
    reason: str | None = None
    missing: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def _core_faces(X: TruncSSet, d: int, j: int) -> list[SimplexId]:
    return [(c, jj) for c, jj, _ in X.faces[d][j]] if d > 0 else []


def verify_certificate(cert: Certificate) -> Verdict:
    """Replay the moves; succeeds iff each is a legal inner-horn filling and
    the final complex is the whole ambient."""
    X = cert.ambient
    present = set(cert.start)
    for d, j in present:
        if not 0 <= d <= X.max_dim or not 0 <= j < len(X.nd[d]):
            return Verdict(False, None, "start names a simplex outside the ambient", (d, j))
        for f in _core_faces(X, d, j):
            if f not in present:
                return Verdict(False, None, "start is not closed under faces", f)
    for idx, mv in enumerate(cert.moves):
        if not 0 < mv.k < mv.m:
            return Verdict(False, idx, f"horn index {mv.k} is not inner for dimension {mv.m}")
        if mv.m > X.max_dim or len(mv.vertices) != mv.m + 1:
            return Verdict(False, idx, "simplex has the wrong dimension")
        j = X.index[mv.m].get(tuple(mv.vertices))
        if j is None:
            return Verdict(False, idx, "simplex is not in the ambient")
        sid = (mv.m, j)
        if sid in present:
            return Verdict(False, idx, "simplex already present", sid)
        faces = _core_faces(X, mv.m, j)
        if any(f[0] != mv.m - 1 for f in faces):
            return Verdict(False, idx, "simplex has a degenerate face")
        if faces[mv.k] in present:
            return Verdict(False, idx, "filled face already present", faces[mv.k])
        for i, f in enumerate(faces):
            if i != mv.k and f not in present:
                return Verdict(False, idx, f"horn face d_{i} missing", f)
        present.add(sid)
        present.add(faces[mv.k])
    total = {(d, j) for d in range(X.max_dim + 1) for j in range(len(X.nd[d]))}
    if present != total:
        left = sorted(total - present)
        return Verdict(False, len(cert.moves), "moves do not exhaust the ambient", left[0] if left else None)
    return Verdict(True)


def simplex_ids(X: TruncSSet, keep: Callable[[tuple], bool]) -> frozenset:
    """Nondegenerate simplices whose vertex-label tuple satisfies ``keep``."""
    return frozenset((d, j) for d in range(X.max_dim + 1) for j, lab in enumerate(X.nd[d]) if keep(lab))


class _Search:
    """Depth-first filling with incremental missing-face counts."""

    def __init__(self, X: TruncSSet, present: set, max_attempts: int, max_seconds: float):
        if X.kind != "chains":
            raise PreconditionError("certificates need a chain-type complex (the nerve of a poset)")
        self.X = X
        self.present = set(present)
        self.max_attempts = max_attempts
        self.deadline = time.monotonic() + max_seconds
        self.attempts = 0
        self.backtracks = 0
        vrank = {lab[0]: r for r, lab in enumerate(X.nd[0])}
        self.key = {}
        self.faces = {}
        self.cofaces: dict = {}
        for d in range(X.max_dim + 1):
            for j, lab in enumerate(X.nd[d]):
                sid = (d, j)
                self.key[sid] = (d, tuple(vrank[v] for v in lab))
                if d == 0:
                    self.faces[sid] = ()
                    continue
                fs = tuple((d - 1, X.index[d - 1][lab[:i] + lab[i + 1 :]]) for i in range(d + 1))
                self.faces[sid] = fs
                for i, f in enumerate(fs):
                    self.cofaces.setdefault(f, []).append((sid, i))
        self.count: dict = {}
        self.ones: set = set()

    def open_stage(self, target: frozenset) -> None:
        self.target = target
        self.count = {}
        self.ones = set()
        for s in target:
            if s in self.present:
                continue
            c = sum(1 for f in self.faces[s] if f not in self.present)
            self.count[s] = c
            if c == 1:
                self.ones.add(s)

    def candidates(self) -> list:
        out = []
        for s in self.ones:
            m = s[0]
            if m < 2:
                continue
            k = next(i for i, f in enumerate(self.faces[s]) if f not in self.present)
            if 0 < k < m:
                out.append((self.key[s], s, k))
        out.sort()
        return out

    def _add(self, s) -> None:
        self.present.add(s)
        self.ones.discard(s)
        for c, _ in self.cofaces.get(s, ()):
            if c in self.count and c not in self.present:
                self.count[c] -= 1
                n = self.count[c]
                if n == 1:
                    self.ones.add(c)
                elif n == 0:
                    self.ones.discard(c)

    def _remove(self, s) -> None:
        self.present.discard(s)
        if s in self.count and self.count[s] == 1:
            self.ones.add(s)
        for c, _ in self.cofaces.get(s, ()):
            if c in self.count and c not in self.present:
                self.count[c] += 1
                n = self.count[c]
                if n == 1:
                    self.ones.add(c)
                elif n == 2:
                    self.ones.discard(c)

    def apply(self, s, k) -> None:
        f = self.faces[s][k]
        self._add(f)
        self._add(s)

    def undo(self, s, k) -> None:
        f = self.faces[s][k]
        self._remove(s)
        self._remove(f)

    def complete(self) -> bool:
        return self.target <= self.present

    def run_stage(self, stage: int) -> list:
        moves: list = []
        frames: list = [[self.candidates(), 0]]
        while not self.complete():
            cands, pos = frames[-1]
            if pos >= len(cands):
                frames.pop()
                if not moves:
                    raise BudgetExhausted("no sequence of legal moves completes this stage", self.stats(stage, moves))
                _, s, k = moves.pop()
                self.undo(s, k)
                self.backtracks += 1
                frames[-1][1] += 1
                continue
            self.attempts += 1
            if self.attempts > self.max_attempts or (self.attempts % 256 == 0 and time.monotonic() > self.deadline):
                raise BudgetExhausted("search budget exhausted", self.stats(stage, moves))
            _, s, k = cands[pos]
            self.apply(s, k)
            moves.append((stage, s, k))
            frames.append([self.candidates(), 0])
        return moves

    def stats(self, stage: int, moves: list) -> dict:
        return {
            "stage": stage,
            "attempts": self.attempts,
            "backtracks": self.backtracks,
            "present": len(self.present),
            "remaining": len(self.target - self.present),
            "depth": len(moves),
        }


def find_certificate(
    X: TruncSSet,
    start: Iterable[SimplexId],
    stages: Sequence[tuple[int, frozenset]] | None = None,
    max_attempts: int | None = None,
    max_seconds: float | None = None,
) -> Certificate:
    """Fill ``X`` from ``start`` by inner horns.

    ``stages`` is a list of ``(tag, target)`` with increasing targets; each
    move's simplex lies in the target of its stage.  Moves are tried in
    order of dimension, then vertex order.  Failure raises
    :class:`BudgetExhausted`, which is not evidence against the inclusion.
    """
    if not X.lossless:
        raise PreconditionError("the ambient must be the full nerve, not a truncation")
    max_attempts = int(cap("CERT_ATTEMPTS")) if max_attempts is None else max_attempts
    max_seconds = float(cap("CERT_SECONDS")) if max_seconds is None else max_seconds
    start = frozenset(start)
    total = frozenset((d, j) for d in range(X.max_dim + 1) for j in range(len(X.nd[d])))
    if not start <= total:
        raise ValidationError("start is not a set of simplices of the ambient")
    if stages is None:
        stages = [(0, total)]
    if stages[-1][1] != total:
        raise ValidationError("the last stage must be the whole ambient")
    if (len(total) - len(start)) % 2:
        raise BudgetExhausted(
            "odd number of simplices to add; every move adds two",
            {"remaining": len(total) - len(start), "parity": "odd"},
        )
    t0 = time.monotonic()
    search = _Search(X, set(start), max_attempts, max_seconds)
    for s in start:
        if any(f not in start for f in search.faces[s]):
            raise ValidationError("start is not closed under faces")
    moves = []
    prev = start
    for tag, target in stages:
        if not prev <= target:
            raise ValidationError(f"stage {tag} does not contain the previous stage")
        if (len(target) - len(search.present & target)) % 2:
            raise BudgetExhausted(f"stage {tag} adds an odd number of simplices", {"stage": tag, "parity": "odd"})
        search.open_stage(target)
        moves.extend(search.run_stage(tag))
        prev = target
    out = [Move(s[0], k, X.nd[s[0]][s[1]], tag) for tag, s, k in moves]
    stats = {
        "moves": len(out),
        "attempts": search.attempts,
        "backtracks": search.backtracks,
        "seconds": round(time.monotonic() - t0, 4),
        "start": len(start),
        "ambient": len(total),
    }
    return Certificate(X, start, out, stats)


def _height(P: FinPoset) -> int:
    """Length of the longest strict chain (number of steps)."""
    best = {}
    for i in P.linear_extension:
        best[i] = max((best[j] + 1 for j in P.linear_extension if j in best and P.lt(j, i)), default=0)
    return max(best.values(), default=0)


def interval_cover_certificate(P: FinPoset, pieces: Sequence[Iterable[int]], **budget) -> Certificate:
    """Certificate for ``⋃ N(P_i) ⊆ N(⋃ P_i)`` staged by the partial unions.

    Stage ``j`` fills ``N(P_0 ∪ ... ∪ P_j) ∪ N(P_{j+1}) ∪ ...``; the pieces
    must be listed in the order that makes each stage a horn filling.
    """
    pieces = [frozenset(p) for p in pieces]
    union = frozenset().union(*pieces)
    if union != frozenset(range(len(P))):
        raise ValidationError("pieces must cover the poset; pass their union as P")
    X = nerve(P, max(_height(P), 0))
    idx = P.index

    def stage_set(j):
        parts = [frozenset().union(*pieces[: j + 1])] + pieces[j + 1 :]
        return simplex_ids(X, lambda lab: any(all(idx[v] in part for v in lab) for part in parts))

    start = stage_set(0)
    stages = [(j, stage_set(j)) for j in range(1, len(pieces))] or [(0, start)]
    return find_certificate(X, start, stages, **budget)


def box_pieces(n: int) -> tuple[FinPoset, list[frozenset]]:
    """``RCpt^n`` with the intervals ``[(0, i), (i, n)]``."""
    P = FinPoset.rcpt(n)
    pieces = [frozenset(P.index[(a, b)] for (a, b) in P.labels if a <= i <= b) for i in range(n + 1)]
    return P, pieces


def cert_box_in_ccpt(n: int, **budget) -> Certificate:
    """Certificate for the inclusion of the box into the nerve of ``RCpt^n``."""
    check_cap("n", n, "CPT_N")
    P, pieces = box_pieces(n)
    return interval_cover_certificate(P, pieces, **budget)


def boxplus_pieces(n: int) -> tuple[FinPoset, list[frozenset], CrtLattice]:
    """``Crt^n`` with the intervals ``[xi(p, n), sigma(p, n)]``."""
    L = crt(n)
    pieces = [frozenset(L.intervals[p, n]) for p in range(n + 1)]
    return L.poset, pieces, L


def cert_boxplus_cover(n: int, **budget) -> Certificate:
    """Certificate for ``⋃_p N(Crt^n_{p,n}) ⊆ N(Crt^n)``."""
    check_cap("n", n, "CART_N")
    P, pieces, _ = boxplus_pieces(n)
    return interval_cover_certificate(P, pieces, **budget)
