"""Integral homology of truncated simplicial sets via Smith normal form."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import NervelabError, PreconditionError
from .simplicial import TruncSSet


class InconsistentComplex(NervelabError):
    pass


@dataclass
class SparseMatrix:
    """Integer matrix stored by columns: ``cols[j] = {row: value}``."""

    n_rows: int
    n_cols: int
    cols: list[dict[int, int]]

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.n_cols for _ in range(self.n_rows)]
        for j, col in enumerate(self.cols):
            for i, v in col.items():
                out[i][j] = v
        return out

    def triplets(self) -> str:
        """``row col value`` lines, sorted."""
        lines = [f"{self.n_rows} {self.n_cols}"]
        for j, col in enumerate(self.cols):
            for i in sorted(col):
                lines.append(f"{i} {j} {col[i]}")
        return "\n".join(lines) + "\n"

    def apply(self, vec: dict[int, int]) -> dict[int, int]:
        out: dict[int, int] = {}
        for j, a in vec.items():
            for i, v in self.cols[j].items():
                out[i] = out.get(i, 0) + a * v
        return {i: v for i, v in out.items() if v}


@dataclass
class ChainComplex:
    """Normalized chains through degree ``D``; ``boundary[n]`` maps degree n to n-1."""

    ranks: list[int]
    boundary: list[SparseMatrix]
    lossless: bool
    top_degree: int


def chain_complex(X: TruncSSet, D: int | None = None) -> ChainComplex:
    D = X.max_dim if D is None else D
    if D > X.max_dim:
        raise PreconditionError(f"D = {D} exceeds the truncation {X.max_dim}")
    ranks = [len(X.nd[n]) for n in range(D + 1)]
    boundary = [SparseMatrix(0, ranks[0], [{} for _ in range(ranks[0])])]
    for n in range(1, D + 1):
        cols = []
        for j in range(ranks[n]):
            col: dict[int, int] = {}
            for i, (c, jj, _theta) in enumerate(X.faces[n][j]):
                if c == n - 1:
                    col[jj] = col.get(jj, 0) + (-1) ** i
            cols.append({r: v for r, v in col.items() if v})
        boundary.append(SparseMatrix(ranks[n - 1], ranks[n], cols))
    for n in range(2, D + 1):
        for j, col in enumerate(boundary[n].cols):
            if boundary[n - 1].apply(col):
                raise InconsistentComplex(f"boundary of boundary nonzero on simplex {X.nd[n][j]!r}")
    # degree D is exact iff there are no (D+1)-simplices anywhere
    lossless = not X.nd[D + 1] if D < X.max_dim else X.lossless
    return ChainComplex(ranks, boundary, lossless, D)


def smith_normal_form(A: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """``(U, S, V)`` with ``U A V = S`` diagonal, divisibility ordered, ``U, V`` unimodular."""
    m = len(A)
    n = len(A[0]) if m else 0
    S = [list(row) for row in A]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(a, b):
        S[a], S[b] = S[b], S[a]
        U[a], U[b] = U[b], U[a]

    def swap_cols(a, b):
        for row in S:
            row[a], row[b] = row[b], row[a]
        for row in V:
            row[a], row[b] = row[b], row[a]

    def add_row(dst, src, q):
        if q:
            S[dst] = [x + q * y for x, y in zip(S[dst], S[src])]
            U[dst] = [x + q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        if q:
            for row in S:
                row[dst] += q * row[src]
            for row in V:
                row[dst] += q * row[src]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = S[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            p = S[t][t]
            for i in range(t + 1, m):
                add_row(i, t, -(S[i][t] // p))
            for j in range(t + 1, n):
                add_col(j, t, -(S[t][j] // p))
            cand = [(abs(S[i][t]), i, "r") for i in range(t + 1, m) if S[i][t]]
            cand += [(abs(S[t][j]), j, "c") for j in range(t + 1, n) if S[t][j]]
            if cand:
                _, k, kind = min(cand)
                if kind == "r":
                    swap_rows(t, k)
                else:
                    swap_cols(t, k)
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if S[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if S[t][t] < 0:
            S[t] = [-x for x in S[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return U, S, V


def _sparse_reduce(M: SparseMatrix) -> tuple[int, list[list[int]]]:
    """Eliminate unit pivots; returns their count and the dense residual."""
    cols = {j: dict(c) for j, c in enumerate(M.cols) if c}
    rows: dict[int, set[int]] = {}
    for j, c in cols.items():
        for i in c:
            rows.setdefault(i, set()).add(j)
    units = 0
    while True:
        pivot = None
        best = None
        for j, c in cols.items():
            for i, v in c.items():
                if v in (1, -1):
                    cost = (len(c) - 1) * (len(rows[i]) - 1)
                    if best is None or cost < best:
                        best, pivot = cost, (i, j)
                        if cost == 0:
                            break
            if best == 0:
                break
        if pivot is None:
            break
        r, cpiv = pivot
        pcol = cols.pop(cpiv)
        u = pcol[r]
        for i in pcol:
            rows[i].discard(cpiv)
        for j in list(rows[r]):
            col = cols[j]
            q = col[r] * u  # u = ±1, so col[r]/u = col[r]*u
            for i, v in pcol.items():
                nv = col.get(i, 0) - q * v
                if nv:
                    if i not in col:
                        rows[i].add(j)
                    col[i] = nv
                elif i in col:
                    del col[i]
                    rows[i].discard(j)
            if not col:
                del cols[j]
        del rows[r]
        units += 1
    live_rows = sorted(i for i, s in rows.items() if s)
    rindex = {i: k for k, i in enumerate(live_rows)}
    live_cols = sorted(cols)
    dense = [[0] * len(live_cols) for _ in live_rows]
    for k, j in enumerate(live_cols):
        for i, v in cols[j].items():
            dense[rindex[i]][k] = v
    return units, dense


def elementary_divisors(M: SparseMatrix) -> list[int]:
    """Nonzero invariant factors of ``M`` (with multiplicity), ascending."""
    units, dense = _sparse_reduce(M)
    divs = [1] * units
    if dense and dense[0]:
        _, S, _ = smith_normal_form(dense)
        divs += [abs(S[i][i]) for i in range(min(len(S), len(S[0]))) if S[i][i]]
    return sorted(divs)


@dataclass
class HomologyReport:
    betti: list[int]
    torsion: list[list[int]]
    reliable: list[bool]
    ranks: list[int]
    cone: str | None = None
    verdict: str | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def connected(self) -> bool:
        return bool(self.betti) and self.betti[0] == 1

    def reduced_betti(self, n: int) -> int:
        return self.betti[n] - 1 if n == 0 else self.betti[n]

    def acyclic_through(self) -> int:
        """Largest ``d`` such that reduced homology vanishes in reliable degrees ``<= d``; -1 if none."""
        d = -1
        for n in range(len(self.betti)):
            if not self.reliable[n] or self.reduced_betti(n) or self.torsion[n]:
                break
            d = n
        return d

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * r for n, r in enumerate(self.ranks))

    def to_json(self) -> dict:
        return {
            "degrees": [
                {"degree": n, "betti": b, "torsion": t, "reliable": r}
                for n, (b, t, r) in enumerate(zip(self.betti, self.torsion, self.reliable))
            ],
            "connected": self.connected,
            "acyclic_through": self.acyclic_through(),
            "cone": self.cone,
            "verdict": self.verdict,
        }


def homology_groups(cc: ChainComplex) -> HomologyReport:
    """Betti numbers and torsion; degree ``top`` is reliable only when lossless."""
    D = cc.top_degree
    divs = [elementary_divisors(cc.boundary[n]) if n > 0 else [] for n in range(D + 1)]
    ranks_d = [len(d) for d in divs] + [0]
    betti, torsion, reliable = [], [], []
    next_divs = divs[1:] + [[]]
    for n in range(D + 1):
        image_rank = len(next_divs[n])
        betti.append(cc.ranks[n] - ranks_d[n] - image_rank)
        torsion.append([d for d in next_divs[n] if d > 1])
        reliable.append(n < D or cc.lossless)
    return HomologyReport(betti, torsion, reliable, list(cc.ranks))


def cone_vertex(X: TruncSSet) -> str | None:
    """A vertex ``v`` joinable in front of (or behind) every simplex of a chain-type complex."""
    if X.kind != "chains" or not X.nd[0]:
        return None
    for (v,) in X.nd[0]:
        for front in (True, False):
            ok = True
            for k in range(X.max_dim + 1):
                for lab in X.nd[k]:
                    if v in lab:
                        if (lab[0] if front else lab[-1]) != v:
                            ok = False
                            break
                    elif k < X.max_dim:
                        joined = (v,) + lab if front else lab + (v,)
                        if joined not in X.index[k + 1]:
                            ok = False
                            break
                    elif not X.lossless:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return f"cone vertex {v!r} ({'initial' if front else 'final'})"
    return None


def category_cone(source) -> str | None:
    """Initial or final object of a :class:`FinPoset` or :class:`FinCat`."""
    from .fincat import FinCat
    from .poset import FinPoset

    if isinstance(source, FinPoset):
        full = (1 << len(source)) - 1
        for i in range(len(source)):
            if source.up[i] == full:
                return f"initial object {source.labels[i]!r}"
            if source.down[i] == full:
                return f"final object {source.labels[i]!r}"
        return None
    if isinstance(source, FinCat):
        n = len(source.objects)
        for i in range(n):
            if all(len(source.hom[i][x]) == 1 for x in range(n)):
                return f"initial object {source.objects[i]}"
            if all(len(source.hom[x][i]) == 1 for x in range(n)):
                return f"final object {source.objects[i]}"
        return None
    return None


def contractibility_evidence(X: TruncSSet, D: int | None = None, source=None) -> HomologyReport:
    """Verdict CONE, NONTRIVIAL, ACYCLIC<=d (evidence only) or INCONCLUSIVE."""
    if not X.nd[0]:
        raise PreconditionError("complex is empty")
    report = homology_groups(chain_complex(X, D))
    cone = category_cone(source) if source is not None else None
    if cone is None:
        cone = cone_vertex(X)
    report.cone = cone
    nontrivial = [
        n for n in range(len(report.betti)) if report.reliable[n] and (report.reduced_betti(n) or report.torsion[n])
    ]
    if cone is not None:
        if nontrivial:
            raise InconsistentComplex(f"{cone} but reduced homology nonzero in degree {nontrivial[0]}")
        report.verdict = "CONE"
    elif nontrivial:
        report.verdict = "NONTRIVIAL"
    elif report.acyclic_through() >= 0:
        report.verdict = f"ACYCLIC<={report.acyclic_through()}"
    else:
        report.verdict = "INCONCLUSIVE"
    if report.verdict.startswith("ACYCLIC"):
        report.notes.append("evidence only: homology does not detect the fundamental group")
    return report
