"""Hypothesis strategies shared by the test modules."""
from __future__ import annotations

from hypothesis import strategies as st

from nervelab.poset import FinPoset


@st.composite
def posets(draw, min_size: int = 1, max_size: int = 6) -> FinPoset:
    """Random partial orders: a random relation on ``i < j`` plus its transitive closure."""
    n = draw(st.integers(min_size, max_size))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if draw(st.booleans())]
    return FinPoset.from_relation(list(range(n)), pairs)


@st.composite
def monotone_maps(draw, m: int, n: int) -> tuple[int, ...]:
    vals = sorted(draw(st.lists(st.integers(0, n), min_size=m + 1, max_size=m + 1)))
    return tuple(vals)
