from __future__ import annotations


class NervelabError(Exception):
    """Base class for every error raised by the library."""


class ValidationError(NervelabError):
    """Malformed input: a document, a relation, a map or a class."""


class PreconditionError(NervelabError):
    pass


class CapExceeded(NervelabError):
    """A configured size or dimension cap would be exceeded."""

    def __init__(self, what: str, value, cap):
        self.what = what
        self.value = value
        self.cap = cap
        super().__init__(f"{what} = {value} exceeds cap {cap}")


class BudgetExhausted(NervelabError):
    def __init__(self, message: str, stats: dict | None = None):
        self.stats = dict(stats or {})
        super().__init__(message)


class NotDistributive(NervelabError):
    def __init__(self, witness):
        self.witness = witness
        p, q, r = witness
        super().__init__(
            f"lattice is not distributive: p∧(q∨r) ≠ (p∧q)∨(p∧r) at (p, q, r) = ({p}, {q}, {r})"
        )


class NoPullback(NervelabError):
    def __init__(self, cospan, reason: str = "no terminal cone"):
        self.cospan = cospan
        super().__init__(f"no pullback for cospan {cospan}: {reason}")
