"""Finite combinatorics of up-set lattices, nerves and multisimplicial nerves."""
from __future__ import annotations

__version__ = "0.1.0"
