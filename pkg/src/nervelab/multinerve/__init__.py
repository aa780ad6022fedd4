"""Multisimplicial nerves of categories with marked edges, and the
constructions built on them: gluing, compactifications, cartesianization."""
from __future__ import annotations

from .box import BoxProduct, Representable, SimplicialFactor, box_product, cell_count, monotone_maps
from .grid import Constraints, GridFunctor, RestrictedNerve, Tiling, check_gluing, enumerate_functors, functor_violation, gluing_map, grid_points
from .hypotheses import (
    all_pass,
    build_truncation_chain,
    check_descent_hypotheses,
    check_gluing_hypotheses,
    failing,
    subcategory_pullbacks,
)
from .kart import KartDiagram, SectionReport, alpha_beta_sections, alpha_section, cartesianize, square_decomposition
from .komp import Chain, KompCat, all_chains, compactifications, komp_category, make_chain, rcpt_points

__all__ = [
    "BoxProduct", "Representable", "SimplicialFactor", "box_product", "cell_count", "monotone_maps",
    "Constraints", "GridFunctor", "RestrictedNerve", "Tiling", "check_gluing", "enumerate_functors",
    "functor_violation", "gluing_map", "grid_points",
    "all_pass", "build_truncation_chain", "check_descent_hypotheses", "check_gluing_hypotheses",
    "failing", "subcategory_pullbacks",
    "KartDiagram", "SectionReport", "alpha_beta_sections", "alpha_section", "cartesianize", "square_decomposition",
    "Chain", "KompCat", "all_chains", "compactifications", "komp_category", "make_chain", "rcpt_points",
]
