"""Extremal geometry of finitary Lie algebras generated by transvections."""

from .fields import GF, QQ, QQ_sqrt, Field, FieldScalar, parse_field
from .linalg import Subspace, annihilator, kernel, rank, rref, solve
from .lie import (Extremality, LieAlgebra, LieElement, TransvectionSpec, bracket, center, classify_pair,
                  enumerate_extremal, exp_map, extremal_form, fsl, generate, is_extremal, is_simple,
                  sl, transvection)
from .geometry import GeometryGraph, build_geometry, flag_model, match_geometries, maximal_cliques
from .hermitian import (SesquiForm, build_symplectic, build_unitary, delta_graph, extract_polarity,
                        is_trace_valued, isotropic_span, realize_form, spanning_reflection_basis)
from .extension import ExtendedAlgebra, check_simple, extend, radical_of_form
from .local import DirectedIndex, compatibility_scalar, join, leq, local_cover_check, sl_of_index

__all__ = [
    "GF", "QQ", "QQ_sqrt", "Field", "FieldScalar", "parse_field",
    "Subspace", "annihilator", "kernel", "rank", "rref", "solve",
    "Extremality", "LieAlgebra", "LieElement", "TransvectionSpec", "bracket", "center", "classify_pair",
    "enumerate_extremal", "exp_map", "extremal_form", "fsl", "generate", "is_extremal",
    "is_simple", "sl", "transvection",
    "GeometryGraph", "build_geometry", "flag_model", "match_geometries", "maximal_cliques",
    "SesquiForm", "build_symplectic", "build_unitary", "delta_graph", "extract_polarity",
    "is_trace_valued", "isotropic_span", "realize_form", "spanning_reflection_basis",
    "ExtendedAlgebra", "check_simple", "extend", "radical_of_form",
    "DirectedIndex", "compatibility_scalar", "join", "leq", "local_cover_check", "sl_of_index",
]
