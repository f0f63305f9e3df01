"""Exact motivic volumes of polytopes over ordered abelian groups."""

from .gamma import BaseGroup, GammaScalar, FiniteSubgroup, compare, frac_int_split, subgroup_canonical
from .gring import GRingElem, count_hom, psi_hom, rewrite, parse_elem, format_elem
from .polytope import load_polytope, dump_polytope, count_lattice, euclid_volume, is_bounded
from .volume import class_of, integrate, integrate_fn, leading_volume, c_poly
from .convring import ConvRing, ConvElem, psi_star, psi_map, theta_reduce, collapse
from .vftarget import VFTarget, from_convring
from .hecke import HeckeElem, ModuleElem, act, parse_hecke, finite_oracle
from .kernels import BACKEND

__all__ = [
    "BaseGroup",
    "GammaScalar",
    "FiniteSubgroup",
    "compare",
    "frac_int_split",
    "subgroup_canonical",
    "GRingElem",
    "count_hom",
    "psi_hom",
    "rewrite",
    "parse_elem",
    "format_elem",
    "load_polytope",
    "dump_polytope",
    "count_lattice",
    "euclid_volume",
    "is_bounded",
    "class_of",
    "integrate",
    "integrate_fn",
    "leading_volume",
    "c_poly",
    "ConvRing",
    "ConvElem",
    "psi_star",
    "psi_map",
    "theta_reduce",
    "collapse",
    "VFTarget",
    "from_convring",
    "HeckeElem",
    "ModuleElem",
    "act",
    "parse_hecke",
    "finite_oracle",
    "BACKEND",
]
