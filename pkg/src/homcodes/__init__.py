"""Homological quantum codes from cellulations: construction, distances,
matching and cellular-automaton decoders, and Monte Carlo threshold studies."""

from . import analytic, automata, complexes, coxeter, css, decode, distance, gf2, sim
from .complexes import ChainComplex, dual, rotated_toric, semi_hyperbolic, tesseract, toric_2d, toric_4d
from .coxeter import TABLE_RELATORS, build_appendix_a_surface, surface_from_relators
from .css import CssCode, from_complex, load_artifact
from .distance import count_min_weight_logicals, x_distance, z_distance

__all__ = [
    "analytic", "automata", "complexes", "coxeter", "css", "decode", "distance", "gf2", "sim",
    "ChainComplex", "dual", "rotated_toric", "semi_hyperbolic", "tesseract", "toric_2d",
    "toric_4d", "TABLE_RELATORS", "build_appendix_a_surface", "surface_from_relators",
    "CssCode", "from_complex", "load_artifact", "count_min_weight_logicals", "x_distance",
    "z_distance",
]
