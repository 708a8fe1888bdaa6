"""Executable order theory for primitive Boolean spaces.

Finite and finitely presented PO systems, congruences and simple images,
extended PO systems with their refinement order, a symbolic cell model of a
primitive ω-Stone space with a trim partition, and ideal-completion analysis.
"""

from .errors import PostoneError
from .poset import PoSystem, build_posystem, finite_foundation, ideals_finite, iso
from .congruence import Morphism, is_morphism, is_congruence, max_congruence, quotient, simple_image
from .extended import ExtendedPoSystem, iso_extended, pushforward, refines, refinement_feasible

__all__ = [
    "PostoneError", "PoSystem", "build_posystem", "finite_foundation", "ideals_finite", "iso",
    "Morphism", "is_morphism", "is_congruence", "max_congruence", "quotient", "simple_image",
    "ExtendedPoSystem", "iso_extended", "pushforward", "refines", "refinement_feasible",
]
