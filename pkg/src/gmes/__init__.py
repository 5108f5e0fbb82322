"""Groups generated by a rooted automorphism and directed automorphisms of the
p-adic rooted tree: words, portraits, length reduction, branching and
congruence certificates, finite quotients, and truncated tree algebras."""

from .datum import GroupDatum, classify, load, make, validate
from .words import ReducedWord, element_order, is_identity, parse

__version__ = "0.1.0"

__all__ = ["GroupDatum", "ReducedWord", "classify", "element_order", "is_identity", "load", "make",
           "parse", "validate"]
