"""Isomonodromic deformations: Fuchsian monodromy, Painleve VI and V, limits between them."""

__version__ = "0.1.0"
