"""Weighted triangulations, discrete Hodge Laplacians, chi-completeness
criteria and deficiency candidates."""

from .cochains import Cochain, SimplexField, TripleField, inner, norm
from .complex import Triangulation, build, complete_triangles, single_triangle
from .generators import (LayerSpec, OffspringSpec, bipartite_layer_family,
                         layered_triangulation, regular_patch, triangular_tree)
from .operators import OperatorMatrix, assemble, spectrum

__all__ = [
    "Cochain", "LayerSpec", "OffspringSpec", "OperatorMatrix", "SimplexField",
    "Triangulation", "TripleField", "assemble", "bipartite_layer_family",
    "build", "complete_triangles", "inner", "layered_triangulation", "norm",
    "regular_patch", "single_triangle", "spectrum", "triangular_tree",
]
