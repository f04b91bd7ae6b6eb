"""Stochastic bases: global gPC, ME-gPC elements, simplex polynomials and frames."""

from .frames import FrameSet, build_frames, frame_design, frame_statistics
from .legendre import GpcBasis, MeElement, eval_gpc, gauss_legendre_tensor, legendre_table, tensor_design
from .multiindex import MultiIndexSet, count_basis, total_order_indices
from .simplex import SimplexBasis, build_simplex_basis, closed_form_norm_sq, collapsed_quadrature

__all__ = [
    "FrameSet", "GpcBasis", "MeElement", "MultiIndexSet", "SimplexBasis", "build_frames",
    "build_simplex_basis", "closed_form_norm_sq", "collapsed_quadrature", "count_basis", "eval_gpc",
    "frame_design", "frame_statistics", "gauss_legendre_tensor", "legendre_table", "tensor_design",
    "total_order_indices",
]
