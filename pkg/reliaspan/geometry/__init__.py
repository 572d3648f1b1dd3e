"""
ReliaSpan - Geometry Package Initialization
"""
from reliaspan.geometry.lso import OrderingFamily, build_orderings, verify_lso_property
from reliaspan.geometry.spannerhd import SpannerHD, build_hd, damaged_pairs_hd, path_hd

__all__ = ["OrderingFamily", "build_orderings", "verify_lso_property", "SpannerHD", "build_hd", "damaged_pairs_hd", "path_hd"]
