"""
ReliaSpan - Construction Package Initialization
"""
from reliaspan.construction.gradation import Gradation, build_gradation
from reliaspan.construction.spanner1d import Params1D, Spanner1D, SpannerUnion, build_1d, build_spanner, derive_params

__all__ = ["Gradation", "build_gradation", "Params1D", "Spanner1D", "SpannerUnion", "build_1d", "build_spanner", "derive_params"]
