"""Exact Duistermaat-Heckman densities for circle and complexity-one torus actions.

The toolkit has two independent routes to a DH density on a line:

* ``s1orbifold`` builds it from fixed-point data of a closed 4-dimensional
  Hamiltonian circle orbifold (wall-crossing jumps);
* ``polytope`` slices rational convex polytopes (the toric model).

``pwlinear`` holds the common density type and the log-concavity verdict,
``xray`` the transversal-line construction used to reduce a complexity-one
action to a circle action on a 4-dimensional reduced space.
"""

from fractions import Fraction

from .pwlinear import (
    LogConcavityVerdict,
    PLDensity,
    SlopeJump,
    evaluate,
    is_log_concave,
    pointwise_midpoint_check,
    slope_jumps,
)
from .s1orbifold import (
    ClosureError,
    ExtremalSet,
    InconsistentDataError,
    InteriorFixedPoint,
    S1FixedPointData,
    build_dh,
    closure_check,
    is_log_concave_theorem_check,
    wall_crossing_jump,
)
from .polytope import (
    DegenerateSectionError,
    Histogram,
    Polytope,
    delzant_to_s1data,
    mc_pushforward,
    plane_section,
    projected_slice_density,
    slice_density,
)
from .xray import (
    Face,
    LineSelection,
    SelectionFailed,
    XRay,
    classify_line_vs_face,
    regularity_check,
    select_line,
    split_subtorus,
)

Rational = Fraction

__all__ = [
    "Rational",
    "PLDensity", "SlopeJump", "LogConcavityVerdict",
    "evaluate", "slope_jumps", "is_log_concave", "pointwise_midpoint_check",
    "InteriorFixedPoint", "ExtremalSet", "S1FixedPointData",
    "ClosureError", "InconsistentDataError",
    "wall_crossing_jump", "build_dh", "closure_check", "is_log_concave_theorem_check",
    "Polytope", "Histogram", "DegenerateSectionError",
    "plane_section", "slice_density", "projected_slice_density",
    "mc_pushforward", "delzant_to_s1data",
    "Face", "XRay", "LineSelection", "SelectionFailed",
    "classify_line_vs_face", "select_line", "regularity_check", "split_subtorus",
]
