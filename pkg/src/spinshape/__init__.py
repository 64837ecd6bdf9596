"""spinshape: conformal and isometric immersions of metric surfaces.

Given an abstract closed oriented triangle mesh with per-edge lengths and a
choice of regular homotopy class (one of 2^(2p) spin structures on a genus-p
surface), minimize a channel energy over per-face quaternion spinor fields so
the induced conformal one-form becomes closed, then integrate it to vertex
positions in R^3.
"""

__version__ = "0.1.0"

from .dirac import ChannelDensities, DiracOperator, EnergyBreakdown, gradient_check, ones_field
from .errors import SpinshapeError
from .mesh import (
    HalfedgeMesh,
    HomologyBasis,
    MetricMesh,
    attach_metric,
    build_mesh,
    genus,
    homology_basis,
    metric_from_positions,
)
from .reconstruct import (
    DistortionReport,
    ImmersionResult,
    derive_spinor_from_embedding,
    diagnostics,
    integrate,
)
from .solve import SolveConfig, SolveResult, minimize, normalize_L4, project_isometric
from .spin import (
    FaceCharts,
    SpinStructure,
    TransitionLifts,
    base_spin_structure,
    build_face_charts,
    enumerate_spin_classes,
    spin_class_of,
    structure_for_class,
    transition_lifts,
    vertex_lift_check,
)

__all__ = [
    "__version__",
    "ChannelDensities",
    "DiracOperator",
    "DistortionReport",
    "EnergyBreakdown",
    "FaceCharts",
    "HalfedgeMesh",
    "HomologyBasis",
    "ImmersionResult",
    "MetricMesh",
    "SolveConfig",
    "SolveResult",
    "SpinStructure",
    "SpinshapeError",
    "TransitionLifts",
    "attach_metric",
    "base_spin_structure",
    "build_face_charts",
    "build_mesh",
    "derive_spinor_from_embedding",
    "diagnostics",
    "enumerate_spin_classes",
    "genus",
    "gradient_check",
    "homology_basis",
    "integrate",
    "metric_from_positions",
    "minimize",
    "normalize_L4",
    "ones_field",
    "project_isometric",
    "spin_class_of",
    "structure_for_class",
    "transition_lifts",
    "vertex_lift_check",
]
