"""Curve-constrained spectra: preserver maps, regularity probes, classification."""

from .checking import (
    BlackBoxMap,
    DomainSpec,
    ExternalProgramMap,
    PreserverVerdict,
    check_cs,
    collision_path,
    continuity_probe,
    rho_continuity_experiment,
)
from .classify import (
    circle_obstruction_demo,
    classify_preserver,
    equivariance_test,
    reconstruct_conjugator,
    subspace_image,
)
from .curves import (
    CircleArc,
    CornerGraph,
    Curve,
    Interval,
    Line,
    Polyline,
    RealInterval,
    Segment,
    UnitCircleClosed,
    curve_from_json,
    curve_to_json,
    punctured_unit_circle,
    real_line,
    unit_circle_arc,
)
from .maps import (
    Compose,
    Conj,
    OrderMap,
    Rho,
    TransposeConj,
    eigen_conj,
    map_from_json,
    map_to_json,
    rho,
)
from .regularity import (
    ConfigurationTuple,
    RegularityProfile,
    db_profile,
    dc_probe,
    divided_difference,
)
from .spectral import (
    MatrixClass,
    SpectralDecomposition,
    matrix_from_json,
    matrix_to_json,
    random_unitary,
    sample,
    sample_batch,
    sample_commuting_pair,
    spectra_equal,
    spectral_bottleneck_distance,
    spectral_decompose,
)

__version__ = "0.1.0"

__all__ = [
    "BlackBoxMap",
    "CircleArc",
    "Compose",
    "ConfigurationTuple",
    "Conj",
    "CornerGraph",
    "Curve",
    "DomainSpec",
    "ExternalProgramMap",
    "Interval",
    "Line",
    "MatrixClass",
    "OrderMap",
    "Polyline",
    "PreserverVerdict",
    "RealInterval",
    "RegularityProfile",
    "Rho",
    "Segment",
    "TransposeConj",
    "UnitCircleClosed",
    "check_cs",
    "circle_obstruction_demo",
    "classify_preserver",
    "collision_path",
    "continuity_probe",
    "curve_from_json",
    "curve_to_json",
    "db_profile",
    "dc_probe",
    "divided_difference",
    "eigen_conj",
    "equivariance_test",
    "SpectralDecomposition",
    "map_from_json",
    "map_to_json",
    "matrix_from_json",
    "matrix_to_json",
    "punctured_unit_circle",
    "random_unitary",
    "real_line",
    "reconstruct_conjugator",
    "rho",
    "rho_continuity_experiment",
    "sample",
    "sample_batch",
    "sample_commuting_pair",
    "spectra_equal",
    "spectral_bottleneck_distance",
    "spectral_decompose",
    "subspace_image",
    "unit_circle_arc",
]
