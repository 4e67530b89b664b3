"""Action-filtered complexes over Novikov fields: barcodes and entropy."""

from .novikov import (
    DensePeriodGroupError,
    GroundFieldMismatch,
    NovikovError,
    NovikovScalar,
    PeriodGroup,
    invert,
    leading_term,
    snap,
    valuation,
)
from .complexes import (
    FloerPackage,
    Generator,
    PackageError,
    PerturbationTooLarge,
    ValidationReport,
    chain_action,
    difference_set,
    dualize,
    perturb_actions,
    spectrum,
    validate,
)
from .barcode import (
    Barcode,
    BarPair,
    ComponentBarcode,
    OrthogonalityError,
    SingularChain,
    SingularDecomposition,
    b_eps,
    barcode,
    boundary_depth,
    intersection_lower_bound,
    robust_b_eps,
    singular_decomposition,
)
from .floer_graph import Arrow, FloerGraph, floer_graph
from .entropy import (
    BarcodeRate,
    DepthFloor,
    GrowthFit,
    GrowthSequence,
    RateComparison,
    barcode_entropy,
    compare_rates,
    eps_grid,
    gamma_lower_bound,
    growth_exponent,
    growth_fit,
    iterate_ratios,
    orbit_entropy,
    orbit_growth_sequence,
)

__version__ = "0.1.0"
