"""Desk-scale dynamics: twist maps, symbolic shifts, orbit search, and the
package builders that feed their periodic orbit data into barcodes."""

from .orbits import INTEGER_PERIODS, OrbitRecord, OrbitTable, component_label
from .twist import (
    CouplingError,
    IdentityMap,
    RotationMap,
    ShearMap,
    TwistMapModel,
    find_periodic_orbits,
    defect_free_window,
    lefschetz_defect,
    morse_descent_terms,
    orbit_table,
)
from .curves import (
    CurveGrowth,
    curve_volume_growth,
    graph_curve,
    graph_volume_growth,
    horizontal_circle,
    polyline_length,
    vertical_circle,
)
from .crofton import (
    CroftonReport,
    DegenerateFamilyError,
    TomographFamily,
    crofton_check,
    harmonic_family,
    sine_curve_suite,
    translate_family,
)
from .horseshoe import (
    FarPairCoupling,
    PlantedPairCoupling,
    SymbolicHorseshoe,
    default_weights,
    horseshoe_orbit_table,
)
from .build import (
    BuildReport,
    GapScan,
    action_gap_scan,
    build_package_from_orbits,
    gap_floor,
)

__all__ = [
    "INTEGER_PERIODS",
    "OrbitRecord",
    "OrbitTable",
    "component_label",
    "CouplingError",
    "IdentityMap",
    "RotationMap",
    "ShearMap",
    "TwistMapModel",
    "find_periodic_orbits",
    "defect_free_window",
    "lefschetz_defect",
    "morse_descent_terms",
    "orbit_table",
    "CurveGrowth",
    "curve_volume_growth",
    "graph_curve",
    "graph_volume_growth",
    "horizontal_circle",
    "polyline_length",
    "vertical_circle",
    "CroftonReport",
    "DegenerateFamilyError",
    "TomographFamily",
    "crofton_check",
    "harmonic_family",
    "sine_curve_suite",
    "translate_family",
    "FarPairCoupling",
    "PlantedPairCoupling",
    "SymbolicHorseshoe",
    "default_weights",
    "horseshoe_orbit_table",
    "BuildReport",
    "GapScan",
    "action_gap_scan",
    "build_package_from_orbits",
    "gap_floor",
]
