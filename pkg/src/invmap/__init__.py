# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""invmap: distortion, degree, (INV) checks and generalized inverses of planar maps."""

from importlib.metadata import version as _version

__version__ = _version("invmap")

from invmap.analysis import MapAnalysis, analyze, distortion, inner_distortion
from invmap.degree import (
    DegreeRaster,
    LoopImage,
    TopImage,
    degree_raster,
    topological_image,
    trace_boundary,
    winding_number,
)
from invmap.energy import (
    EnergyReport,
    KeyEstimateProbe,
    dirichlet_energy,
    energy_identity,
    key_estimate_probe,
    oscillation_probe,
)
from invmap.gallery import GalleryEntry, gallery_get, gallery_list, load_map
from invmap.geometry import Ball, BallShape, Grid, Point2, Rect
from invmap.invcheck import (
    InvReport,
    StructReport,
    Verdict,
    check_degree_range,
    check_disjoint,
    check_inv_ball,
    check_inverse_inv,
    check_nested,
)
from invmap.inverse import (
    InverseMap,
    build_inverse,
    detect_cavities,
    detect_jump,
    multiplicity_raster,
    resample_inverse,
)
from invmap.maps import PlanarMap, compose, evaluate

__all__ = [
    "Ball",
    "BallShape",
    "DegreeRaster",
    "EnergyReport",
    "GalleryEntry",
    "Grid",
    "InvReport",
    "InverseMap",
    "KeyEstimateProbe",
    "LoopImage",
    "MapAnalysis",
    "PlanarMap",
    "Point2",
    "Rect",
    "StructReport",
    "TopImage",
    "Verdict",
    "__version__",
    "analyze",
    "build_inverse",
    "check_degree_range",
    "check_disjoint",
    "check_inv_ball",
    "check_inverse_inv",
    "check_nested",
    "compose",
    "degree_raster",
    "detect_cavities",
    "detect_jump",
    "dirichlet_energy",
    "distortion",
    "energy_identity",
    "evaluate",
    "gallery_get",
    "gallery_list",
    "inner_distortion",
    "key_estimate_probe",
    "load_map",
    "multiplicity_raster",
    "oscillation_probe",
    "resample_inverse",
    "topological_image",
    "trace_boundary",
    "winding_number",
]
