"""Generalised p-Koch curves and snowflakes: generation, area, analysis, SVG."""

from .analysis import (DimensionFit, JordanVerdict, TurningReport, box_dimension,
                       jordan_classify, measure_zero_probe, turning_ratio)
from .area import AreaReport, TauSeries, area_series, closed_forms, shoelace_check, tau_of_spec
from .choices import ChoiceSequence, SnowflakeSpec, omega_encode, parse, serialize
from .curves import (CellPath, CurveApprox, SnowflakeApprox, cells, curve_polyline,
                     double_sided_polylines, gamma, rho, snowflake_polyline)
from .geometry import (Contact, Point2, Polyline, Rhombus, Similarity2, apply, compose,
                       segments_intersect, signed_area)
from .ifs import KochParams, MapFamily, build_family, verify_nesting_and_osc
from .render import RenderOptions, to_svg
from .spectrum import (BetaProblem, Realisation, ejk_feasible_k, ejk_witnesses, realise_spec,
                       rescale, solve_area, solve_tau)

__version__ = "0.1.0"

__all__ = [
    "AreaReport", "BetaProblem", "CellPath", "ChoiceSequence", "Contact", "CurveApprox",
    "DimensionFit", "JordanVerdict", "KochParams", "MapFamily", "Point2", "Polyline",
    "Realisation", "RenderOptions", "Rhombus", "Similarity2", "SnowflakeApprox",
    "SnowflakeSpec", "TauSeries", "TurningReport", "apply", "area_series", "box_dimension",
    "build_family", "cells", "closed_forms", "compose", "curve_polyline",
    "double_sided_polylines", "ejk_feasible_k", "ejk_witnesses", "gamma", "jordan_classify",
    "measure_zero_probe", "omega_encode", "parse", "realise_spec", "rescale", "rho",
    "segments_intersect", "serialize", "shoelace_check", "signed_area", "snowflake_polyline",
    "solve_area", "solve_tau", "tau_of_spec", "to_svg", "turning_ratio",
    "verify_nesting_and_osc",
]
