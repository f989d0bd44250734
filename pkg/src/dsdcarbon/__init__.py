"""Decomposition of residential operational carbon intensity.

Structural (DSD) decomposition with an LMDI cross-check, decarbonization
scales and an electrification scenario.
"""

__version__ = "0.1.0"

from .dsd import (  # noqa: E402
    ContributionTable,
    build_system,
    chain_decompositions,
    contribution_rates,
    decompose_period,
)
from .errors import DsdError, NumericalError, ValidationError  # noqa: E402
from .ingest import generate_fixture, load_csv, load_manifest, save_csv  # noqa: E402
from .linalg import solve_linear  # noqa: E402
from .lmdi import compare_dsd_lmdi, lmdi_first_layer, log_mean  # noqa: E402
from .metrics import decarb_efficiency, decarb_intensity, scale_report, total_decarb  # noqa: E402
from .model import AnnualObservation, CountrySeries, FactorState, derive_factors, intensity_series  # noqa: E402
from .scenario import ScenarioParams, project_avoided  # noqa: E402

__all__ = [
    "AnnualObservation", "ContributionTable", "CountrySeries", "DsdError", "FactorState",
    "NumericalError", "ScenarioParams", "ValidationError", "build_system",
    "chain_decompositions", "compare_dsd_lmdi", "contribution_rates", "decarb_efficiency",
    "decarb_intensity", "decompose_period", "derive_factors", "generate_fixture",
    "intensity_series", "lmdi_first_layer", "load_csv", "load_manifest", "log_mean",
    "project_avoided", "save_csv", "scale_report", "solve_linear", "total_decarb",
]
