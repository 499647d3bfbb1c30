"""Detector response and entanglement harvesting in a hard-bandlimited
massless scalar field, in units of the switching width sigma."""

__version__ = "0.1.0"

from .perturbative import (  # noqa: E402
    DetectorParams,
    PairGeometry,
    XStateDensityMatrix,
    negativity_perturbative,
    negativity_xstate,
    pd_gaussian,
    x_gaussian,
)
from .deltaswitch import DeltaPairConfig, GaussianProfile, pd_delta, rho_delta  # noqa: E402
from .design import array_coverage_check, design_array  # noqa: E402

__all__ = [
    "DetectorParams",
    "PairGeometry",
    "XStateDensityMatrix",
    "negativity_perturbative",
    "negativity_xstate",
    "pd_gaussian",
    "x_gaussian",
    "DeltaPairConfig",
    "GaussianProfile",
    "pd_delta",
    "rho_delta",
    "array_coverage_check",
    "design_array",
]
