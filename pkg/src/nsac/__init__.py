"""Compressible Navier-Stokes/Allen-Cahn two-phase solver with sharp-interface-limit checks."""
from .errors import NSACError
from .grid import GridSpec
from .phasefield import SIGMA, MobilityMode, PhaseParams
from .solver import SimConfig, State
from .thermo import EosModel, ViscosityHeat

__version__ = "0.1.0"

__all__ = ["EosModel", "GridSpec", "MobilityMode", "NSACError", "PhaseParams", "SIGMA", "SimConfig",
           "State", "ViscosityHeat", "__version__"]
