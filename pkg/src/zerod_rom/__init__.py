"""
Zero-dimensional hemodynamics

Lumped-parameter blood-flow networks, a generalized-alpha time integrator and
a builder that turns centerline area profiles into reduced-order models.
"""

from .assembly import CompiledNetwork, assemble
from .dofmap import DofMap, SolutionState, build_dof_map
from .elements import element_local_system, stenosis_coefficient
from .exceptions import ZeroDError
from .integrator import GenAlphaIntegrator, IntegratorParams, gen_alpha_step, run_simulation, steady_initial_state
from .logging_config import get_logger, setup_logging
from .metrics import CapSeries, ErrorReport, cap_errors
from .model_file import read_centerline_tree, read_model, write_model
from .network import ElementSpec, FluidProperties, NetworkBuilder, NetworkModel, Wire, validate_network
from .parameters import ElementKind
from .results import PeriodicityReport, ResultSet, check_periodicity
from .rom_builder import BuildMode, CenterlineTree, build_network, build_rom
from .segmentation import BranchProfile, detect_stenosis, fit_segments
from .timeseries import TimeSeries

__version__ = "0.1.0"

__all__ = [
    "CompiledNetwork",
    "assemble",
    "DofMap",
    "SolutionState",
    "build_dof_map",
    "element_local_system",
    "stenosis_coefficient",
    "ZeroDError",
    "GenAlphaIntegrator",
    "IntegratorParams",
    "gen_alpha_step",
    "run_simulation",
    "steady_initial_state",
    "setup_logging",
    "get_logger",
    "CapSeries",
    "ErrorReport",
    "cap_errors",
    "read_centerline_tree",
    "read_model",
    "write_model",
    "ElementSpec",
    "FluidProperties",
    "NetworkBuilder",
    "NetworkModel",
    "Wire",
    "validate_network",
    "ElementKind",
    "PeriodicityReport",
    "ResultSet",
    "check_periodicity",
    "BuildMode",
    "CenterlineTree",
    "build_network",
    "build_rom",
    "BranchProfile",
    "detect_stenosis",
    "fit_segments",
    "TimeSeries",
]
