"""Numerical laboratory for Navier-Stokes mild solutions in pseudomeasure spaces PM^a."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    GridMismatchError,
    KnotError,
    ParameterError,
    PMNSError,
    SingularPointError,
    SmallnessError,
    StepRejectedError,
    SymmetryError,
    UnsupportedRescaleError,
)
from .grid import (
    FrequencyGrid,
    PhysicalVectorField,
    SpectralTensorField,
    SpectralVectorField,
    Trajectory,
    dyadic_rescale,
    geometric_knots,
    to_physical,
    to_spectral,
)
from .norms import interpolation_check, pm_norm, trajectory_seminorm
from .duhamel import BilinearConfig, bilinear_B, bilinear_B_stationary, eta_constant, tensor_product_hat
from .landau import LandauParams, b_of_c, c_of_b, landau_eval
from .solver import ForceSpec, SolverConfig, picard_solve, stationary_solve
