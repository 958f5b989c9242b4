"""1-D finite-volume solver for quadratic porous-medium diffusion and its
nonlocal (mollified-pressure) approximation, plus exact 1-D Wasserstein
distance tooling and a convergence-study harness."""

__version__ = "0.1.0"

from .grid import (
    Grid,
    Density,
    Gaussian,
    Parabola,
    UniformPlusConstant,
    RandomPiecewise,
    FromFile,
    make_grid,
    sample_initial,
    mass,
)
from .kernel import ConvolutionMode, cell_integral, kernel_matrix, convolve, velocity_field
from .scheme import (
    BoundaryCondition,
    ModelConfig,
    TimeControls,
    NegativeDensityError,
    NonFiniteStateError,
    minmod,
    slopes,
    reconstruct,
    rhs,
    step,
    simulate,
    simulate_density,
)
from .wasserstein import QuantileFunction, MassMismatchError, ZeroMassError, quantile, w2
from .diagnostics import DiagnosticsRecord, energy_local, energy_nonlocal, entropy_and_moment, record
from .harness import (
    SweepConfig,
    ConvergenceReport,
    ResolutionViolationError,
    InsufficientPointsError,
    NonPositiveDistanceError,
    run_sweep,
    fit_slope,
    detect_boundary_contact,
)
