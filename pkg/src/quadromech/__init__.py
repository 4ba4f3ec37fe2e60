"""Mean-field optics and stability of a quadratically coupled optomechanical cavity with a two-level emitter."""

__version__ = "0.1.0"

from .errors import (
    DegenerateBranch,
    InvalidParams,
    NoConvergence,
    NumericalError,
    QuadromechError,
    SingularDenominator,
    StepUnderflow,
)
from .model import SystemParams, detuning_a, detuning_e, effective_detuning
from .steady_state import PrescribedDisplacement, SelfConsistent, SteadyState, solve_adiabatic, solve_full
from .transmission import (
    Sideband,
    SpectrumPoint,
    SweepAxis,
    resonance,
    sideband_detuning,
    spectrum_sweep,
    transmission_amplitude,
    transmission_intensity,
)
from .linearization import (
    DriftMatrix,
    NoiseVector,
    StabilityReport,
    char_poly,
    drift_matrix,
    eigenvalues,
    noise_vector,
    paper_l_coefficients,
    quartic_roots,
    routh_hurwitz,
)
from .dynamics import Trajectory, integrate_adiabatic, integrate_fluctuations, integrate_full
