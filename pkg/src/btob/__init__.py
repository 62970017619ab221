"""b-to-b collision map laboratory for four inelastic particles on a line.

The package iterates the piecewise projective linear return map between
consecutive collisions of the central particle pair, cross-validates it
against independent reference engines (wedge-product, trigonometric and a
direct event-driven particle simulation), certifies periodic collision
patterns, and reproduces the stability-window tables with exact arithmetic.
"""

from .map_core import (
    Branch,
    DomainError,
    ProjectiveDirection,
    Restitution,
    StepResult,
    branch_matrix,
    classify,
    collision_matrix,
    iterate,
    phi,
    step,
    strip_coords,
    theta,
)
from .analysis import (
    ScanConfig,
    bifurcation_scan,
    default_grid,
    detect_period,
    empirical_histogram,
    lyapunov_max,
    rotation_number,
    thin_stripe_r,
)
from .oracles import (
    ParticleState,
    SphericalState,
    defn23_step,
    particle_next_event,
    particle_symbol_run,
    trig_step,
    triple_engine_validate,
)
from .spectral import (
    PatternWord,
    certify_pattern,
    char_poly,
    critical_r_132,
    eigen_P1,
    eigen_P2,
    eigen_P3,
    family_word,
    feasibility_check,
    reduced_matrix,
    word_matrix,
)
from .windows import (
    PrecisionBudget,
    RationalPoly,
    StabilityWindow,
    lower_bound,
    q_poly,
    trace_poly,
    upper_bound,
    window_table,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
