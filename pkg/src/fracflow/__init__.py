"""Desk-scale laboratory for a parabolic fractional p-Laplacian flow with
logarithmic nonlinearity on an interval: discretization, energy functionals,
potential-well analysis, dissipative time integration, and checks of the
qualitative theory (energy inequality, well invariance, polynomial decay,
finite-time blow-up bounds)."""

from .errors import (
    ConfigError,
    HypothesisNotMet,
    InstanceMismatch,
    InvalidInstance,
    NotInX0,
    NumericalFailure,
    SamplerFailure,
    StepCollapse,
    UnsupportedRegime,
)
from .flow import (
    EXPLICIT,
    PROXIMAL,
    FlowConfig,
    FlowTrace,
    TraceRow,
    Verdict,
    run_flow,
    step_explicit,
    step_proximal,
)
from .functionals import (
    EnergyReport,
    GridFunction,
    energy,
    frac_p_laplacian,
    full_gradient,
    k_form,
    l2_inner,
    l2_norm,
    log_integral,
    lp_norm_p,
    nehari,
    report,
    seminorm_p,
)
from .grid import Grid, ModelParams, build_grid
from .rng import SplitMix64
from .variational import (
    FiberingProfile,
    WellClassification,
    WellDepthEstimate,
    bump_profile,
    classify,
    estimate_well_depth,
    fibering_profile,
    growth_exponent_gamma,
    lambda_star,
    project_nehari,
    random_profile,
    sine_profile,
    trial_functions,
)
from .verify import (
    BlowupVerdict,
    DecayVerdict,
    EnergyCheck,
    blowup_constant,
    check_blowup,
    check_decay,
    check_energy_inequality,
    check_well_invariance,
    martinez_bound,
    report_lines,
)

__all__ = [name for name in dir() if not name.startswith("_")]
