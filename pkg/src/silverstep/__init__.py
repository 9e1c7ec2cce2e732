"""Silver stepsize schedules for gradient descent on kappa-conditioned
functions: construction, certified contraction rates, stepsize dynamics,
two-step minimax solutions, and empirical worst-case probes.
"""

from .certificate import (
    STAR,
    Multipliers,
    base_certificate,
    build_certificate,
    certificate_payload,
    check_identities,
    cocoercivity_Q,
    esl_matrices,
    glue,
    q_shorthand,
    quad_part_P,
    verify_identity,
    verify_structure,
)
from .core import (
    NormalizedPair,
    RateValue,
    SilverSchedule,
    build_schedule,
    infinite_step,
    normalized_sequence,
    occupation_measure,
    psi,
    psi_inv,
    silver_rate,
)
from .dynamics import (
    check_taylor_bounds,
    cobweb_trace,
    h_update,
    phase_transition,
    rate_envelope,
    rate_envelope_log,
    rate_monotonicity_check,
)
from .gdlab import (
    FunctionOracle,
    RunReport,
    TrajectoryData,
    adversarial_probe,
    contraction,
    curvature_switch_oracle,
    hard_instances,
    quadratic_oracle,
    run_gd,
)
from .twostep import (
    TwoStepSolution,
    argmin_floor,
    chebyshev_pair,
    contour_grid,
    defining_residual,
    optimal_pair,
    quadratic_rate,
    rate_floor,
)

__version__ = "1.0.0"

__all__ = [
    "STAR",
    "Multipliers",
    "NormalizedPair",
    "RateValue",
    "SilverSchedule",
    "TwoStepSolution",
    "FunctionOracle",
    "RunReport",
    "TrajectoryData",
    "adversarial_probe",
    "argmin_floor",
    "base_certificate",
    "build_certificate",
    "build_schedule",
    "certificate_payload",
    "chebyshev_pair",
    "check_identities",
    "check_taylor_bounds",
    "cobweb_trace",
    "cocoercivity_Q",
    "contour_grid",
    "contraction",
    "curvature_switch_oracle",
    "defining_residual",
    "esl_matrices",
    "glue",
    "h_update",
    "hard_instances",
    "infinite_step",
    "normalized_sequence",
    "occupation_measure",
    "optimal_pair",
    "phase_transition",
    "psi",
    "psi_inv",
    "q_shorthand",
    "quad_part_P",
    "quadratic_oracle",
    "quadratic_rate",
    "rate_envelope",
    "rate_envelope_log",
    "rate_floor",
    "rate_monotonicity_check",
    "run_gd",
    "silver_rate",
    "verify_identity",
    "verify_structure",
]
