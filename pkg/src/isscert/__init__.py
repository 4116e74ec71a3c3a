"""Simulation and mechanical ISS certification of impulsive switched systems."""

from .bounds import IssBound, build_bound, certify_iss, decay_interpolant, gain_levels
from .certify import (
    Certificate,
    ViolationReport,
    check_decreasing_certificate,
    check_dissipation,
    check_dwell_conditions,
    check_flow_implication,
    check_jump_implication,
    check_sandwich,
    classify_modes,
    closed_form_dwell,
    dissipation_to_implication,
    norm_power_v,
    quadratic_v,
)
from .construct import (
    DecreasingCertificate,
    build_decreasing,
    certify_decrease,
    correction,
)
from .errors import (
    AsymmetricError,
    ConfigError,
    DegenerateGammaError,
    DegenerateGapError,
    DivergentIntegralError,
    DomainError,
    ImageNotFullError,
    IsscertError,
    NonFiniteError,
    NumericalFailureError,
    OutOfImageError,
    OutOfRangeError,
    SignAmbiguousError,
    StepTooLargeError,
)
from .lmi import (
    Infeasible,
    QuadraticCertificate,
    check_flow_lmi,
    check_jump_lmi,
    check_rate_conditions,
    flow_block,
    is_negative_semidefinite,
    jacobi_eigenvalues,
    jump_block,
    synthesize,
)
from .rates import (
    ComparisonFunction,
    PhiTransform,
    RateFunction,
    compose_cf,
    envelope_check,
    linear_cf,
    linear_rate,
    max_cf,
    phi,
    phi_inverse,
    power_cf,
    power_rate,
    tabulated_rate,
)
from .simulate import (
    InputSignal,
    LinearSystemModel,
    SystemModel,
    Trajectory,
    constant_input,
    lipschitz_estimate,
    reachability_bound,
    simulate,
    sinusoid_input,
    step_input,
    zero_input,
)
from .switching import (
    DwellSpec,
    ModeChangeSet,
    ModePartition,
    SwitchingSignal,
    activation_count,
    active_time,
    admits,
    mdadt_slack,
    mdalt_slack,
)

__version__ = "0.1.0"
