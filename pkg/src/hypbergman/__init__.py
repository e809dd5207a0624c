"""Certified Bergman kernel norms on hyperbolic surfaces and explicit
off-diagonal bounds for them."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    IDENTITY,
    DomainSpec,
    HalfPlane,
    Horoball,
    Moebius,
    UhpPoint,
    compose,
    hyp_distance,
    integrate_domain,
    inverse,
    j_factor,
    mobius_apply,
)
from .fuchsian import (  # noqa: E402
    FuchsianGroupSpec,
    OrbitBall,
    built_in_group,
    counting_N,
    enumerate_ball,
    injectivity_radius,
    jl_count_check,
    load_group,
    quotient_distance,
    translation_length,
)
from .kernel import (  # noqa: E402
    KernelEstimate,
    kernel_estimates,
    kernel_norm,
    kernel_trace,
    majorant_sum,
    parabolic_sum,
    tail_bound,
)
from .bounds import (  # noqa: E402
    BoundBreakdown,
    c_constant,
    proof_term_bounds,
    rhs_compact,
    rhs_noncompact,
    wallis_ratio,
)
from .harness import (  # noqa: E402
    BoundReport,
    VerificationConfig,
    emit_report,
    load_report,
    run_trace_check,
    run_verification,
    sample_pairs,
)
