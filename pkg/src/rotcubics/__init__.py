"""Riemannian cubics on SO(3) and the round sphere.

Flows (bi-invariant and general-metric group cubics, sphere cubics,
reduced geodesics), horizontal lifts and the lift-to-cubic analysis,
ballistic-curve classification, Lagrange-Poincare residual checks, and
two-point boundary-value planning by shooting.
"""

from ._kernels import BACKEND
from .ballistic import (
    EQUAL_NORM_CIRCLE,
    HORIZONTAL_GEODESIC,
    NON_CUBIC,
    TRIVIAL,
    ballistic_cubic_condition,
    circle_parameters,
    classify_s2,
    equal_norm_state,
)
from .dynamics import (
    BallisticState,
    Ep2Flow,
    Ep2State,
    IntegrationAbort,
    NhpState,
    SphereCubicState,
    Trajectory,
    cubic_sphere_rhs,
    ep2_rhs,
    ep2_state_from_derivatives,
    integrate,
    lie_quadratic,
    lp1_rhs,
    nhp_rhs,
    project_initial_data,
)
from .lie_core import (
    ChartError,
    Metric,
    ad_dagger,
    ad_star,
    adjoint,
    bracket,
    curvature_group,
    exp_so3,
    flat,
    hat,
    log_so3,
    sharp,
    vee,
)
from .lifting import (
    LiftabilityCertificate,
    horizontal_lift,
    lift_obstruction,
    liftability_certificate,
    liftable_cubic,
)
from .lp_reduction import (
    Lp2Result,
    ReducedSample,
    lp2_residuals,
    reduced_lagrangian_s2,
    reduced_samples,
    sigma_from_group,
)
from .planner import (
    BvpProblem,
    BvpSolution,
    PiecewisePath,
    SegmentError,
    plan_waypoints,
    shoot_group,
    shoot_sphere,
)
from .sphere import (
    covariant_derivative,
    cubic_residual_sphere,
    curvature_sphere,
    generator,
    horizontal_generator,
    project,
    split,
)

__version__ = "0.1.0"
