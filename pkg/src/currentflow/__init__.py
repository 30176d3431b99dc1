"""Transport of k-currents in R^d along flows of time-dependent vector
fields that are Lipschitz in space and merely integrable in time."""

from .exterior import (
    CoVector,
    MultiVector,
    pair,
    push_linear,
    simple_mass,
    wedge,
)
from .testforms import (
    Bump,
    CoefficientFn,
    Polynomial,
    TestForm,
    TimeCutoff,
    build_dictionary,
    lie_derivative_form,
)
from .flows import (
    FieldNotInClassL,
    FlowMap,
    TimeDependentField,
    constant_field,
    constant_modulation,
    gridded_field,
    inv_sqrt_modulation,
    inv_t_modulation,
    lebesgue_time_sampler,
    linear_field,
    mollify,
    shear_field,
    time_modulated_field,
    zero_field,
)
from .acapprox import (
    ClosedSet1D,
    Sampled1D,
    approximate_ac,
    approximate_ac_lip,
    interpolate_L,
    maximal_function,
    maximal_function_reference,
    sublevel_closed,
    weak_one_one_constant,
)
from .currents import (
    AtomicCurrent,
    CurrentError,
    DiracCurrent,
    SimplicialCurrent,
    boundary,
    combine_atoms,
    distance,
    evaluate,
    mass,
    weak_boundary_eval,
)
from .transport import (
    SpaceTimeCurrent,
    Trajectory,
    TransportError,
    approx_pushforward_sequence,
    nonuniqueness_demo,
    pushforward,
    pushforward_path,
    refinement_study,
    residual_dictionary,
    smooth_weak_residual,
    solve_gte,
    spacetime_cylinder,
    weak_residual,
)

__version__ = "0.1.0"
