"""Triple-zero nilpotent singularity toolkit for delayed oscillators.

The package computes the parameter locus at which a class of second-order
delay-differential oscillators carries a nilpotent triple-zero eigenvalue,
reduces the dynamics to the three-dimensional center-manifold normal form
order by order, constructively inverts that reduction (any prescribed
normal form up to a given order is realized by polynomial nonlinearities),
and cross-checks everything with independent numerical instruments.
"""

from .errors import (
    ArityError,
    BlowupError,
    CMResidualError,
    DegenerateCubicTerm,
    DomainError,
    LambdaResidualError,
    LemmaPreconditionError,
    NormalizationError,
    ParseError,
    QuadratureError,
    SpectralDegeneracy,
    SpectralMismatch,
    SplitError,
    ThetaDegreeError,
    TrizeroError,
)
from .homological import (
    SplitResult,
    WBasis,
    lb_apply,
    lb_matrix,
    split,
    w_basis,
    w_labels,
)
from .linear import (
    BasisPair,
    CharReport,
    OscillatorParams,
    REFERENCE_PARAMS,
    bilinear,
    char_derivative_at_zero,
    char_derivatives,
    char_eval,
    locus,
    psi_basis,
)
from .poly import (
    HomoPoly,
    ThetaPoly,
    VecPoly3,
    compose_linear,
    directional_derivative_Bu,
    enumerate_monomials,
    format_poly,
    mono_index,
    parse_poly,
    theta_derivative,
    theta_eval,
    theta_integrate,
)
from .realize import (
    GDecomposition,
    RealizeTarget,
    construct_order,
    decompose,
    lemma_solve,
    realize,
)
from .reduction import (
    CMTable,
    FGSeries,
    NFSeries,
    ReductionTrace,
    project_nonlinearity,
    reduce,
    solve_v_homological,
)
from .simulate import (
    FlowComparison,
    SpectralOracle,
    Trajectory,
    compare_flows,
    project_center,
    simulate_dde,
    simulate_nf,
    spectral_oracle,
)

__version__ = "0.1.0"
