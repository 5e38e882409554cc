"""First-order proximal splitting solvers with a certification engine."""

from .linops import (
    AdjointOperator,
    CircularConv,
    ComposedOperator,
    DenseOperator,
    Grad2D,
    IdentityOperator,
    ImageGrid,
    LinearOperator,
    MaskOperator,
    ScaleOperator,
    StackOperator,
    adjoint_consistency_check,
    compose,
    conjugate_gradient,
    construct_operator,
    dense_from_csv,
    operator_norm,
)
from .funcs import (
    AffineGraphIndicator,
    BoxIndicator,
    CallableSmooth,
    ConjugateProx,
    ConsensusIndicator,
    HardThreshold,
    L1Norm,
    L1Residual,
    LinfBallIndicator,
    OrthogonalComposition,
    ProxFn,
    Quadratic,
    SaddleProblem,
    SeparableProx,
    SmoothFn,
    ZeroFn,
    indicator_prox,
    make_quadratic,
    prox_conjugate,
    soft_threshold,
)
from .solvers import (
    ConfigError,
    SolverConfig,
    SolverTrace,
    admm,
    arrow_hurwicz,
    chambolle_pock,
    condat,
    douglas_rachford,
    forward_backward,
    gradient_descent,
    krasnoselskii_mann,
    nonconvex_forward_backward,
    ppxa,
    projected_gradient,
    proximal_point,
)
from .problems import (
    ProblemInstance,
    build_from_config,
    build_lasso,
    build_poisson_editing,
    build_tv_denoise,
    build_tv_inverse,
    build_tvl1,
    build_wavelet_reg,
)
from .data import generate_synthetic, image_io, load_fixture, write_fixture

__version__ = "0.1.0"
