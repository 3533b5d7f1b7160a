"""Second-order spectral shift functions for contraction, self-adjoint and
dissipative pairs, with every identity verified along independent routes."""

from .opcore import (
    DefectPair,
    NotAContractionError,
    TrigPolynomial,
    apply_function,
    as_operator,
    defects,
    hermitian_exp,
    hs_norm,
    is_contraction,
    is_hermitian,
    is_unitary,
    op_norm,
    trace_norm,
)
from .paths import PerturbationPath, difference_quotient_residual, monomial_bound_constant
from .dilation import (
    BlockOperator,
    DilationError,
    IllConditionedPolarWarning,
    NDilation,
    hs_difference_schaffer,
    modified_dilation,
    n_dilation,
    polar_unitary,
    schaffer_window,
)
from .semispectral import (
    MomentConsistencyError,
    SemiSpectralCDF,
    cdf_eval,
    moment_residual,
    semispectral_cdf,
    spectral_cdf_unitary,
)
from .shift import (
    PipelineError,
    QuadConfig,
    RealLineShift,
    ShiftFunction,
    StepFunction,
    eta_moment_linear,
    eta_pointwise_linear,
    eta_tilde_moment_mult,
    eta_tilde_moments_mult,
    gamma_pipeline,
    mobius_polynomial_weight,
    quotient_bound_test,
    shift_step_representation,
    verify_trace_formula_linear,
    verify_trace_formula_mult,
)
from .cayley import (
    DegenerateTransformError,
    DissipativePair,
    SelfAdjointPair,
    cayley_dissipative,
    cayley_sa,
    inverse_cayley,
    resolvent_pipeline,
    verify_dissipative_formula,
    verify_resolvent_formula,
    verify_selfadjoint_formula,
    w_path,
)
from .truncate import ProjectionSequence, build_projections, reduction_diagnostics, truncation_gap
from .quadrature import QuadratureError, adaptive_gk15, gauss_legendre_01
from .report import VerificationReport

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
