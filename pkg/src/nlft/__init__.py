"""Discrete nonlinear Fourier transform of disc-valued sequences.

Forward and inverse transforms, spectral and Riemann-Hilbert factorization
of SU(1,1)-valued pairs, and the bridges to orthogonal polynomials on the
circle and to Jacobi matrices.
"""

from .errors import NLFTError, InputError, NumericalError
from .laurent_core import (
    LaurentPolynomial,
    RationalFunction,
    UnitCircleGrid,
    add,
    coefficients,
    multiply,
    roots,
    sample,
    star,
)
from .su11_pairs import (
    CoefficientSequence,
    SU11Pair,
    h_distance,
    operator_norm_at,
    pair_inverse,
    pair_product,
    random_batch,
    transfer_matrix,
    unimodularity_defect,
)
from .forward_nlft import (
    apply_symmetry,
    expansion_partial_sum,
    multilinear_term,
    nlft_finite,
    nlft_truncated,
    plancherel_check,
    sum_rules,
)
from .spectral_factorization import (
    a_from_b_laurent,
    a_from_b_rational,
    outer_from_modulus,
    spectral_factor_rational,
)
from .inverse_nlft import (
    SchurFunction,
    invert_full_line,
    layer_strip_finite,
    reflection_quotient,
    schur_algorithm,
    schur_algorithm_exact,
)
from .riemann_hilbert import (
    PoleParameters,
    RHFactorization,
    classify_poles,
    energy,
    projection_recursion,
    rh_contraction_bounded,
    shared_pole_factorization,
    triple_factorization_rational,
)
from .opuc_bridge import (
    HessenbergBand,
    MeasureDensity,
    bochner_check,
    gram_schmidt_oracle,
    herglotz_m,
    hessenberg_entries,
    measure_density_finite,
    orthogonal_polys,
    szego_check,
)
from .jacobi_bridge import (
    JacobiMatrix,
    jacobi_from_F,
    jacobi_m_check,
    joukowski_pushforward,
    moment_gram_schmidt_oracle,
)

__version__ = "0.1.0"
