"""Joint Sato-Tate statistics for newform coefficients.

Exact q-expansions (eta quotients, files, remote fetch), Chebyshev
symmetric-power lifts, closed-form and certified-quadrature joint measures,
grid-bracket approximations with boundary-count certificates, and prime
sign/dominance statistics with effective error envelopes.
"""

from .bipoly import Poly2
from .chebyshev import ChebyshevU, eval_u, s_poly, sympower_coeff, u_poly
from .coeffs import (
    CoefficientTable,
    NewformDescriptor,
    PentagonalSeries,
    Source,
    expand_eta_quotient,
    fetch_remote,
    load_coefficient_file,
    normalized_prime_value,
    pentagonal_series,
    write_coefficient_file,
)
from .counting import (
    DensityReport,
    FirstSignChange,
    PrimeSieve,
    SymmetryClass,
    count_in_region,
    default_checkpoints,
    dominance_density_series,
    first_sign_change,
    sieve,
    sign_density_series,
    symmetry_class,
    theoretical_first_sign_bound,
    zero_count,
)
from .measures import (
    Interval,
    MeasureValue,
    d_ell,
    d_mn,
    mu_jst_rect,
    mu_jst_region,
    mu_st,
)
from .region import (
    ErrorEnvelope,
    GridApproximation,
    PolynomialRegion,
    boundary_bound_check,
    build_grid,
    classify_boxes,
    curve_length,
    disk,
    error_envelope,
    full_square,
    half_plane_u_positive,
    m_of_x,
    rect,
    region_from_poly_interval,
    sign_product,
    strip_merge,
)

__version__ = "0.1.0"
