"""fraclab: the spectral fractional Laplacian on compact manifolds.

Extension semigroup, Duhamel assembly, and numerical verification of the
exact pointwise identities (fractional Leibniz rule, Bochner formula with
Ricci term, Gamma_2 representation, Cordoba-Cordoba and Kato remainders,
Stroock-Varopoulos) to quantified tolerances.
"""

from .special import FracParams, bessel_k, gamma, make_frac_params, poisson_multiplier, poisson_multiplier_deriv
from .manifolds import (
    Circle,
    Torus,
    GridField,
    SpectralField,
    analyze,
    constant_field,
    gradient,
    hessian_sq_norm,
    integrate,
    laplacian,
    pointwise_map,
    pointwise_product,
    random_band_limited,
    ricci_quadratic,
    spectral_inner,
    synthesize,
)
from .sphere import Sphere
from .zquad import ZRule, ZRulePair, build_rule, build_rule_pair
from .zquad import integrate as z_integrate
from .operators import (
    ExtensionSlice,
    dtn_field,
    dtn_scalar_limit,
    extension_oracle_heat,
    extension_slice,
    frac_laplacian,
    hs_inner,
    poisson_apply,
    singular_integral_oracle_circle,
    weighted_seminorm_sq,
)
from .duhamel import assemble_rhs, assemble_rhs_split, duhamel_mode_check
from .verifiers import (
    IdentityReport,
    Nonlinearity,
    defect_a,
    defect_b,
    gamma1,
    nonlin_abs_power,
    nonlin_cosh,
    nonlin_quartic,
    nonlin_square,
    rules_for,
    verify_bochner,
    verify_cordoba,
    verify_decay,
    verify_gamma2,
    verify_leibniz,
    verify_sv,
)
from .kato import (
    StripMesh,
    ZeroContour,
    build_strip_mesh,
    extract_zero_contour,
    f_functional,
    kato_lhs_weak,
    kato_u_zero_term,
    verify_kato,
    weighted_contour_integral,
)

__version__ = "0.1.0"
