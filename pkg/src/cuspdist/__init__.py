"""Distances to cusps on Hilbert modular varieties over class-number-one
totally real fields, heights on rigid adelic spaces, and Monte Carlo
verification of the associated Minkowski-type and integral bounds."""

from .errors import (
    BudgetExceeded,
    CuspdistError,
    GeneratorNotFound,
    NonPositiveDefinite,
    NotClassNumberOne,
    NotSquarefree,
    PrecisionExhausted,
    UnsupportedField,
    ValidationError,
    ViolationFound,
)
from .number_field import (
    FieldElement,
    GcdResult,
    TotallyRealField,
    ZetaEstimate,
    field_from_dict,
    load_field_file,
)
from .factory import (
    CLASS_NUMBER_ONE_M,
    QuadraticFieldRequest,
    make_rationals,
    make_real_quadratic,
)
from .hyperbolic import (
    GroupElement,
    PosDefPair,
    UpperHalfPoint,
    act,
    classify,
    phi,
    poincare_density,
    psi_matrix,
    t_of_tau,
)
from .cusps import (
    Cusp,
    cusp_action,
    cusp_distance,
    in_ball,
    iota,
    mu,
    mu_invariance_check,
    mu_of_pair,
)
from .search import (
    CuspRanking,
    MinkowskiReport,
    closest_cusps,
    default_threshold,
    hermite_upper_bound,
    in_sphere_of_influence,
    mu1_lean,
    reduce_to_fundamental_domain,
    verify_minkowski,
)
from .heights import (
    RigidAdelicSpace,
    height_mu_bridge_check,
    height_of_point,
    height_of_space,
    roy_thunder_minima,
    roy_thunder_minima_raw,
)
from .analytics import (
    HermiteEstimate,
    McEstimate,
    VolumeReport,
    estimate_hermite,
    integral_mu1_t,
    partial_volume_g,
    sample_cusp_neighborhood,
    siegel_volume,
    vol_ball_unit,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "CLASS_NUMBER_ONE_M",
    "Cusp",
    "CuspRanking",
    "CuspdistError",
    "FieldElement",
    "GcdResult",
    "GeneratorNotFound",
    "GroupElement",
    "HermiteEstimate",
    "McEstimate",
    "MinkowskiReport",
    "NonPositiveDefinite",
    "NotClassNumberOne",
    "NotSquarefree",
    "PosDefPair",
    "PrecisionExhausted",
    "QuadraticFieldRequest",
    "RigidAdelicSpace",
    "TotallyRealField",
    "UnsupportedField",
    "UpperHalfPoint",
    "ValidationError",
    "ViolationFound",
    "VolumeReport",
    "ZetaEstimate",
    "act",
    "classify",
    "closest_cusps",
    "cusp_action",
    "cusp_distance",
    "default_threshold",
    "estimate_hermite",
    "field_from_dict",
    "height_mu_bridge_check",
    "height_of_point",
    "height_of_space",
    "hermite_upper_bound",
    "in_ball",
    "in_sphere_of_influence",
    "integral_mu1_t",
    "iota",
    "load_field_file",
    "make_rationals",
    "make_real_quadratic",
    "mu",
    "mu1_lean",
    "mu_invariance_check",
    "mu_of_pair",
    "partial_volume_g",
    "phi",
    "poincare_density",
    "psi_matrix",
    "reduce_to_fundamental_domain",
    "roy_thunder_minima",
    "roy_thunder_minima_raw",
    "sample_cusp_neighborhood",
    "siegel_volume",
    "t_of_tau",
    "verify_minkowski",
    "vol_ball_unit",
]
