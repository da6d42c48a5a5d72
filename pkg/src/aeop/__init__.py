"""Elliptic orthogonal a-polynomials on rectangular-lattice tori.

Construction and verification of orthogonal families in the spaces
L(n*0 + a) of meromorphic functions on a torus: Weierstrass function
machinery, contour bimoments, five-term recurrence, Christoffel-Darboux
kernels, zero counting and interlacing, the correspondence with orthogonal
polynomials on an interval, and the decomposition into interval
multiple-orthogonality conditions.
"""

from .basis import AnchorConfig, APolyCoeffs, Contour, anchor_config
from .engine import EopFamily, build_family
from .lattice import (
    RectLattice,
    TorusPoint,
    lattice_from_branch_points,
    lattice_from_half_periods,
    reduce_to_fundamental,
    wp,
    wp_prime,
    zeta_w,
)
from .quadrature import (
    ContourGrid,
    WeightSpec,
    contour_grid,
    contour_integral,
    example_v_weight,
    example_w_weight,
    general_lift_weight,
    inverse_power_weight,
    lifted_even_weight,
    user_weight,
    weight_eval,
)
from .tolerances import Tolerances, default_tolerances

__version__ = "0.1.0"

__all__ = [
    "AnchorConfig", "APolyCoeffs", "Contour", "ContourGrid", "EopFamily",
    "RectLattice", "TorusPoint", "Tolerances", "WeightSpec", "anchor_config",
    "build_family", "contour_grid", "contour_integral", "default_tolerances",
    "example_v_weight", "example_w_weight", "general_lift_weight",
    "inverse_power_weight", "lattice_from_branch_points",
    "lattice_from_half_periods", "lifted_even_weight", "reduce_to_fundamental",
    "user_weight", "weight_eval", "wp", "wp_prime", "zeta_w",
]
