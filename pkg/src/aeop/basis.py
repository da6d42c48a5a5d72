"""Basis of the function spaces L(n*0 + a) on the torus and their expansions.

The basis is b_0 = 1, b_1 = zeta(z) - zeta(z-a) - zeta(a) (the only element
with a pole at the anchor a), b_{2k} = P^k and b_{2k+1} = -P' P^(k-1) / 2 for
k >= 1, all monic in the sense that b_j ~ z^(-j) at the origin.

b_1 also equals -(P'(z) + P'(a)) / (2 (P(z) - P(a))); the ratio form is used
everywhere except near the two points with P(z) = P(a) (z = +-a mod the
lattice), where it is 0/0- or cancellation-prone and the zeta form is exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, PoleAt, ZeroFunction
from .lattice import (
    RectLattice,
    _as_array,
    _maybe_scalar,
    _reduce_centered,
    reduce_to_fundamental,
    torus_distance,
    wp,
    wp_pair,
    wp_prime,
    zeta_w,
)

B1_SWITCH_DISTANCE = 1e-3


class Contour(str, enum.Enum):
    GAMMA1 = "gamma1"
    GAMMA2 = "gamma2"


@dataclass(frozen=True)
class AnchorConfig:
    """Anchor point a on gamma1 or gamma2 plus the orthogonality contour id."""

    a: complex
    gamma: Contour

    def contour_offset(self, lat: RectLattice) -> complex:
        return 0.0 if self.gamma is Contour.GAMMA1 else 1j * lat.tau

    def as_dict(self) -> dict:
        return {"re": self.a.real, "im": self.a.imag, "gamma": self.gamma.value}


def anchor_config(a: complex, gamma, lat: RectLattice) -> AnchorConfig:
    """Validate and normalize an anchor: a on the contour complementary to gamma."""
    gamma = Contour(gamma)
    a = reduce_to_fundamental(complex(a), lat).z
    tol = 1e-9 * max(1.0, 2.0 * lat.omega1, 2.0 * lat.tau)
    if torus_distance(a, 0.0, lat) <= tol:
        raise NonFinite("anchor must not be a lattice point")
    if gamma is Contour.GAMMA2:
        if abs(a.imag) > tol:
            raise NonFinite(f"with contour gamma2 the anchor must lie on gamma1, got {a}")
        a = complex(a.real, 0.0)
    else:
        if abs(a.imag - lat.tau) > tol:
            raise NonFinite(f"with contour gamma1 the anchor must lie on gamma2, got {a}")
        a = complex(a.real, lat.tau)
    return AnchorConfig(a=a, gamma=gamma)


def _near_pm_a(z: np.ndarray, a: complex, lat: RectLattice) -> np.ndarray:
    """Mask of points within the b_1 switch distance of +-a mod the lattice."""
    da, _, _ = _reduce_centered(z - a, lat)
    db, _, _ = _reduce_centered(z + a, lat)
    return (np.abs(da) < B1_SWITCH_DISTANCE) | (np.abs(db) < B1_SWITCH_DISTANCE)


def _guard(z: np.ndarray, a: complex | None, lat: RectLattice) -> None:
    zr, _, _ = _reduce_centered(z, lat)
    if np.any(np.abs(zr) < lat.guard_radius):
        raise PoleAt(0.0)
    if a is not None:
        da, _, _ = _reduce_centered(z - a, lat)
        if np.any(np.abs(da) < lat.guard_radius):
            raise PoleAt(a)


def b1_eval(z, anchor: AnchorConfig, lat: RectLattice):
    """The degree-1 basis element, switching forms near P(z) = P(a)."""
    arr, scalar = _as_array(z)
    _guard(arr, anchor.a, lat)
    a = anchor.a
    out = np.empty(arr.shape, dtype=complex)
    near = _near_pm_a(arr, a, lat)
    far = ~near
    if np.any(far):
        zf = arr[far]
        out[far] = -0.5 * (wp_prime(zf, lat) + wp_prime(a, lat)) / (wp(zf, lat) - wp(a, lat))
    if np.any(near):
        zn = arr[near]
        out[near] = zeta_w(zn, lat) - zeta_w(zn - a, lat) - zeta_w(a, lat)
    return _maybe_scalar(out, scalar)


def b1_zeta_form(z, anchor: AnchorConfig, lat: RectLattice):
    """zeta-difference form of b_1, for cross-checking the ratio form."""
    arr, scalar = _as_array(z)
    _guard(arr, anchor.a, lat)
    a = anchor.a
    return _maybe_scalar(zeta_w(arr, lat) - zeta_w(arr - a, lat) - zeta_w(a, lat), scalar)


def basis_eval(j: int, z, anchor: AnchorConfig, lat: RectLattice):
    """Evaluate b_j at z (scalar or array)."""
    if j < 0:
        raise NonFinite(f"basis index must be >= 0, got {j}")
    arr, scalar = _as_array(z)
    flat = arr.reshape(-1)
    if j == 0:
        out = np.ones(flat.shape, dtype=complex)
    elif j == 1:
        out = b1_eval(flat, anchor, lat)
    else:
        _guard(flat, None, lat)
        p = wp(flat, lat)
        if j % 2 == 0:
            out = p ** (j // 2)
        else:
            out = -0.5 * wp_prime(flat, lat) * p ** ((j - 1) // 2 - 1)
    return _maybe_scalar(out.reshape(arr.shape), scalar)


def basis_matrix(jmax: int, z: np.ndarray, anchor: AnchorConfig, lat: RectLattice,
                 values: tuple | None = None) -> np.ndarray:
    """All b_0..b_jmax at the points z, sharing one P / P' evaluation.

    ``values`` optionally carries precomputed (P(z), P'(z)) arrays.
    Returns an array of shape (jmax + 1, len(z)).
    """
    z = np.asarray(z, dtype=complex)
    flat = z.reshape(-1)
    _guard(flat, anchor.a if jmax >= 1 else None, lat)
    out = np.empty((jmax + 1, flat.size), dtype=complex)
    out[0] = 1.0
    if jmax >= 1 or values is None:
        if values is None:
            p, dp = wp_pair(flat, lat)
        else:
            p, dp = values
    if jmax >= 1:
        near = _near_pm_a(flat, anchor.a, lat)
        b1 = -0.5 * (dp + wp_prime(anchor.a, lat)) / (p - wp(anchor.a, lat))
        if np.any(near):
            zn = flat[near]
            b1[near] = zeta_w(zn, lat) - zeta_w(zn - anchor.a, lat) - zeta_w(anchor.a, lat)
        out[1] = b1
    if jmax >= 2:
        powers = {0: np.ones_like(p), 1: p}

        def ppow(k):
            if k not in powers:
                powers[k] = ppow(k - 1) * p
            return powers[k]

        for j in range(2, jmax + 1):
            if j % 2 == 0:
                out[j] = ppow(j // 2)
            else:
                out[j] = -0.5 * dp * ppow((j - 1) // 2 - 1)
    return out


def basis_deriv(j: int, z, anchor: AnchorConfig, lat: RectLattice, order: int = 1):
    """First or second derivative of b_j, from P-function closed forms."""
    if order not in (1, 2):
        raise NonFinite("order must be 1 or 2")
    arr, scalar = _as_array(z)
    flat = arr.reshape(-1)
    if j == 0:
        return _maybe_scalar(np.zeros(arr.shape, dtype=complex), scalar)
    if j == 1:
        _guard(flat, anchor.a, lat)
        if order == 1:
            val = wp(flat - anchor.a, lat) - wp(flat, lat)
        else:
            val = wp_prime(flat - anchor.a, lat) - wp_prime(flat, lat)
        return _maybe_scalar(val.reshape(arr.shape), scalar)
    _guard(flat, None, lat)
    p = wp(flat, lat)
    dp = wp_prime(flat, lat)
    d2p = 6.0 * p * p - 0.5 * lat.g2
    if j % 2 == 0:
        k = j // 2
        if order == 1:
            val = k * p ** (k - 1) * dp
        else:
            val = k * (k - 1) * p ** (k - 2) * dp**2 + k * p ** (k - 1) * d2p
    else:
        k = (j - 1) // 2
        if order == 1:
            val = -0.5 * (d2p * p ** (k - 1) + (k - 1) * p ** (k - 2) * dp**2)
        else:
            d3p = 12.0 * p * dp
            val = -0.5 * (
                d3p * p ** (k - 1)
                + 3.0 * (k - 1) * p ** (k - 2) * dp * d2p
                + (k - 1) * (k - 2) * p ** (k - 3) * dp**3
            )
    return _maybe_scalar(val.reshape(arr.shape), scalar)


@dataclass(frozen=True)
class APolyCoeffs:
    """Coefficients of an a-polynomial in the basis {b_j}."""

    lam: tuple
    anchor: AnchorConfig
    lattice: RectLattice

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(complex(v) for v in self.lam))

    @property
    def coeff_array(self) -> np.ndarray:
        return np.asarray(self.lam, dtype=complex)

    def eval(self, z):
        return eval_apoly(self, z)

    def deriv(self, z, order: int = 1):
        return eval_apoly_deriv(self, z, order)

    def as_dict(self) -> dict:
        return {
            "lattice": {"omega1": self.lattice.omega1, "tau": self.lattice.tau},
            "anchor": self.anchor.as_dict(),
            "lambda": [[v.real, v.imag] for v in self.lam],
        }


def apoly_from_dict(data: dict) -> APolyCoeffs:
    from .lattice import lattice_from_half_periods

    lat = lattice_from_half_periods(data["lattice"]["omega1"], data["lattice"]["tau"])
    anc = anchor_config(
        complex(data["anchor"]["re"], data["anchor"]["im"]), data["anchor"]["gamma"], lat
    )
    lam = [complex(re, im) for re, im in data["lambda"]]
    return APolyCoeffs(lam=tuple(lam), anchor=anc, lattice=lat)


def eval_apoly(c: APolyCoeffs, z):
    """Sum of lam_j * b_j(z)."""
    arr, scalar = _as_array(z)
    mat = basis_matrix(len(c.lam) - 1, arr.reshape(-1), c.anchor, c.lattice)
    vals = (c.coeff_array @ mat).reshape(arr.shape)
    return _maybe_scalar(vals, scalar)


def eval_apoly_deriv(c: APolyCoeffs, z, order: int = 1):
    """Derivative of the expansion, term by term."""
    arr, scalar = _as_array(z)
    flat = arr.reshape(-1)
    total = np.zeros(flat.shape, dtype=complex)
    for j, lam in enumerate(c.lam):
        if lam != 0:
            total += lam * basis_deriv(j, flat, c.anchor, c.lattice, order)
    return _maybe_scalar(total.reshape(arr.shape), scalar)


def has_pole_at_a(c: APolyCoeffs, rel_tol: float = 1e-8) -> bool:
    """b_1 is the only element with a pole at a, so test its coefficient."""
    lam = np.abs(c.coeff_array)
    if len(lam) < 2:
        return False
    return bool(lam[1] > rel_tol * lam.max())


def laurent_leading(c: APolyCoeffs, degree_tol: float = 1e-10) -> tuple[int, complex]:
    """Polynomial degree and leading coefficient by the coefficient-size rule."""
    lam = c.coeff_array
    mags = np.abs(lam)
    top = mags.max() if len(mags) else 0.0
    if top == 0.0:
        raise ZeroFunction("all coefficients are zero")
    alive = np.nonzero(mags > degree_tol * top)[0]
    if len(alive) == 0:
        raise ZeroFunction("all coefficients below the degree tolerance")
    deg = int(alive[-1])
    return deg, complex(lam[deg])


def laurent_leading_fit(c: APolyCoeffs, eps: float = 1e-5) -> tuple[int, complex]:
    """Independent near-origin fit of the leading Laurent behavior.

    Evaluates at eps and eps/2 toward 0; the pole order is read off the growth
    ratio and the coefficient from c ~ f(z) * z^degree.
    """
    deg, _ = laurent_leading(c)
    f1 = eval_apoly(c, eps)
    f2 = eval_apoly(c, eps / 2.0)
    if deg > 0:
        order = math.log2(abs(f2 / f1))
        fitted_deg = int(round(order))
    else:
        fitted_deg = 0
    lead = f2 * (eps / 2.0) ** deg
    return fitted_deg, lead
