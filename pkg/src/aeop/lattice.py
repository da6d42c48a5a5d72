"""Rectangular lattices and Weierstrass functions.

Everything here assumes a rectangular period lattice: half-periods omega1 > 0
(real) and omega3 = i*tau (tau > 0), which forces real invariants g2, g3,
positive discriminant, and three real ordered branch points e3 < e2 < e1.

The elliptic functions are evaluated through Jacobi theta series in the real
nome q = exp(-pi*tau/omega1); arguments are first reduced to the centered
period rectangle, so the series need only a handful of terms even for fairly
skewed lattices.  Accuracy contracts (ODE residual, periodicity, parity,
quasi-periods) are enforced by the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadOrdering, NonFinite, PoleAt

_TERM_CUTOFF = 1e-18


@dataclass(frozen=True)
class RectLattice:
    """Half-periods and derived invariants of a rectangular torus."""

    omega1: float
    tau: float
    e1: float
    e2: float
    e3: float
    g2: float
    g3: float
    discriminant: float
    # cached theta data (nome, null values, eta quasi-periods)
    q: float
    theta2_0: float
    theta3_0: float
    theta4_0: float
    theta1p_0: float
    eta1: float
    eta3: complex

    @property
    def omega3(self) -> complex:
        return 1j * self.tau

    @property
    def omega2(self) -> complex:
        return self.omega1 + 1j * self.tau

    @property
    def periods(self) -> tuple[float, complex]:
        return 2.0 * self.omega1, 2j * self.tau

    @property
    def guard_radius(self) -> float:
        return 1e-12 * min(2.0 * self.omega1, 2.0 * self.tau)

    def as_dict(self) -> dict:
        return {
            "omega1": self.omega1,
            "tau": self.tau,
            "e1": self.e1,
            "e2": self.e2,
            "e3": self.e3,
            "g2": self.g2,
            "g3": self.g3,
            "discriminant": self.discriminant,
        }


@dataclass(frozen=True)
class TorusPoint:
    """A point reduced to the fundamental rectangle [0, 2*omega1) x [0, 2*tau)."""

    z: complex

    def __complex__(self) -> complex:
        return self.z


def _nterms(q: float) -> int:
    # q^(n^2) below cutoff; a couple extra for headroom
    if q <= 0.0:
        return 2
    n = math.sqrt(math.log(_TERM_CUTOFF) / math.log(q))
    return max(2, int(math.ceil(n)) + 2)


def _theta_nulls(q: float) -> tuple[float, float, float, float, float]:
    """Null values theta2, theta3, theta4, theta1', theta1''' at v = 0."""
    n = np.arange(_nterms(q))
    half = (n + 0.5) ** 2
    qh = q**half
    sgn = (-1.0) ** n
    odd = 2 * n + 1
    th2 = 2.0 * np.sum(qh)
    th1p = 2.0 * np.sum(sgn * qh * odd)
    th1ppp = -2.0 * np.sum(sgn * qh * odd**3)
    m = np.arange(1, _nterms(q))
    qm = q ** (m**2)
    th3 = 1.0 + 2.0 * np.sum(qm)
    th4 = 1.0 + 2.0 * np.sum((-1.0) ** m * qm)
    return float(th2), float(th3), float(th4), float(th1p), float(th1ppp)


def lattice_from_half_periods(omega1: float, tau: float) -> RectLattice:
    """Build the lattice with half-periods (omega1, i*tau), both > 0."""
    omega1 = float(omega1)
    tau = float(tau)
    if not (math.isfinite(omega1) and math.isfinite(tau)):
        raise NonFinite(f"half-periods must be finite, got ({omega1}, {tau})")
    if omega1 <= 0.0 or tau <= 0.0:
        raise NonFinite(f"half-periods must be positive, got ({omega1}, {tau})")

    q = math.exp(-math.pi * tau / omega1)
    th2, th3, th4, th1p, th1ppp = _theta_nulls(q)
    c = (math.pi / (2.0 * omega1)) ** 2
    d12 = c * th4**4  # e1 - e2
    d13 = c * th3**4  # e1 - e3
    e1 = (d12 + d13) / 3.0
    e2 = e1 - d12
    e3 = e1 - d13
    g2 = -4.0 * (e1 * e2 + e2 * e3 + e3 * e1)
    g3 = 4.0 * e1 * e2 * e3
    disc = g2**3 - 27.0 * g3**2
    eta1 = -(math.pi**2) / (12.0 * omega1) * th1ppp / th1p
    eta3 = (eta1 * (1j * tau) - 1j * math.pi / 2.0) / omega1
    return RectLattice(
        omega1=omega1, tau=tau, e1=e1, e2=e2, e3=e3,
        g2=g2, g3=g3, discriminant=disc,
        q=q, theta2_0=th2, theta3_0=th3, theta4_0=th4, theta1p_0=th1p,
        eta1=eta1, eta3=eta3,
    )


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two positive numbers."""
    if a <= 0.0 or b <= 0.0:
        raise NonFinite("agm needs positive arguments")
    for _ in range(64):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        if abs(a - b) <= 1e-17 * abs(a):
            break
    return 0.5 * (a + b)


def complete_k(m: float) -> float:
    """Complete elliptic integral K as a function of the parameter m = k^2."""
    if not 0.0 <= m < 1.0:
        raise NonFinite(f"parameter m must be in [0, 1), got {m}")
    return math.pi / (2.0 * agm(1.0, math.sqrt(1.0 - m)))


def complete_k_complement(m: float) -> float:
    """K(1-m) computed from m directly, avoiding the 1-(1-m) cancellation."""
    if not 0.0 < m <= 1.0:
        raise NonFinite(f"parameter m must be in (0, 1], got {m}")
    return math.pi / (2.0 * agm(1.0, math.sqrt(m)))


def lattice_from_branch_points(e1: float, e2: float, e3: float) -> RectLattice:
    """Recover half-periods from ordered branch points e3 < e2 < e1, sum 0."""
    vals = (float(e1), float(e2), float(e3))
    if not all(math.isfinite(v) for v in vals):
        raise NonFinite(f"branch points must be finite, got {vals}")
    e1, e2, e3 = vals
    scale = max(abs(e1), abs(e2), abs(e3))
    if scale == 0.0:
        raise BadOrdering("branch points are all zero")
    if not e3 < e2 < e1:
        raise BadOrdering(f"need e3 < e2 < e1, got e1={e1}, e2={e2}, e3={e3}")
    if abs(e1 + e2 + e3) > 1e-10 * scale:
        raise BadOrdering(f"branch points must sum to zero, got {e1 + e2 + e3}")

    m = (e2 - e3) / (e1 - e3)
    root = math.sqrt(e1 - e3)
    omega1 = complete_k(m) / root
    tau = complete_k_complement(m) / root
    return lattice_from_half_periods(omega1, tau)


# ---------------------------------------------------------------------------
# argument reduction
# ---------------------------------------------------------------------------

def reduce_to_fundamental(z: complex, lat: RectLattice) -> TorusPoint:
    """Translate z by the lattice into [0, 2*omega1) x [0, 2*tau)."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NonFinite(f"cannot reduce non-finite point {z}")
    px, py = 2.0 * lat.omega1, 2.0 * lat.tau
    re = z.real - px * math.floor(z.real / px)
    im = z.imag - py * math.floor(z.imag / py)
    if re >= px:  # floor roundoff at the seam
        re -= px
    if im >= py:
        im -= py
    return TorusPoint(complex(re, im))


def _reduce_centered(z: np.ndarray, lat: RectLattice):
    """Reduce to Re in [-omega1, omega1), Im in [-tau, tau); return multipliers."""
    px, py = 2.0 * lat.omega1, 2.0 * lat.tau
    m = np.floor(z.real / px + 0.5)
    n = np.floor(z.imag / py + 0.5)
    zr = (z.real - px * m) + 1j * (z.imag - py * n)
    return zr, m, n


def _check_poles(zr: np.ndarray, lat: RectLattice) -> None:
    bad = np.abs(zr) < lat.guard_radius
    if np.any(bad):
        raise PoleAt(0.0, "argument reduces to a lattice point")


# ---------------------------------------------------------------------------
# theta series on arrays
# ---------------------------------------------------------------------------

def _trig_tables(v: np.ndarray, q: float):
    """sin((2n+1)v) and cos((2n+1)v) (odd) plus cos(2nv) (even) tables.

    Complex v is split into real and imaginary parts so only real
    transcendentals are evaluated (complex np.sin is several times slower).
    """
    nt = _nterms(q)
    flat = np.asarray(v).reshape(-1)
    x = flat.real
    y = flat.imag
    odd = (2 * np.arange(nt) + 1)[:, None]
    ox, oy = odd * x[None, :], odd * y[None, :]
    sin_odd = np.sin(ox) * np.cosh(oy) + 1j * np.cos(ox) * np.sinh(oy)
    cos_odd = np.cos(ox) * np.cosh(oy) - 1j * np.sin(ox) * np.sinh(oy)
    even = (2 * np.arange(1, nt))[:, None]
    ex, ey = even * x[None, :], even * y[None, :]
    cos_even = np.cos(ex) * np.cosh(ey) - 1j * np.sin(ex) * np.sinh(ey)
    return sin_odd, cos_odd, cos_even


def _theta_coeffs(q: float):
    n = np.arange(_nterms(q))
    qh = q ** ((n + 0.5) ** 2)
    sgn = (-1.0) ** n
    m = np.arange(1, _nterms(q))
    qm = q ** (m**2)
    return sgn * qh, qh, qm, (-1.0) ** m * qm


def _theta1(v: np.ndarray, q: float):
    c1, _, _, _ = _theta_coeffs(q)
    sin_odd, _, _ = _trig_tables(v, q)
    return 2.0 * (c1 @ sin_odd).reshape(np.shape(v))


def _theta1_prime(v: np.ndarray, q: float):
    c1, _, _, _ = _theta_coeffs(q)
    odd = 2 * np.arange(c1.size) + 1
    _, cos_odd, _ = _trig_tables(v, q)
    return 2.0 * ((c1 * odd) @ cos_odd).reshape(np.shape(v))


def _theta2(v: np.ndarray, q: float):
    _, c2, _, _ = _theta_coeffs(q)
    _, cos_odd, _ = _trig_tables(v, q)
    return 2.0 * (c2 @ cos_odd).reshape(np.shape(v))


def _theta3(v: np.ndarray, q: float):
    _, _, c3, _ = _theta_coeffs(q)
    _, _, cos_even = _trig_tables(v, q)
    return 1.0 + 2.0 * (c3 @ cos_even).reshape(np.shape(v))


def _theta4(v: np.ndarray, q: float):
    _, _, _, c4 = _theta_coeffs(q)
    _, _, cos_even = _trig_tables(v, q)
    return 1.0 + 2.0 * (c4 @ cos_even).reshape(np.shape(v))


def _as_array(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.shape == ()


def _maybe_scalar(values: np.ndarray, scalar: bool):
    return complex(values[()]) if scalar else values


# ---------------------------------------------------------------------------
# Weierstrass functions
# ---------------------------------------------------------------------------

def _wp_pair_core(zr: np.ndarray, lat: RectLattice):
    """P and P' from one shared theta evaluation of reduced arguments."""
    v = (math.pi / (2.0 * lat.omega1)) * zr
    c1, c2, c3, c4 = _theta_coeffs(lat.q)
    sin_odd, cos_odd, cos_even = _trig_tables(v, lat.q)
    shape = np.shape(v)
    t1 = 2.0 * (c1 @ sin_odd).reshape(shape)
    t2 = 2.0 * (c2 @ cos_odd).reshape(shape)
    t3 = 1.0 + 2.0 * (c3 @ cos_even).reshape(shape)
    t4 = 1.0 + 2.0 * (c4 @ cos_even).reshape(shape)
    base = (math.pi / (2.0 * lat.omega1)) * (lat.theta1p_0 / lat.theta3_0)
    p = lat.e2 + (base * t3 / t1) ** 2
    pref = -2.0 * (math.pi / (2.0 * lat.omega1)) ** 3 * lat.theta1p_0**3
    dp = pref * t2 * t3 * t4 / (lat.theta2_0 * lat.theta3_0 * lat.theta4_0 * t1**3)
    return p, dp


def wp_pair(z, lat: RectLattice):
    """(P(z), P'(z)) sharing the theta evaluation; array in, arrays out."""
    arr = np.asarray(z, dtype=complex)
    zr, _, _ = _reduce_centered(arr, lat)
    _check_poles(zr, lat)
    return _wp_pair_core(zr, lat)


def wp(z, lat: RectLattice):
    """Weierstrass P function; scalar or ndarray argument."""
    arr, scalar = _as_array(z)
    zr, _, _ = _reduce_centered(arr, lat)
    _check_poles(zr, lat)
    v = (math.pi / (2.0 * lat.omega1)) * zr
    ratio = _theta3(v, lat.q) / _theta1(v, lat.q)
    base = (math.pi / (2.0 * lat.omega1)) * (lat.theta1p_0 / lat.theta3_0)
    return _maybe_scalar(lat.e2 + (base * ratio) ** 2, scalar)


def wp_prime(z, lat: RectLattice):
    """Derivative of the Weierstrass P function."""
    arr, scalar = _as_array(z)
    zr, _, _ = _reduce_centered(arr, lat)
    _check_poles(zr, lat)
    _, dp = _wp_pair_core(zr, lat)
    return _maybe_scalar(dp, scalar)


def wp_second(z, lat: RectLattice):
    """Second derivative, via the algebraic identity with g2."""
    p = wp(z, lat)
    return 6.0 * p * p - 0.5 * lat.g2


def wp_third(z, lat: RectLattice):
    """Third derivative, 12 * P * P'."""
    return 12.0 * wp(z, lat) * wp_prime(z, lat)


def zeta_w(z, lat: RectLattice):
    """Weierstrass zeta function (quasi-periodic primitive of -P)."""
    arr, scalar = _as_array(z)
    zr, m, n = _reduce_centered(arr, lat)
    _check_poles(zr, lat)
    v = (math.pi / (2.0 * lat.omega1)) * zr
    val = (lat.eta1 / lat.omega1) * zr
    val = val + (math.pi / (2.0 * lat.omega1)) * _theta1_prime(v, lat.q) / _theta1(v, lat.q)
    val = val + 2.0 * lat.eta1 * m + 2.0 * lat.eta3 * n
    return _maybe_scalar(val, scalar)


def is_half_period(a: complex, lat: RectLattice) -> bool:
    """True when a is congruent to omega1, omega2 or omega3 (not 0) mod the lattice."""
    tol = 1e-12 * max(1.0, 2.0 * lat.omega1, 2.0 * lat.tau)
    zr, _, _ = _reduce_centered(np.asarray(complex(a), dtype=complex), lat)
    dbl, _, _ = _reduce_centered(np.asarray(2.0 * complex(zr), dtype=complex), lat)
    return abs(complex(dbl)) < 2.0 * tol and abs(complex(zr)) > tol


def torus_distance(z: complex, w: complex, lat: RectLattice) -> float:
    """Distance from z to w modulo the lattice."""
    d, _, _ = _reduce_centered(np.asarray(complex(z) - complex(w), dtype=complex), lat)
    return float(abs(d))
