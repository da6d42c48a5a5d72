"""Decomposition of a-polynomials into interval polynomials and the induced
multiple-orthogonality conditions.

Every member of L(n*0 + a) splits as

    f = p1(P) + b1 * p2(P) + (P'(a)/2) * p3(P),
    p3(x) = (p2(x) - p2(P(a))) / (x - P(a)),

with deg p1 <= floor(n/2) and deg p2 <= floor((n-1)/2); for the orthogonal
members the pair (q_n, p2) with q_n(x) = p1(x) (P(a) - x) + (P'(a)/2) p2(P(a))
satisfies three families of interval orthogonality conditions against the
pullback weights w_j^+- built from W.  All interval integrals are evaluated
twice (mapped trapezoid and adaptive) and must agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .basis import AnchorConfig, APolyCoeffs, Contour, anchor_config, eval_apoly
from .engine import EopFamily, build_family
from .errors import DegenerateDenominator, NonFinite, OutOfInterval
from .lattice import RectLattice, wp, wp_prime
from .oprl import (
    MonicPoly,
    OprlWeight,
    christoffel_modification,
    dual_interval_quad,
    interval_quad,
    monic_oprl_family,
    wp_inverse_gamma2,
)
from .quadrature import WeightSpec, general_lift_weight, weight_eval
from .tolerances import Tolerances, default_tolerances

_PULLBACK_CACHE: dict = {}


def _half_period_snap(dpa: complex, wpa: complex) -> float:
    d = complex(dpa)
    if abs(d) < 1e-12 * (1.0 + abs(wpa)) ** 1.5:
        return 0.0
    return d.real


@dataclass(frozen=True)
class Decomposition:
    """Interval-polynomial pieces of an a-polynomial (coefficients ascending)."""

    p1: tuple
    p2: tuple
    p3: tuple
    qn: tuple
    wpa: float
    dpa: float
    degree: int

    def eval_parts(self, x):
        x = np.asarray(x, dtype=float)
        return (npoly.polyval(x, np.asarray(self.p1)),
                npoly.polyval(x, np.asarray(self.p2)),
                npoly.polyval(x, np.asarray(self.p3)))

    def eval_q(self, x):
        return npoly.polyval(np.asarray(x, dtype=float), np.asarray(self.qn))

    def as_dict(self) -> dict:
        return {
            "p1": [complex(v).real for v in self.p1],
            "p2": [complex(v).real for v in self.p2],
            "p3": [complex(v).real for v in self.p3],
            "qn": [complex(v).real for v in self.qn],
            "wp_a": self.wpa,
            "wp_prime_a": self.dpa,
            "degree": self.degree,
        }


def decompose(c: APolyCoeffs) -> Decomposition:
    """Split an a-polynomial into its p1, p2, p3 and q pieces."""
    lam = c.coeff_array
    n = len(lam) - 1
    m = n // 2
    lat = c.lattice
    wpa = complex(wp(c.anchor.a, lat)).real
    dpa = _half_period_snap(wp_prime(c.anchor.a, lat), wpa)

    p1 = np.zeros(m + 1, dtype=complex)
    for j in range(m + 1):
        p1[j] = lam[2 * j]
    odd_top = (n - 3) // 2  # largest l with 2l + 3 <= n
    p3 = np.zeros(max(odd_top + 1, 0), dtype=complex)
    for l in range(odd_top + 1):
        p3[l] = lam[2 * l + 3]
    # p2(x) = lam1 + (x - P(a)) p3(x)
    if len(p3):
        p2 = npoly.polymul(np.array([-wpa, 1.0]), p3)
    else:
        p2 = np.zeros(1, dtype=complex)
    if len(lam) > 1:
        p2 = npoly.polyadd(p2, np.array([lam[1]]))
    # q(x) = p1(x) (P(a) - x) + (P'(a)/2) p2(P(a));  p2(P(a)) = lam1
    qn = npoly.polymul(np.array([wpa, -1.0]), p1)
    if len(lam) > 1:
        qn = npoly.polyadd(qn, np.array([0.5 * dpa * lam[1]]))

    def realize(arr):
        return tuple(complex(v).real if abs(complex(v).imag) < 1e-13 * (1 + abs(complex(v)))
                     else complex(v) for v in arr)

    return Decomposition(p1=realize(p1), p2=realize(p2), p3=realize(p3),
                         qn=realize(qn), wpa=wpa, dpa=dpa, degree=n)


def reconstruction_residual(c: APolyCoeffs, dec: Decomposition, z: np.ndarray) -> float:
    """Pointwise |f - [p1(P) + b1 p2(P) + (P'(a)/2) p3(P)]| / scale."""
    from .basis import b1_eval

    z = np.asarray(z, dtype=complex)
    lat = c.lattice
    x = wp(z, lat)
    p1v = npoly.polyval(x, np.asarray(dec.p1, dtype=complex))
    p2v = npoly.polyval(x, np.asarray(dec.p2, dtype=complex))
    p3v = npoly.polyval(x, np.asarray(dec.p3, dtype=complex)) if len(dec.p3) else 0.0
    recon = p1v + b1_eval(z, c.anchor, lat) * p2v + 0.5 * dec.dpa * p3v
    direct = eval_apoly(c, z)
    scale = np.max(np.abs(direct))
    return float(np.max(np.abs(direct - recon)) / scale)


# ---------------------------------------------------------------------------
# pullback weights w_j^{+-}
# ---------------------------------------------------------------------------

def _branch_product(x: np.ndarray, lat: RectLattice) -> np.ndarray:
    return (lat.e1 - x) * (lat.e2 - x) * (x - lat.e3)


def _pullback_points(x: np.ndarray, lat: RectLattice) -> tuple:
    """z = P^{-1}(x) on the first half of gamma2 and its reflection -z."""
    x = np.asarray(x, dtype=float)
    key = (lat, x.size)
    cached = _PULLBACK_CACHE.get(key)
    if cached is not None and np.array_equal(cached[0], x):
        return cached[1], cached[2]
    lo = np.full(x.shape, 1e-15)
    hi = np.full(x.shape, 0.5)
    offset = 1j * lat.tau
    period = 2.0 * lat.omega1
    for _ in range(52):
        mid = 0.5 * (lo + hi)
        vals = wp(offset + period * mid, lat).real
        less = vals < x
        lo = np.where(less, mid, lo)
        hi = np.where(less, hi, mid)
    t = 0.5 * (lo + hi)
    zp = offset + period * t
    zm = offset + period * (1.0 - t)
    if len(_PULLBACK_CACHE) > 64:
        _PULLBACK_CACHE.clear()
    _PULLBACK_CACHE[key] = (x.copy(), zp, zm)
    return zp, zm


def w_pm(j: int, sign: str, x, W: WeightSpec, a: complex, lat: RectLattice):
    """The pullback weight w_j^{+-}(x) on (e3, e2).

    w_j^{+-} = s(x)^j / (P(a) - x) * [W(P^{-1}(x)) +- W(-P^{-1}(x))] / 2 with
    s(x) = sqrt(prod_l (x - e_l)) and the principal preimage on the first half
    of gamma2.
    """
    if j not in (-1, 0, 1):
        raise NonFinite(f"j must be in {{-1, 0, 1}}, got {j}")
    if sign not in ("+", "-"):
        raise NonFinite(f"sign must be '+' or '-', got {sign!r}")
    x = np.asarray(x, dtype=float)
    if np.any((x < lat.e3 - 1e-12) | (x > lat.e2 + 1e-12)):
        raise OutOfInterval(f"x outside [e3, e2] = [{lat.e3}, {lat.e2}]")
    wpa = complex(wp(a, lat)).real
    zp, zm = _pullback_points(x, lat)
    wp_val = np.asarray(weight_eval(W, zp, lat), dtype=complex).real
    wm_val = np.asarray(weight_eval(W, zm, lat), dtype=complex).real
    combo = 0.5 * (wp_val + wm_val) if sign == "+" else 0.5 * (wp_val - wm_val)
    s = np.sqrt(np.maximum(_branch_product(x, lat), 0.0))
    return s ** j / (wpa - x) * combo


def pullback_weight(j: int, sign: str, W: WeightSpec, a: complex, lat: RectLattice,
                    label: str = "") -> OprlWeight:
    """w_j^{+-} wrapped as an interval weight on (e3, e2)."""
    return OprlWeight(
        fn=lambda x: w_pm(j, sign, x, W, a, lat),
        lo=lat.e3, hi=lat.e2,
        exp_lo=0.5 * j, exp_hi=0.5 * j,
        label=label or f"w_{j}^{sign}",
    )


# ---------------------------------------------------------------------------
# the three condition families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MopReport:
    n: int
    residuals_1: tuple
    residuals_2: tuple
    residual_3: float
    scale_info: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        vals = list(self.residuals_1) + list(self.residuals_2) + [self.residual_3]
        return max(vals) if vals else 0.0

    def as_dict(self) -> dict:
        return {"n": self.n,
                "residuals_1": list(self.residuals_1),
                "residuals_2": list(self.residuals_2),
                "residual_3": self.residual_3,
                "max_residual": self.max_residual}


def _residual_integral(f: Callable, lo: float, hi: float,
                       tol: Tolerances, floor: float = 0.0) -> float:
    """|integral| / integral-of-|integrand| with dual-integrator agreement.

    Conditions whose integrand is identically zero up to roundoff (scale below
    the floor) are vacuous and report residual 0.
    """
    scale = interval_quad(lambda x: np.abs(f(x)), lo, hi, rtol=1e-8)
    if scale <= floor:
        return 0.0
    val = dual_interval_quad_scaled(f, lo, hi, scale, tol)
    return abs(val) / scale


def dual_interval_quad_scaled(f: Callable, lo: float, hi: float, scale: float,
                              tol: Tolerances) -> float:
    """Mapped-trapezoid vs adaptive integral with a scale-aware agreement test."""
    import scipy.integrate

    mapped = interval_quad(f, lo, hi, rtol=1e-9, scale=scale)
    adaptive, _ = scipy.integrate.quad(
        lambda x: float(f(np.asarray([x]))[0]), lo, hi, epsabs=1e-10 * scale,
        epsrel=1e-9, limit=400)
    if abs(mapped - adaptive) > tol.dual_quad_agreement * (scale + abs(mapped)):
        raise NonFinite(
            f"interval integrators disagree: mapped={mapped!r} adaptive={adaptive!r} "
            f"(scale {scale:.3e})")
    return mapped


class _PullbackTable:
    """Cached samples of the three pullback weights on repeated x grids.

    interval_quad regenerates identical cos-mapped grids per node count, so
    keying on the grid size (with a spot check) lets every condition integral
    of a report share one weight evaluation per level.
    """

    def __init__(self, W: WeightSpec, a: complex, lat: RectLattice):
        self.W, self.a, self.lat = W, a, lat
        self.wpa = complex(wp(a, lat)).real
        self.cache: dict = {}

    def values(self, x: np.ndarray) -> tuple:
        key = x.size
        hit = self.cache.get(key)
        if hit is not None and hit[0][0] == x[0] and hit[0][-1] == x[-1]:
            return hit[1]
        zp, zm = _pullback_points(x, self.lat)
        wp_val = np.asarray(weight_eval(self.W, zp, self.lat), dtype=complex).real
        wm_val = np.asarray(weight_eval(self.W, zm, self.lat), dtype=complex).real
        even = 0.5 * (wp_val + wm_val)
        odd = 0.5 * (wp_val - wm_val)
        s = np.sqrt(np.maximum(_branch_product(x, self.lat), 0.0))
        den = self.wpa - x
        vals = (even / (s * den), odd / den, s * even / den)  # w_-1^+, w_0^-, w_1^+
        self.cache[key] = (x.copy(), vals)
        return vals


def mop_residuals(fam: EopFamily, n: int, tol: Optional[Tolerances] = None) -> MopReport:
    """Residuals of the three interval orthogonality condition families.

    Condition ranges follow the derivation: family 1 over 0 <= l < m + k/2
    (integer reading: l <= m - 1 + k), family 2 over l <= m - 2, and the
    single mixed condition 3 (implied only for n >= 2, where b_1 belongs to
    the orthogonality space).  The mapped-trapezoid value is cross-checked by
    an adaptive integral in the contour parameter (which needs no P-inverse).
    """
    tol = tol or default_tolerances()
    if Contour(fam.anchor.gamma) is not Contour.GAMMA2:
        raise NonFinite("the decomposition conditions apply to gamma2 orthogonality")
    lat = fam.lattice
    dec = decompose(fam.monic_coeffs(n))
    m, k = n // 2, n % 2
    W = fam.weight
    table = _PullbackTable(W, fam.anchor.a, lat)
    wpa, dpa = dec.wpa, dec.dpa
    period = 2.0 * lat.omega1

    def qv(x):
        return dec.eval_q(x)

    def p2v(x):
        return npoly.polyval(np.asarray(x, dtype=float), np.asarray(dec.p2))

    def coeff_pair(which, x, wm1, w0m, w1p):
        """(coefficient of each weight) for the named condition family."""
        if which[0] == 1:
            l = which[1]
            return (qv(x) * wm1 + p2v(x) * w0m) * x ** l
        if which[0] == 2:
            l = which[1]
            return (qv(x) * w0m + p2v(x) * w1p) * x ** l
        return (qv(x) * (w0m + 0.5 * dpa * wm1)
                + p2v(x) * (w1p + 0.5 * dpa * w0m)) / (wpa - x)

    def mapped(which, absolute=False, rtol=1e-9, scale=1.0):
        def f(x):
            wm1, w0m, w1p = table.values(x)
            vals = coeff_pair(which, x, wm1, w0m, w1p)
            return np.abs(vals) if absolute else vals

        return interval_quad(f, lat.e3, lat.e2, rtol=rtol, scale=scale)

    def adaptive(which):
        # substitute x = P(z(t)) on the first half of gamma2: dx = P' * period dt,
        # s(x) = P'/2 there, and the two preimages are z(t), z(1 - t)
        import scipy.integrate

        def f(t):
            z = 1j * lat.tau + period * t
            x = wp(z, lat).real
            dp = wp_prime(z, lat).real
            wz = complex(weight_eval(W, np.asarray([z]), lat)[0]).real
            wzm = complex(weight_eval(W, np.asarray([1j * lat.tau + period * (1 - t)]),
                                      lat)[0]).real
            even, odd = 0.5 * (wz + wzm), 0.5 * (wz - wzm)
            s = 0.5 * dp
            den = wpa - x
            wm1, w0m, w1p = even / (s * den), odd / den, s * even / den
            return float(coeff_pair(which, np.asarray([x]), wm1, w0m, w1p)[0] * dp * period)

        val, _ = scipy.integrate.quad(f, 1e-9, 0.5 - 1e-9, epsabs=1e-11, epsrel=1e-9,
                                      limit=300)
        return val

    def residual(which, floor):
        scale = mapped(which, absolute=True, rtol=1e-8)
        if scale <= floor:
            return 0.0
        val = mapped(which, rtol=1e-9, scale=scale)
        check = adaptive(which)
        if abs(val - check) > tol.dual_quad_agreement * (scale + abs(val)):
            raise NonFinite(
                f"condition {which}: integrators disagree (mapped={val!r}, "
                f"adaptive={check!r}, scale={scale:.3e})")
        return abs(val) / scale

    # reference magnitude of the whole condition system; conditions whose own
    # scale sits at roundoff relative to it are identically zero (e.g. the
    # q_n == 0 branch with an even weight) and count as vacuously satisfied
    def ref_f(x):
        wm1, w0m, w1p = table.values(x)
        return (np.abs(qv(x)) + np.abs(p2v(x))) * (np.abs(wm1) + np.abs(w0m) + np.abs(w1p))

    ref = interval_quad(ref_f, lat.e3, lat.e2, rtol=1e-6)
    floor = 1e-12 * max(ref, 1e-300)

    res1 = [residual((1, l), floor) for l in range(m + k)]
    res2 = [residual((2, l), floor) for l in range(m - 1)]
    res3 = residual((3,), floor) if n >= 2 else 0.0
    return MopReport(n=n, residuals_1=tuple(res1), residuals_2=tuple(res2),
                     residual_3=res3,
                     scale_info={"reference_scale": ref, "condition_3_applies": n >= 2})


# ---------------------------------------------------------------------------
# Cauchy transforms and the explicit reconstruction
# ---------------------------------------------------------------------------

def cauchy_transform(p: MonicPoly, w: OprlWeight, wpa: float,
                     tol: Optional[Tolerances] = None) -> float:
    """int p(x) w(x) / (wpa - x) dx over the weight's interval (wpa > e2)."""
    tol = tol or default_tolerances()
    if wpa <= w.hi:
        raise NonFinite(f"P(a) = {wpa} must exceed the interval top {w.hi}")
    return dual_interval_quad(lambda x: p(x) * w(x) / (wpa - x), w.lo, w.hi, tol)


def cauchy_transforms(w: OprlWeight, w_hat: OprlWeight, m: int, a: complex,
                      lat: RectLattice, tol: Optional[Tolerances] = None) -> tuple:
    """(T_m, T_hat_m) for the monic families of w and w_hat at P(a)."""
    wpa = complex(wp(a, lat)).real
    pm = monic_oprl_family(w, max(m, 0))[m]
    pm_hat = monic_oprl_family(w_hat, max(m, 0))[m]
    return (cauchy_transform(pm, w, wpa, tol), cauchy_transform(pm_hat, w_hat, wpa, tol))


@dataclass(frozen=True)
class GeneralLiftData:
    coeffs: APolyCoeffs
    kappa: float
    nu: float
    c_n: float
    closed_form_c: Optional[float]
    qn: tuple
    p2: tuple

    def as_dict(self) -> dict:
        return {"kappa": self.kappa, "nu": self.nu, "c_n": self.c_n,
                "closed_form_c": self.closed_form_c,
                "qn": list(self.qn), "p2": list(self.p2)}


def general_lift(w: OprlWeight, a: complex, lat: RectLattice, n: int,
                 tol: Optional[Tolerances] = None) -> GeneralLiftData:
    """Degree-n monic member of the general-lift weight, from interval data only.

    Builds q_n and p2 from the monic families of w and w_hat plus their Cauchy
    transforms, solving the two linear consistency conditions (the value of
    q_n at P(a) and the mixed integral condition); p1 and p3 then come from
    exact polynomial division.  The closed-form constant expression is also
    evaluated (where defined) as a cross-check.
    """
    tol = tol or default_tolerances()
    if not (abs(w.lo - lat.e3) < 1e-9 and abs(w.hi - lat.e2) < 1e-9):
        raise NonFinite(f"weight interval must be [e3, e2] = [{lat.e3}, {lat.e2}]")
    anchor = anchor_config(a, Contour.GAMMA2, lat)
    a = anchor.a
    wpa = complex(wp(a, lat)).real
    dpa = _half_period_snap(wp_prime(a, lat), wpa)
    m, k = n // 2, n % 2
    w_hat = christoffel_modification(w, lat)

    if n == 0:
        coeffs = APolyCoeffs((1.0,), anchor, lat)
        return GeneralLiftData(coeffs, 0.0, 0.0, 0.0, None, (wpa, -1.0), (0.0,))

    pw = monic_oprl_family(w, m + 2)
    pw_hat = monic_oprl_family(w_hat, max(m, 1))
    t_vals = {j: cauchy_transform(pw[j], w, wpa, tol) for j in range(m + 2)}
    t_hat = {j: cauchy_transform(pw_hat[j], w_hat, wpa, tol) for j in range(max(m, 1) + 1)}

    closed_c = None
    if k == 0:
        if m == 0:
            raise NonFinite("unreachable: n = 0 handled above")
        p_m = pw[m](wpa)
        p_m1 = pw[m + 1](wpa)
        ph_m1 = pw_hat[m - 1](wpa)
        mat = np.array([[p_m, -0.5 * dpa * ph_m1],
                        [0.5 * dpa * t_vals[m], t_hat[m - 1]]])
        rhs = np.array([p_m1, 0.5 * dpa * t_vals[m + 1]])
        det = np.linalg.det(mat)
        scale = max(abs(mat).max(), 1e-300)
        if abs(det) < 1e-12 * scale**2:
            raise DegenerateDenominator("k=0 constant system", det, scale**2)
        kappa, nu = np.linalg.solve(mat, rhs)
        q_poly = npoly.polyadd(-np.asarray(pw[m + 1].coeffs), kappa * np.asarray(pw[m].coeffs))
        p2_poly = nu * np.asarray(pw_hat[m - 1].coeffs)
        denom = (0.25 * dpa**2 * t_vals[m] / p_m + t_hat[m - 1] / ph_m1)
        if abs(denom) > 1e-12:
            closed_c = 0.5 * dpa * (t_vals[m + 1] - p_m1 * t_vals[m] / p_m) / denom
    else:
        p_m1 = pw[m + 1](wpa)
        ph_m = pw_hat[m](wpa)
        if m == 0:
            kappa = 0.5 * dpa * 1.0 / p_m1
            nu = 0.0
            q_poly = kappa * np.asarray(pw[1].coeffs)
            p2_poly = np.asarray(pw_hat[0].coeffs)
        else:
            ph_m1 = pw_hat[m - 1](wpa)
            mat = np.array([[p_m1, -0.5 * dpa * ph_m1],
                            [0.5 * dpa * t_vals[m + 1], t_hat[m - 1]]])
            rhs = np.array([0.5 * dpa * ph_m, -t_hat[m]])
            det = np.linalg.det(mat)
            scale = max(abs(mat).max(), 1e-300)
            if abs(det) < 1e-12 * scale**2:
                raise DegenerateDenominator("k=1 constant system", det, scale**2)
            kappa, nu = np.linalg.solve(mat, rhs)
            q_poly = kappa * np.asarray(pw[m + 1].coeffs)
            p2_poly = npoly.polyadd(np.asarray(pw_hat[m].coeffs),
                                    nu * np.asarray(pw_hat[m - 1].coeffs))
            denom = (0.25 * dpa**2 * t_vals[m + 1] / p_m1 + t_hat[m - 1] / ph_m1)
            if abs(denom) > 1e-12:
                closed_c = (ph_m * t_hat[m - 1] / ph_m1 - t_hat[m]) / denom

    c_n = float(npoly.polyval(wpa, p2_poly))
    # p1 = (q - (P'(a)/2) c_n) / (P(a) - x), exact by the value identity
    num = npoly.polyadd(q_poly, np.array([-0.5 * dpa * c_n]))
    p1_poly, rem = npoly.polydiv(num, np.array([wpa, -1.0]))
    if len(rem) and abs(rem[0]) > 1e-8 * max(1.0, np.abs(num).max()):
        raise DegenerateDenominator("p1 division remainder", rem[0], np.abs(num).max())
    # p3 = (p2 - c_n) / (x - P(a))
    if len(p2_poly) > 1:
        p3_poly, rem3 = npoly.polydiv(npoly.polyadd(p2_poly, np.array([-c_n])),
                                      np.array([-wpa, 1.0]))
        if len(rem3) and abs(rem3[0]) > 1e-8 * max(1.0, np.abs(p2_poly).max()):
            raise DegenerateDenominator("p3 division remainder", rem3[0],
                                        np.abs(p2_poly).max())
    else:
        p3_poly = np.zeros(1)

    # assemble lambda coefficients: even from p1, lam1 = c_n, odd from p3
    lam = np.zeros(n + 1, dtype=complex)
    for i, cval in enumerate(p1_poly):
        if 2 * i <= n:
            lam[2 * i] += cval
    if n >= 1:
        lam[1] += c_n
        for l, cval in enumerate(p3_poly):
            if 2 * l + 3 <= n:
                lam[2 * l + 3] += cval
    coeffs = APolyCoeffs(tuple(lam), anchor, lat)
    return GeneralLiftData(coeffs=coeffs, kappa=float(np.real(kappa)),
                           nu=float(np.real(nu)), c_n=c_n,
                           closed_form_c=closed_c,
                           qn=tuple(float(v) for v in q_poly),
                           p2=tuple(float(v) for v in p2_poly))


# ---------------------------------------------------------------------------
# even-weight two-term expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvenWeightFit:
    n: int
    kappa: float
    nu: float
    c_n: float
    q_residual: float
    p2_residual: float
    q_identically_zero: bool = False
    p2_identically_zero: bool = False

    def as_dict(self) -> dict:
        return {"n": self.n, "kappa": self.kappa, "nu": self.nu, "c_n": self.c_n,
                "q_fit_residual": self.q_residual, "p2_fit_residual": self.p2_residual,
                "q_identically_zero": self.q_identically_zero,
                "p2_identically_zero": self.p2_identically_zero}


def _fit_combination(target: np.ndarray, polys: list) -> tuple:
    """Least-squares coefficients expressing target in the span of polys."""
    size = max([len(target)] + [p.size for p in polys])
    mat = np.zeros((size, len(polys)))
    for i, p in enumerate(polys):
        mat[: p.size, i] = p
    vec = np.zeros(size)
    vec[: len(target)] = target
    sol, *_ = np.linalg.lstsq(mat, vec, rcond=None)
    resid = float(np.max(np.abs(mat @ sol - vec)))
    return sol, resid


def even_weight_coeffs(fam: EopFamily, n: int,
                       tol: Optional[Tolerances] = None) -> EvenWeightFit:
    """Fit q_n and p2 of an even-weight family to the two-term expressions.

    q_n = -delta_{k,0} P_{m+1}(., w_-1^+) + kappa_n P_{m+k}(., w_-1^+) and
    p2 = delta_{k,1} P_m(., w_1^+) + nu_n P_{m-1}(., w_1^+); the fit residuals
    certify the statement (scale-relative).
    """
    tol = tol or default_tolerances()
    if not fam.weight.even:
        raise NonFinite("the two-term expressions need an even weight")
    lat = fam.lattice
    a = fam.anchor.a
    dec = decompose(fam.monic_coeffs(n))
    m, k = n // 2, n % 2
    wm1 = pullback_weight(-1, "+", fam.weight, a, lat)
    w1p = pullback_weight(1, "+", fam.weight, a, lat)

    family_scale = max(1.0, float(np.abs(fam.monic_coeffs(n).coeff_array).max()))
    zero_floor = 1e-10 * family_scale

    q_target = np.asarray(dec.qn, dtype=float)
    q_zero = bool(np.abs(q_target).max() < zero_floor) if len(q_target) else True
    pw = monic_oprl_family(wm1, m + 1)
    if q_zero:
        # the degenerate branch: q_n vanishes identically (deg below m+1)
        kappa, q_resid = 0.0, 0.0
    elif k == 0:
        base = np.asarray(pw[m + 1].coeffs)
        target = q_target + base  # q + P_{m+1} = kappa P_m
        sol, resid = _fit_combination(target, [np.asarray(pw[m].coeffs)])
        kappa = float(sol[0])
        q_resid = resid / np.abs(q_target).max()
    else:
        sol, resid = _fit_combination(q_target, [np.asarray(pw[m + 1].coeffs)])
        kappa = float(sol[0])
        q_resid = resid / np.abs(q_target).max()

    p2_target = np.asarray(dec.p2, dtype=float)
    p2_zero = bool(np.abs(p2_target).max() < zero_floor)
    if p2_zero or m == 0:
        nu = 0.0
        if k == 1 and not p2_zero:
            p2_resid = float(abs(p2_target[0] - 1.0))
        else:
            p2_resid = 0.0
    else:
        pw_hat = monic_oprl_family(w1p, m)
        p2_scale = np.abs(p2_target).max()
        if k == 0:
            sol2, resid2 = _fit_combination(p2_target, [np.asarray(pw_hat[m - 1].coeffs)])
            nu = float(sol2[0])
        else:
            target2 = p2_target - np.asarray(pw_hat[m].coeffs)
            sol2, resid2 = _fit_combination(target2, [np.asarray(pw_hat[m - 1].coeffs)])
            nu = float(sol2[0])
        p2_resid = resid2 / p2_scale
    c_n = float(npoly.polyval(dec.wpa, p2_target)) if len(p2_target) else 0.0
    return EvenWeightFit(n=n, kappa=kappa, nu=nu, c_n=c_n, q_residual=q_resid,
                         p2_residual=p2_resid, q_identically_zero=q_zero,
                         p2_identically_zero=p2_zero)


def general_lift_family(w: OprlWeight, a: complex, lat: RectLattice, max_n: int,
                        grid=None, tol: Optional[Tolerances] = None) -> EopFamily:
    """Moment-built family for the general-lift weight (for cross-checks)."""
    anchor = anchor_config(a, Contour.GAMMA2, lat)
    spec = general_lift_weight(w.fn, anchor.a, label=f"general_lift[{w.label}]")
    return build_family(spec, anchor, lat, max_n, grid=grid)
