"""Weights on torus contours and certified contour integrals.

Integrals run over one period of gamma1 or gamma2 in the parametrization
z(t) = offset + 2*omega1*t, t in [0, 1), with the periodic trapezoid rule and
node doubling until two successive values agree to the requested relative
tolerance.  gamma1 passes through the pole at 0, so its integrals use an
upward-indented representative z = i*delta + 2*omega1*t (the contour is freely
deformable off the poles; the up/down discrepancy is reported as a diagnostic,
never assumed zero).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .basis import AnchorConfig, Contour, b1_eval, basis_matrix
from .errors import (
    EvaluationFailure,
    NonFinite,
    ParameterOutOfRange,
    ToleranceNotMet,
)
from .lattice import RectLattice, wp, wp_pair, wp_prime
from .tolerances import Tolerances, default_tolerances


class WeightKind(str, enum.Enum):
    EXAMPLE_W = "example_w"
    EXAMPLE_V = "example_v"
    LIFTED_EVEN = "lifted_even"
    GENERAL_LIFT = "general_lift"
    USER = "user"


@dataclass(frozen=True)
class WeightSpec:
    """A weight on a torus contour.

    ``fn`` is the x-space evaluator for the lifted kinds (a positive weight on
    (e3, e2)) or the z-space evaluator for USER weights.
    """

    kind: WeightKind
    alpha: float = 0.0
    beta: float = 0.0
    fn: Optional[Callable] = None
    lift_anchor: complex = 0.0  # anchor a for GENERAL_LIFT
    real_positive: bool = False
    even: bool = False
    endpoint_degenerate: bool = False
    label: str = ""

    def describe(self) -> dict:
        out = {"kind": self.kind.value, "label": self.label or self.kind.value}
        if self.kind in (WeightKind.EXAMPLE_W, WeightKind.EXAMPLE_V):
            out["alpha"] = self.alpha
            out["beta"] = self.beta
        if self.kind is WeightKind.GENERAL_LIFT:
            out["lift_anchor"] = [self.lift_anchor.real, self.lift_anchor.imag]
        out["real_positive"] = self.real_positive
        out["even"] = self.even
        return out


def example_w_weight(alpha: float, beta: float) -> WeightSpec:
    """|P|^(a+1/2) (P+1)^(b+1/2) (1-P)^(1/2) on gamma2 of the square lattice."""
    if alpha <= -1.0 or beta <= -1.0:
        raise ParameterOutOfRange(f"example_w needs alpha, beta > -1, got ({alpha}, {beta})")
    return WeightSpec(
        kind=WeightKind.EXAMPLE_W,
        alpha=float(alpha),
        beta=float(beta),
        real_positive=True,
        even=True,
        endpoint_degenerate=(alpha < -0.5 or beta < -0.5),
        label=f"example_w(alpha={alpha}, beta={beta})",
    )


def example_v_weight(alpha: float, beta: float) -> WeightSpec:
    """|P|^(a-1/2) (P+1)^(b-1/2) (1-P)^(3/2) on gamma2 of the square lattice."""
    if alpha <= 0.0 or beta <= 0.0:
        raise ParameterOutOfRange(f"example_v needs alpha, beta > 0, got ({alpha}, {beta})")
    return WeightSpec(
        kind=WeightKind.EXAMPLE_V,
        alpha=float(alpha),
        beta=float(beta),
        real_positive=True,
        even=True,
        endpoint_degenerate=(alpha < 0.5 or beta < 0.5),
        label=f"example_v(alpha={alpha}, beta={beta})",
    )


def lifted_even_weight(w_fn: Callable, label: str = "lifted_even") -> WeightSpec:
    """W(z) = w(P(z)) * |P'(z)| / 2, the even lift of an interval weight."""
    return WeightSpec(
        kind=WeightKind.LIFTED_EVEN, fn=w_fn, real_positive=True, even=True, label=label
    )


def general_lift_weight(w_fn: Callable, a: complex, label: str = "general_lift") -> WeightSpec:
    """W(z) = (P(a) - P(z)) * w(P(z)) * |P'(z)| / 2 for an anchor a on gamma1."""
    return WeightSpec(
        kind=WeightKind.GENERAL_LIFT,
        fn=w_fn,
        lift_anchor=complex(a),
        real_positive=True,
        even=True,
        label=label,
    )


def user_weight(fn: Callable, real_positive: bool = False, even: bool = False,
                label: str = "user") -> WeightSpec:
    """Arbitrary evaluator fn(z, lat) on the contour."""
    return WeightSpec(
        kind=WeightKind.USER, fn=fn, real_positive=real_positive, even=even, label=label
    )


def inverse_power_weight(p: int, label: str = "") -> WeightSpec:
    """W(z) = (P(z) - e3)^(-p): positive and analytic on gamma1, vanishing at 0.

    With p >= (largest basis index)/2 + 1 every gamma1 bimoment integrand is
    analytic in the strip |Im z| < tau, so the indented integral equals the
    on-contour one exactly.
    """
    if p < 1 or p != int(p):
        raise ParameterOutOfRange(f"inverse power weight needs integer p >= 1, got {p}")
    p = int(p)

    def fn(z, lat):
        return (wp(z, lat) - lat.e3) ** (-p)

    return WeightSpec(
        kind=WeightKind.USER, fn=fn, real_positive=True, even=True,
        label=label or f"inverse_power(p={p})",
    )


def oddly_perturbed_weight(base: WeightSpec, eps: float, anchor: AnchorConfig,
                           label: str = "") -> WeightSpec:
    """base(z) * (1 + eps * b1(z)): real but no longer even for a = omega1."""

    def fn(z, lat):
        return weight_eval(base, z, lat) * (1.0 + eps * b1_eval(z, anchor, lat))

    return WeightSpec(
        kind=WeightKind.USER, fn=fn, real_positive=True, even=False,
        endpoint_degenerate=base.endpoint_degenerate,
        label=label or f"{base.label} * (1 + {eps} * b1)",
    )


def _real_wp_on_contour(z, lat: RectLattice) -> np.ndarray:
    p = wp(np.asarray(z, dtype=complex), lat)
    return np.asarray(p).real


def _weight_from_values(W: WeightSpec, z: np.ndarray, lat: RectLattice,
                        p: np.ndarray, dp: np.ndarray):
    """weight_eval with precomputed P, P' (builtin kinds avoid re-evaluating)."""
    if W.kind is WeightKind.EXAMPLE_W:
        x = _guard_roundoff(p.real, -1.0, 0.0)
        return np.abs(x) ** (W.alpha + 0.5) * (x + 1.0) ** (W.beta + 0.5) * (1.0 - x) ** 0.5
    if W.kind is WeightKind.EXAMPLE_V:
        x = _guard_roundoff(p.real, -1.0, 0.0)
        return np.abs(x) ** (W.alpha - 0.5) * (x + 1.0) ** (W.beta - 0.5) * (1.0 - x) ** 1.5
    if W.kind is WeightKind.LIFTED_EVEN:
        x = np.clip(p.real, lat.e3, lat.e2)
        return 0.5 * W.fn(x) * np.abs(dp)
    if W.kind is WeightKind.GENERAL_LIFT:
        x = np.clip(p.real, lat.e3, lat.e2)
        pa = wp(W.lift_anchor, lat).real
        return (pa - x) * W.fn(x) * 0.5 * np.abs(dp)
    return W.fn(z, lat)


def _guard_roundoff(p: np.ndarray, lo: float, hi: float, slack: float = 1e-12) -> np.ndarray:
    """Clamp values that left [lo, hi] by roundoff only; leave real excursions."""
    p = np.where((p > hi) & (p < hi + slack), hi, p)
    return np.where((p < lo) & (p > lo - slack), lo, p)


def weight_eval(W: WeightSpec, z, lat: RectLattice):
    """Evaluate the weight at points of the contour (real-valued kinds return real)."""
    z = np.asarray(z, dtype=complex)
    if W.kind is WeightKind.EXAMPLE_W:
        p = _guard_roundoff(_real_wp_on_contour(z, lat), -1.0, 0.0)
        return np.abs(p) ** (W.alpha + 0.5) * (p + 1.0) ** (W.beta + 0.5) * (1.0 - p) ** 0.5
    if W.kind is WeightKind.EXAMPLE_V:
        p = _guard_roundoff(_real_wp_on_contour(z, lat), -1.0, 0.0)
        return np.abs(p) ** (W.alpha - 0.5) * (p + 1.0) ** (W.beta - 0.5) * (1.0 - p) ** 1.5
    if W.kind is WeightKind.LIFTED_EVEN:
        p = _real_wp_on_contour(z, lat)
        x = np.clip(p, lat.e3, lat.e2)
        return 0.5 * W.fn(x) * np.abs(wp_prime(z, lat))
    if W.kind is WeightKind.GENERAL_LIFT:
        p = _real_wp_on_contour(z, lat)
        x = np.clip(p, lat.e3, lat.e2)
        pa = wp(W.lift_anchor, lat).real
        return (pa - x) * W.fn(x) * 0.5 * np.abs(wp_prime(z, lat))
    return W.fn(z, lat)


def check_positivity(W: WeightSpec, grid: "ContourGrid", lat: RectLattice,
                     imag_tol: float = 1e-10, node_skip: float = 1e-8) -> None:
    """Sampled real-positivity check; skips nodes near singular parameters."""
    t = grid.params()
    vals = np.asarray(weight_eval(W, grid.nodes(lat), lat), dtype=complex)
    scale = np.abs(vals).max()
    if scale == 0.0:
        raise ParameterOutOfRange("weight vanishes identically on the sampled grid")
    if np.any(np.abs(vals.imag) > imag_tol * (1.0 + np.abs(vals))):
        raise ParameterOutOfRange(f"{W.label}: weight is not real on the contour")
    # e-points of gamma2 sit at t = 0 and t = 1/2; allow zeros there
    singular = (np.abs(t) < node_skip) | (np.abs(t - 0.5) < node_skip) | (np.abs(t - 1.0) < node_skip)
    if np.any(vals.real[~singular] <= 0.0):
        raise ParameterOutOfRange(f"{W.label}: weight is not positive on the contour")


# ---------------------------------------------------------------------------
# grids and integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourGrid:
    """Equispaced nodes on one period of a contour."""

    gamma: Contour
    n: int = 64
    delta: float = 0.0   # upward indentation, used only for gamma1
    phase: float = 0.0   # node offset in units of the step (0 or 0.5)

    def __post_init__(self):
        if self.n < 64 or self.n & (self.n - 1):
            raise NonFinite(f"node count must be a power of two >= 64, got {self.n}")

    def offset(self, lat: RectLattice) -> complex:
        if self.gamma is Contour.GAMMA2:
            return 1j * lat.tau
        return 1j * self.delta

    def params(self) -> np.ndarray:
        return (np.arange(self.n) + self.phase) / self.n

    def nodes(self, lat: RectLattice) -> np.ndarray:
        return self.offset(lat) + 2.0 * lat.omega1 * self.params()

    def as_dict(self) -> dict:
        return {"gamma": self.gamma.value, "N": self.n, "delta": self.delta,
                "phase": self.phase}


def contour_grid(gamma, lat: RectLattice, n: int = 64, delta: Optional[float] = None,
                 phase: float = 0.0) -> ContourGrid:
    gamma = Contour(gamma)
    if gamma is Contour.GAMMA1:
        delta = lat.tau / 10.0 if delta is None else float(delta)
    else:
        delta = 0.0
    return ContourGrid(gamma=gamma, n=n, delta=delta, phase=phase)


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    est_error: float
    n: int

    def as_dict(self) -> dict:
        return {"N": self.n, "value": [self.value.real, self.value.imag],
                "est_error": self.est_error}


def _eval_checked(f: Callable, z: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(z), dtype=complex)
    if vals.shape != z.shape:
        vals = np.broadcast_to(vals, z.shape)
    if not np.all(np.isfinite(vals)):
        raise EvaluationFailure("integrand returned non-finite values")
    return vals


def contour_integral(f: Callable, grid: ContourGrid, lat: RectLattice,
                     rtol: Optional[float] = None, cap: Optional[int] = None,
                     tol: Optional[Tolerances] = None) -> IntegralResult:
    """Periodic trapezoid with node doubling: int f(z(t)) * 2*omega1 dt.

    Doubles the node count until two successive values differ by less than
    rtol * (1 + |value|), reusing previous nodes when the grid nests
    (phase = 0).  Raises ToleranceNotMet at the cap.
    """
    tol = tol or default_tolerances()
    rtol = tol.quad_rtol if rtol is None else rtol
    cap = cap or tol.quad_cap
    period = 2.0 * lat.omega1
    offset = grid.offset(lat)

    n = grid.n
    t = (np.arange(n) + grid.phase) / n
    total = np.sum(_eval_checked(f, offset + period * t))
    prev_value = None
    while True:
        value = total * period / n
        if prev_value is not None:
            err = abs(value - prev_value)
            if err <= rtol * (1.0 + abs(value)):
                return IntegralResult(value=complex(value), est_error=float(err), n=n)
            if n >= cap:
                raise ToleranceNotMet(complex(value), complex(prev_value), rtol, n)
        elif n >= cap:
            raise ToleranceNotMet(complex(value), complex(value), rtol, n)
        prev_value = value
        if grid.phase == 0.0:
            t_new = (np.arange(n) + 0.5) / n
            total = total + np.sum(_eval_checked(f, offset + period * t_new))
            n *= 2
        else:
            n *= 2
            t = (np.arange(n) + grid.phase) / n
            total = np.sum(_eval_checked(f, offset + period * t))


def bimoment(i: int, j: int, W: WeightSpec, anchor: AnchorConfig, grid: ContourGrid,
             lat: RectLattice, rtol: Optional[float] = None,
             cap: Optional[int] = None) -> IntegralResult:
    """mu_{i,j} = int b_i b_j W along the grid's contour."""
    jmax = max(i, j)

    def f(z):
        mat = basis_matrix(jmax, z, anchor, lat)
        return mat[i] * mat[j] * np.asarray(weight_eval(W, z, lat), dtype=complex)

    if cap is None and W.endpoint_degenerate:
        cap = default_tolerances().quad_cap_degenerate
    return contour_integral(f, grid, lat, rtol=rtol, cap=cap)


@dataclass(frozen=True)
class MomentMatrixResult:
    mu: np.ndarray
    n: int
    est_error: float
    real_config: bool


def moment_matrix(size: int, W: WeightSpec, anchor: AnchorConfig, grid: ContourGrid,
                  lat: RectLattice, rtol: Optional[float] = None,
                  cap: Optional[int] = None, chunk: int = 1 << 15) -> MomentMatrixResult:
    """All bimoments mu_{i,j}, i,j < size, on one shared doubling grid.

    The whole matrix is accumulated per doubling level (basis values are
    evaluated in chunks to bound memory) and convergence is judged on the
    worst entry.  Entries are exactly symmetric by construction.
    """
    tol = default_tolerances()
    rtol = tol.quad_rtol if rtol is None else rtol
    if cap is None:
        cap = tol.quad_cap_degenerate if W.endpoint_degenerate else tol.quad_cap
    period = 2.0 * lat.omega1
    offset = grid.offset(lat)
    k = size - 1

    def level_sum(tvals: np.ndarray) -> np.ndarray:
        acc = np.zeros((size, size), dtype=complex)
        for start in range(0, tvals.size, chunk):
            z = offset + period * tvals[start:start + chunk]
            values = wp_pair(z, lat)
            b = basis_matrix(k, z, anchor, lat, values=values)
            wv = np.asarray(_weight_from_values(W, z, lat, *values), dtype=complex)
            if not (np.all(np.isfinite(b)) and np.all(np.isfinite(wv))):
                raise EvaluationFailure("moment integrand returned non-finite values")
            acc += (b * wv) @ b.T
        return acc

    n = grid.n
    total = level_sum((np.arange(n) + grid.phase) / n)
    prev = None
    while True:
        mu = total * period / n
        if prev is not None:
            err = float(np.max(np.abs(mu - prev) / (1.0 + np.abs(mu))))
            if err <= rtol:
                break
            if n >= cap:
                worst = np.unravel_index(np.argmax(np.abs(mu - prev) / (1.0 + np.abs(mu))),
                                         mu.shape)
                raise ToleranceNotMet(complex(mu[worst]), complex(prev[worst]), rtol, n)
        prev = mu
        if grid.phase == 0.0:
            tnew = (np.arange(n) + 0.5) / n
            total = total + level_sum(tnew)
            n *= 2
        else:
            n *= 2
            total = level_sum((np.arange(n) + grid.phase) / n)

    mu = 0.5 * (mu + mu.T)  # symmetric up to roundoff already; make it exact
    real_config = bool(
        W.real_positive
        and np.all(np.abs(mu.imag) <= tol.reality_tol * (1.0 + np.abs(mu)))
    )
    return MomentMatrixResult(mu=mu, n=n, est_error=err, real_config=real_config)


def gamma1_updown_discrepancy(W: WeightSpec, anchor: AnchorConfig, lat: RectLattice,
                              i: int = 0, j: int = 0, n: int = 256,
                              delta: Optional[float] = None) -> float:
    """|up-indented - down-indented| bimoment on gamma1 (deformation diagnostic)."""
    delta = lat.tau / 10.0 if delta is None else delta
    up = bimoment(i, j, W, anchor, ContourGrid(Contour.GAMMA1, n=n, delta=delta), lat)
    down = bimoment(i, j, W, anchor, ContourGrid(Contour.GAMMA1, n=n, delta=-delta), lat)
    return abs(up.value - down.value)
