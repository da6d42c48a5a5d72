"""Construction of orthogonal a-polynomial families from bimoments.

The monic family F_n solves the n x n linear system of orthogonality
constraints (LU with partial pivoting); the determinant expansion of the
moment matrix is kept only as a small-n test oracle.  The orthonormal family
is f_n = F_n * sqrt(D_n / D_{n+1}) with D_k the leading k x k minor of the
bimoment matrix (D_0 = 1), the branch of the square root chosen positive for
positive real ratios and otherwise principal with Re(leading coefficient)
normalized >= 0.

Multiplication by P maps the basis to itself:

    P * b_0 = b_2
    P * b_1 = -(P'(a)/2) b_0 + P(a) b_1 + b_3
    P * b_j = b_{j+2}          (j >= 2)

so every recurrence / kernel coefficient integral is a bilinear contraction
of the bimoment matrix; no additional quadrature is needed after the moment
pass.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .basis import (
    AnchorConfig,
    APolyCoeffs,
    Contour,
    basis_matrix,
    eval_apoly,
    eval_apoly_deriv,
)
from .errors import DegenerateMinor, NeedsDerivative, NonFinite, PoleAt
from .lattice import RectLattice, _reduce_centered, wp, wp_pair, wp_prime
from .quadrature import (
    ContourGrid,
    MomentMatrixResult,
    WeightSpec,
    contour_grid,
    moment_matrix,
    weight_eval,
)
from .tolerances import Tolerances, default_tolerances


def wp_multiplication_matrix(size: int, anchor: AnchorConfig, lat: RectLattice) -> np.ndarray:
    """Matrix M with coeffs(P * f) = M @ coeffs(f) in the basis {b_j}."""
    m = np.zeros((size, size), dtype=complex)
    if size > 2:
        m[2, 0] = 1.0
    if size > 1:
        pa = wp(anchor.a, lat)
        dpa = wp_prime(anchor.a, lat)
        m[0, 1] = -0.5 * dpa
        m[1, 1] = pa
        if size > 3:
            m[3, 1] = 1.0
    for j in range(2, size - 2):
        m[j + 2, j] = 1.0
    return m


def hadamard_bound(minor: np.ndarray) -> float:
    if minor.size == 0:
        return 1.0
    norms = np.linalg.norm(minor, axis=1)
    return float(np.prod(norms)) if np.all(norms > 0) else 0.0


def solve_monic(n: int, mu: np.ndarray, tol: Optional[Tolerances] = None,
                real_positive: bool = False) -> np.ndarray:
    """Coefficients of the monic degree-n member from the moment matrix.

    Solves sum_j lam_j mu_{i,j} = 0 for i < n with lam_n = 1.  Degeneracy of
    the system matrix raises DegenerateMinor: in the real-positive mode that
    means loss of positive definiteness, otherwise the scale-free
    Hadamard-relative determinant test (complex weights can have honest
    D_n = 0).
    """
    tol = tol or default_tolerances()
    if n == 0:
        return np.array([1.0 + 0.0j])
    a = mu[:n, :n]
    bound = hadamard_bound(a)
    det = np.linalg.det(a)
    if real_positive:
        try:
            np.linalg.cholesky(a.real)
            bad = det.real <= 0.0
        except np.linalg.LinAlgError:
            bad = True
    else:
        bad = abs(det) < tol.degenerate_minor * bound
    if bad:
        raise DegenerateMinor(n, det, bound)
    lam = np.empty(n + 1, dtype=complex)
    lam[:n] = np.linalg.solve(a, -mu[:n, n])
    lam[n] = 1.0
    return lam


def _sqrt_ratio(num: complex, den: complex) -> complex:
    """sqrt(num/den), positive branch for positive real ratios, else principal
    with the sign fixed so the real part is nonnegative."""
    ratio = num / den
    if abs(ratio.imag) <= 1e-12 * abs(ratio) and ratio.real > 0:
        return math.sqrt(ratio.real)
    s = complex(np.sqrt(complex(ratio)))
    if s.real < 0 or (s.real == 0 and s.imag < 0):
        s = -s
    return s


@dataclass
class EopFamily:
    """A constructed family: monic and orthonormal members plus recurrence data."""

    lattice: RectLattice
    anchor: AnchorConfig
    weight: WeightSpec
    grid: ContourGrid
    max_n: int
    mu: np.ndarray           # (max_n+3) x (max_n+3) bimoments
    monic: list              # monic[n] = coefficient array, length n+1
    norm_factors: list       # f_n = norm_factors[n] * F_n
    D: np.ndarray            # D_0 .. D_{max_n+1}
    A: np.ndarray            # A_k, k <= max_n - 2
    B: np.ndarray            # B_k, k <= max_n - 1
    C: np.ndarray            # C_k, k <= max_n
    real_config: bool
    diagnostics: dict = field(default_factory=dict)

    # -- coefficient access ------------------------------------------------

    def monic_coeffs(self, n: int) -> APolyCoeffs:
        return APolyCoeffs(tuple(self.monic[n]), self.anchor, self.lattice)

    def orthonormal_coeffs(self, n: int) -> APolyCoeffs:
        lam = np.asarray(self.monic[n], dtype=complex) * self.norm_factors[n]
        return APolyCoeffs(tuple(lam), self.anchor, self.lattice)

    def _padded(self, n: int, size: int) -> np.ndarray:
        out = np.zeros(size, dtype=complex)
        lam = np.asarray(self.monic[n], dtype=complex) * self.norm_factors[n]
        out[: lam.size] = lam
        return out

    # -- evaluation ----------------------------------------------------------

    def eval_f(self, n: int, z):
        return eval_apoly(self.orthonormal_coeffs(n), z)

    def eval_f_deriv(self, n: int, z, order: int = 1):
        return eval_apoly_deriv(self.orthonormal_coeffs(n), z, order)

    def eval_monic(self, n: int, z):
        return eval_apoly(self.monic_coeffs(n), z)

    # -- integral contractions ----------------------------------------------

    def inner(self, n: int, m: int) -> complex:
        """int f_n f_m W along the contour, from the bimoments."""
        size = self.mu.shape[0]
        return complex(self._padded(n, size) @ self.mu @ self._padded(m, size))

    def gram_matrix(self) -> np.ndarray:
        size = self.mu.shape[0]
        cols = np.column_stack([self._padded(n, size) for n in range(self.max_n + 1)])
        return cols.T @ self.mu @ cols

    def gram_residual(self) -> float:
        g = self.gram_matrix()
        return float(np.max(np.abs(g - np.eye(g.shape[0]))))

    def ortho_residual(self, n: int) -> float:
        """max_j |int F_n b_j W| / scale for j < n."""
        if n == 0:
            return 0.0
        lam = np.zeros(self.mu.shape[0], dtype=complex)
        lam[: n + 1] = self.monic[n]
        resid = self.mu[:n] @ lam
        scale = np.max(np.abs(self.mu[:n, : n + 1]))
        return float(np.max(np.abs(resid)) / scale)

    def wp_inner(self, n: int, m: int) -> complex:
        """int P f_n f_m W, via the multiplication matrix."""
        size = self.mu.shape[0]
        mmat = wp_multiplication_matrix(size, self.anchor, self.lattice)
        return complex((mmat @ self._padded(n, size)) @ self.mu @ self._padded(m, size))

    # -- serialization --------------------------------------------------------

    def archive_dict(self) -> dict:
        def cplx_list(arr):
            return [[complex(v).real, complex(v).imag] for v in arr]

        return {
            "lattice": self.lattice.as_dict(),
            "anchor": self.anchor.as_dict(),
            "weight": self.weight.describe(),
            "grid": {**self.grid.as_dict(), "N_final": self.diagnostics.get("quad_nodes")},
            "maxN": self.max_n,
            "real_config": self.real_config,
            "D": cplx_list(self.D),
            "monic": [cplx_list(lam) for lam in self.monic],
            "norm_factors": cplx_list(self.norm_factors),
            "recurrence": {
                "A": cplx_list(self.A),
                "B": cplx_list(self.B),
                "C": cplx_list(self.C),
            },
            "diagnostics": self.diagnostics,
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.archive_dict(), fh, indent=1, sort_keys=True)

    def recurrence_rows(self) -> list:
        rows = []
        for k in range(self.max_n + 1):
            rows.append({
                "k": k,
                "A_k": complex(self.A[k]).real if k < len(self.A) else None,
                "B_k": complex(self.B[k]).real if k < len(self.B) else None,
                "C_k": complex(self.C[k]).real if k < len(self.C) else None,
            })
        return rows

    def save_recurrence_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "A_k", "B_k", "C_k"])
            for k in range(self.max_n + 1):
                row = [k]
                for arr in (self.A, self.B, self.C):
                    if k < len(arr):
                        v = complex(arr[k])
                        row.append(f"{v.real:.17g}" if abs(v.imag) < 1e-13 * (1 + abs(v))
                                   else f"{v.real:.17g}{v.imag:+.17g}j")
                    else:
                        row.append("")
                writer.writerow(row)


def build_family(W: WeightSpec, anchor: AnchorConfig, lat: RectLattice, max_n: int,
                 grid: Optional[ContourGrid] = None, rtol: Optional[float] = None,
                 cap: Optional[int] = None, tol: Optional[Tolerances] = None,
                 on_degenerate: str = "truncate") -> EopFamily:
    """Build monic + orthonormal members through degree max_n.

    A degenerate minor D_k truncates the family at degree k-1 (recorded in
    diagnostics) unless on_degenerate = "raise".
    """
    tol = tol or default_tolerances()
    if max_n < 0:
        raise NonFinite(f"max_n must be >= 0, got {max_n}")
    if grid is None:
        grid = contour_grid(anchor.gamma, lat,
                            phase=0.5 if W.endpoint_degenerate else 0.0)
    size = max_n + 3
    mres: MomentMatrixResult = moment_matrix(size, W, anchor, grid, lat, rtol=rtol, cap=cap)
    mu = mres.mu
    if mres.real_config:
        mu = mu.real.astype(complex)

    # leading minors D_0 .. D_{max_n + 1}.  In the real-positive configuration
    # the minors are strictly positive whenever the family exists, so positive
    # definiteness is the degeneracy criterion there (moment matrices of
    # monomial-type bases are exponentially graded, which the scale-free
    # Hadamard test would misread); the Hadamard-relative test guards the
    # complex-weight mode where D_k = 0 happens at honest scale.
    d_list = [1.0 + 0.0j]
    degenerate_at = None
    for k in range(1, max_n + 2):
        minor = mu[:k, :k]
        det = complex(np.linalg.det(minor))
        bound = hadamard_bound(minor)
        if mres.real_config:
            try:
                np.linalg.cholesky(minor.real)
                bad = det.real <= 0.0
            except np.linalg.LinAlgError:
                bad = True
        else:
            bad = abs(det) < tol.degenerate_minor * bound
        if bad:
            if on_degenerate == "raise":
                raise DegenerateMinor(k, det, bound)
            degenerate_at = k
            break
        d_list.append(det)
    d = np.asarray(d_list, dtype=complex)

    # monic degrees 0 .. eff_monic, orthonormal 0 .. eff_orth
    if degenerate_at is None:
        eff_monic = max_n
    else:
        eff_monic = min(max_n, degenerate_at - 1)
    eff_orth = min(eff_monic, len(d) - 2)

    monic = []
    monic_resid = 0.0
    for n in range(eff_monic + 1):
        lam = solve_monic(n, mu, tol, real_positive=mres.real_config)
        monic.append(lam)
        if n > 0:
            resid = np.abs(mu[:n, : n + 1] @ lam)
            scale = np.max(np.abs(mu[:n, : n + 1]))
            monic_resid = max(monic_resid, float(resid.max() / scale))

    norm_factors = []
    for n in range(eff_monic + 1):
        if n <= eff_orth:
            norm_factors.append(_sqrt_ratio(d[n], d[n + 1]))
        else:
            norm_factors.append(complex("nan"))

    fam = EopFamily(
        lattice=lat, anchor=anchor, weight=W, grid=grid, max_n=eff_orth,
        mu=mu, monic=monic[: eff_orth + 1], norm_factors=norm_factors[: eff_orth + 1],
        D=d, A=np.empty(0), B=np.empty(0), C=np.empty(0),
        real_config=mres.real_config,
        diagnostics={
            "quad_nodes": mres.n,
            "quad_est_error": mres.est_error,
            "monic_residual": monic_resid,
            "requested_max_n": max_n,
            "degenerate_at": degenerate_at,
        },
    )

    # recurrence tables from bimoment contractions
    mmat = wp_multiplication_matrix(size, anchor, lat)
    cols = np.column_stack([fam._padded(n, size) for n in range(fam.max_n + 1)])
    t = cols.T @ mmat.T @ mu @ cols  # t[k, j] = int P f_k f_j W
    n_f = fam.max_n
    fam.A = np.array([t[k, k + 2] for k in range(max(0, n_f - 1))])
    fam.B = np.array([t[k, k + 1] for k in range(n_f)]) if n_f >= 1 else np.empty(0)
    fam.C = np.array([t[k, k] for k in range(n_f + 1)])
    fam.diagnostics["gram_residual"] = fam.gram_residual()
    fam.diagnostics["wp_table_asymmetry"] = float(
        np.max(np.abs(t - t.T)) / (1.0 + np.max(np.abs(t)))
    )
    return fam


def recurrence_coeffs(fam: EopFamily, k: int) -> tuple:
    """(A_k, B_k, C_k) integrals for the five-term relation."""
    if k + 2 > fam.max_n:
        raise NonFinite(f"recurrence at k={k} needs members through degree {k + 2}")
    return complex(fam.A[k]), complex(fam.B[k]), complex(fam.C[k])


def five_term_residual(fam: EopFamily, k: int, z: np.ndarray) -> float:
    """max |P f_k - sum of the five neighbors| / max |P f_k| at the points z."""
    z = np.asarray(z, dtype=complex)
    p = wp(z, fam.lattice)
    lhs = p * fam.eval_f(k, z)
    rhs = np.zeros_like(lhs)
    terms = [
        (fam.A[k] if k < len(fam.A) else 0.0, k + 2),
        (fam.B[k] if k < len(fam.B) else 0.0, k + 1),
        (fam.C[k], k),
        (fam.B[k - 1] if k >= 1 else 0.0, k - 1),
        (fam.A[k - 2] if k >= 2 else 0.0, k - 2),
    ]
    for coeff, idx in terms:
        if 0 <= idx <= fam.max_n and coeff != 0.0:
            rhs = rhs + coeff * fam.eval_f(idx, z)
    scale = np.max(np.abs(lhs))
    return float(np.max(np.abs(lhs - rhs)) / scale)


# ---------------------------------------------------------------------------
# Andreief tensor-quadrature oracle
# ---------------------------------------------------------------------------

def andreief_check(fam: EopFamily, k: int, nodes: Optional[int] = None) -> float:
    """Relative discrepancy between D_k and its k-fold tensor integral.

    Evaluates (1/k!) * int...int det[b_{j-1}(x_i)]^2 prod W(x_i) dx on a plain
    tensor-product trapezoid grid, independent of the doubling quadrature that
    produced the bimoments.
    """
    if k not in (1, 2, 3):
        raise NonFinite(f"andreief check supports k in {{1,2,3}}, got {k}")
    if nodes is None:
        nodes = {1: 1 << 14, 2: 4096, 3: 256}[k]
    lat, anchor, grid = fam.lattice, fam.anchor, fam.grid
    period = 2.0 * lat.omega1
    t = (np.arange(nodes) + grid.phase) / nodes
    z = grid.offset(lat) + period * t
    values = wp_pair(z, lat)
    b = basis_matrix(k - 1, z, anchor, lat, values=values)
    wv = np.asarray(weight_eval(fam.weight, z, lat), dtype=complex)
    h = period / nodes

    if k == 1:
        integral = np.sum(wv) * h
    elif k == 2:
        total = 0.0 + 0.0j
        chunk = 512
        for s in range(0, nodes, chunk):
            det = b[0][s:s + chunk, None] * b[1][None, :] - b[1][s:s + chunk, None] * b[0][None, :]
            total += np.sum(det**2 * (wv[s:s + chunk, None] * wv[None, :]))
        integral = total * h**2 / 2.0
    else:
        total = 0.0 + 0.0j
        for i1 in range(nodes):
            # 3x3 determinant with x1 fixed, expanded along the first row
            m00, m01, m02 = b[0][i1], b[1][i1], b[2][i1]
            d0 = b[1][:, None] * b[2][None, :] - b[2][:, None] * b[1][None, :]
            d1 = b[0][:, None] * b[2][None, :] - b[2][:, None] * b[0][None, :]
            d2 = b[0][:, None] * b[1][None, :] - b[1][:, None] * b[0][None, :]
            det = m00 * d0 - m01 * d1 + m02 * d2
            total += wv[i1] * np.sum(det**2 * (wv[:, None] * wv[None, :]))
        integral = total * h**3 / 6.0

    dk = complex(fam.D[k])
    return float(abs(dk - integral) / abs(dk))


# ---------------------------------------------------------------------------
# Christoffel-Darboux kernel
# ---------------------------------------------------------------------------

def cd_kernel(fam: EopFamily, n: int, z, u) -> complex:
    """Direct reproducing-kernel sum K_n(z, u) = sum_{j<n} f_j(z) f_j(u)."""
    if n > fam.max_n + 1:
        raise NonFinite(f"kernel K_{n} needs members through degree {n - 1}")
    total = 0.0 + 0.0j
    for j in range(n):
        total += fam.eval_f(j, z) * fam.eval_f(j, u)
    return complex(total)


def _cd_numerator_terms(fam: EopFamily, n: int):
    a1 = complex(fam.A[n - 1]) if n - 1 < len(fam.A) else 0.0
    a2 = complex(fam.A[n - 2]) if 0 <= n - 2 < len(fam.A) else 0.0
    b1 = complex(fam.B[n - 1]) if n - 1 < len(fam.B) else 0.0
    pairs = [(a1, n + 1, n - 1), (a2, n, n - 2), (b1, n, n - 1)]
    return [(c, i, j) for c, i, j in pairs if c != 0.0 and j >= 0]


def cd_kernel_formula(fam: EopFamily, n: int, z, u, tol: Optional[Tolerances] = None) -> complex:
    """K_n(z, u) by the recurrence-coefficient identity with confluent limits.

    Far from the coincidence set P(z) = P(u) the three-term quotient formula
    applies; near it the directional limit of the quotient (derivative of the
    numerator against -P'(u)) is evaluated at the midpoint representative of
    the degenerate pair, and at half-periods the second-derivative form takes
    over (P' vanishes there).
    """
    tol = tol or default_tolerances()
    if n + 1 > fam.max_n:
        raise NonFinite(f"CD formula for K_{n} needs members through degree {n + 1}")
    if n == 0:
        return 0.0 + 0.0j
    lat = fam.lattice
    z = complex(z)
    u = complex(u)
    pz = wp(z, lat)
    pu = wp(u, lat)
    terms = _cd_numerator_terms(fam, n)

    if abs(pz - pu) > tol.cd_switch * (1.0 + abs(pz)):
        num = 0.0 + 0.0j
        for c, i, j in terms:
            num += c * (fam.eval_f(i, z) * fam.eval_f(j, u)
                        - fam.eval_f(i, u) * fam.eval_f(j, z))
        return complex(num / (pz - pu))

    # coincident (u ~ z mod lattice) or antipodal (u ~ -z): midpoint of the pair
    dz, _, _ = _reduce_centered(np.asarray(z - u, dtype=complex), lat)
    dzm, _, _ = _reduce_centered(np.asarray(z + u, dtype=complex), lat)
    antipodal = abs(complex(dzm)) < abs(complex(dz))
    if antipodal:
        v = z - complex(dzm) / 2.0
        w = -v
    else:
        v = (z - complex(dz) / 2.0)
        w = v

    try:
        dpv = wp_prime(w, lat)
        pv = wp(v, lat)
        if abs(dpv) > 1e-8 * (1.0 + abs(pv)) ** 1.5:
            # first directional limit: d/du of the numerator over -P'(u) at u = w
            num = 0.0 + 0.0j
            for c, i, j in terms:
                num += c * (fam.eval_f(i, v) * fam.eval_f_deriv(j, w)
                            - fam.eval_f_deriv(i, w) * fam.eval_f(j, v))
            return complex(num / (-dpv))
        # half-period: second derivatives against P''
        d2pv = 6.0 * pv * pv - 0.5 * lat.g2
        num = 0.0 + 0.0j
        for c, i, j in terms:
            num += c * (fam.eval_f(i, v) * fam.eval_f_deriv(j, w, 2)
                        - fam.eval_f_deriv(i, w, 2) * fam.eval_f(j, v))
        return complex(-num / d2pv)
    except PoleAt as ex:
        raise NeedsDerivative(
            f"confluent CD form hit a pole evaluating derivatives near {v}") from ex


def reproducing_residual(fam: EopFamily, n: int, z, rng=None) -> float:
    """|int f_0(u) K_n(z,u) W(u) du - f_0(z)| / |f_0(z)| via honest quadrature."""
    from .quadrature import contour_integral

    def f(uu):
        vals = np.zeros(uu.shape, dtype=complex)
        for j in range(n):
            vals += fam.eval_f(j, uu) * fam.eval_f(j, z)
        return vals * fam.eval_f(0, uu) * np.asarray(weight_eval(fam.weight, uu, fam.lattice),
                                                     dtype=complex)

    got = contour_integral(f, fam.grid, fam.lattice, rtol=1e-10).value
    expect = complex(fam.eval_f(0, z))
    return abs(got - expect) / abs(expect)
