"""Zeros of real-valued a-polynomials on the torus contours, and interlacing.

Zero location runs on the contour parameter t in [0, 1) with z(t) = offset +
2*omega1*t, treating t circularly: every zero must be bracketed by a verified
sign change, pole neighborhoods are excluded (a sign flip across a pole is not
a zero), and the node count doubles until the count stabilizes twice.  A dip
of |f| below the zero scale without a sign change is a suspected multiple
zero; the theorems predict simple zeros, so that raises UnstableCount rather
than guessing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .basis import APolyCoeffs, Contour, eval_apoly, eval_apoly_deriv, has_pole_at_a
from .errors import NonFinite, NotRealOnContour, UnstableCount
from .tolerances import Tolerances, default_tolerances

MAX_RESOLUTION = 1 << 18


@dataclass(frozen=True)
class ZeroSet:
    contour: Contour
    zeros: tuple            # increasing t in [0, 1)
    derivatives: tuple      # df/dt at each zero
    resolution: int
    scale: float            # max |f| over the sampled contour

    def __len__(self):
        return len(self.zeros)

    def points(self, lat, offset: complex) -> np.ndarray:
        return offset + 2.0 * lat.omega1 * np.asarray(self.zeros)

    def csv_rows(self, n: int, lat) -> list:
        offset = 0.0 if self.contour is Contour.GAMMA1 else 1j * lat.tau
        rows = []
        for t in self.zeros:
            z = offset + 2.0 * lat.omega1 * t
            rows.append((n, self.contour.value, t, z.real, z.imag))
        return rows


def _pole_params(c: APolyCoeffs, contour: Contour) -> list:
    """Contour parameters of the poles of c that lie on this contour."""
    lat = c.lattice
    out = []
    if contour is Contour.GAMMA1:
        out.append(0.0)
        if abs(c.anchor.a.imag) < 1e-12:
            out.append((c.anchor.a.real / (2.0 * lat.omega1)) % 1.0)
    else:
        if abs(c.anchor.a.imag - lat.tau) < 1e-12:
            out.append((c.anchor.a.real / (2.0 * lat.omega1)) % 1.0)
    return out


def _circ_dist(t: np.ndarray, t0: float) -> np.ndarray:
    d = np.abs((t - t0) % 1.0)
    return np.minimum(d, 1.0 - d)


def find_zeros(c: APolyCoeffs, contour, resolution: int = 512,
               tol: Optional[Tolerances] = None) -> ZeroSet:
    """Locate the zeros of a real-on-contour a-polynomial along one contour."""
    tol = tol or default_tolerances()
    contour = Contour(contour)
    if resolution < 512:
        raise NonFinite(f"resolution must be >= 512, got {resolution}")
    lat = c.lattice
    offset = 0.0 if contour is Contour.GAMMA1 else 1j * lat.tau
    period = 2.0 * lat.omega1
    poles = _pole_params(c, contour)
    exclusion = tol.pole_exclusion_t

    def excluded(t: np.ndarray) -> np.ndarray:
        mask = np.zeros(t.shape, dtype=bool)
        for t0 in poles:
            mask |= _circ_dist(t, t0) < exclusion
        return mask

    def sample(t: np.ndarray) -> np.ndarray:
        vals = eval_apoly(c, offset + period * t)
        return np.asarray(vals)

    counts = []
    m = resolution
    while True:
        t = np.arange(m) / m
        ok = ~excluded(t)
        g = sample(t[ok])
        if np.any(np.abs(g.imag) > 1e-9 * (1.0 + np.abs(g))):
            raise NotRealOnContour(
                f"function is not real on {contour.value}: max Im = {np.abs(g.imag).max():.3e}"
            )
        gv = g.real
        tv = t[ok]
        # robust local scale: the median is unaffected by pole blow-up on gamma1
        scale = float(np.median(np.abs(gv)))

        # suspected even-order zeros: a genuine dip of |f| to the zero floor at
        # a node whose neighbors agree in sign (a simple zero flips them)
        mags = np.abs(gv)
        tiny = mags < 1e-9 * scale
        if np.any(tiny):
            for i in np.nonzero(tiny)[0]:
                left, right = gv[i - 1], gv[(i + 1) % gv.size]
                if left * right > 0 and mags[i] < 1e-3 * min(abs(left), abs(right)):
                    raise UnstableCount([len(counts)], m)

        # an exact 0.0 at a node gets an arbitrary sign; the zero is still
        # bracketed by whichever adjacent pair then flips
        gv = np.where(gv == 0.0, np.finfo(float).tiny, gv)
        s = np.sign(gv)
        nxt = np.roll(gv, -1)
        tnxt = np.roll(tv, -1)
        # a pair brackets a zero when the signs flip and the pair is contiguous
        # (no excluded zone between the two parameters)
        gap = (tnxt - tv) % 1.0
        contiguous = gap <= 1.5 / m
        flips = (s * np.sign(nxt) < 0) & contiguous
        counts.append(int(np.count_nonzero(flips)))

        if len(counts) >= 3 and counts[-1] == counts[-2] == counts[-3]:
            break
        if m >= MAX_RESOLUTION:
            raise UnstableCount(counts, m)
        m *= 2

    lo = tv[flips]
    hi = lo + gap[flips]
    flo = gv[flips]
    for _ in range(64):
        if np.all(hi - lo < tol.zero_refine_t):
            break
        mid = 0.5 * (lo + hi)
        fmid = sample(mid % 1.0).real
        go_right = flo * fmid > 0
        lo = np.where(go_right, mid, lo)
        flo = np.where(go_right, fmid, flo)
        hi = np.where(go_right, hi, mid)

    roots = 0.5 * (lo + hi) % 1.0
    roots = np.where(roots > 1.0 - 1e-9, roots - 1.0, roots)
    order = np.argsort(roots)
    roots = roots[order]
    derivs = eval_apoly_deriv(c, offset + period * (roots % 1.0), 1).real * period
    return ZeroSet(contour=contour, zeros=tuple(float(r) for r in roots),
                   derivatives=tuple(float(d) for d in derivs),
                   resolution=m, scale=scale)


# ---------------------------------------------------------------------------
# interlacing
# ---------------------------------------------------------------------------

class InterlaceKind(str, enum.Enum):
    STRICT_FULLY_ALTERNATING = "StrictFullyAlternating"
    WEAK_ALTERNATING = "WeakAlternating"
    NOT_INTERLACING = "NotInterlacing"


@dataclass(frozen=True)
class InterlacingReport:
    kind: InterlaceKind
    direction: Optional[str]   # "first-leads" / "second-leads" for equal counts
    strict: bool
    min_gap: float

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "direction": self.direction,
                "strict": self.strict, "min_gap": self.min_gap}


def _alternation_gaps(zs: np.ndarray, ws: np.ndarray) -> np.ndarray:
    """Signed margins of z1 <= w1 <= z2 <= w2 <= ... for len(ws) in {n, n-1}."""
    gaps = []
    for i, w in enumerate(ws):
        gaps.append(w - zs[i])
        if i + 1 < len(zs):
            gaps.append(zs[i + 1] - w)
    return np.asarray(gaps)


def check_interlacing(z_list, w_list, margin: float = 1e-10) -> InterlacingReport:
    """Classify the interlacing of two ordered zero lists.

    The first list plays the z-role of the alternation inequalities.  Equal
    counts give the fully-alternating classification (in either direction);
    counts differing by one give the sandwiched case, reported as
    WeakAlternating with the strictness flag carrying the margin result.
    """
    zs = np.sort(np.asarray(z_list, dtype=float))
    ws = np.sort(np.asarray(w_list, dtype=float))
    n, m = len(zs), len(ws)

    if m == n:
        if n == 0:
            return InterlacingReport(InterlaceKind.STRICT_FULLY_ALTERNATING, None, True,
                                     float("inf"))
        g1 = _alternation_gaps(zs, ws)
        g2 = _alternation_gaps(ws, zs)
        best, direction = (g1, "first-leads") if g1.min() >= g2.min() else (g2, "second-leads")
        min_gap = float(best.min())
        if min_gap > margin:
            return InterlacingReport(InterlaceKind.STRICT_FULLY_ALTERNATING, direction,
                                     True, min_gap)
        if min_gap >= 0.0:
            return InterlacingReport(InterlaceKind.WEAK_ALTERNATING, direction, False, min_gap)
        return InterlacingReport(InterlaceKind.NOT_INTERLACING, direction, False, min_gap)

    if m == n - 1:
        gaps = _alternation_gaps(zs, ws)
        min_gap = float(gaps.min()) if len(gaps) else float("inf")
        if min_gap >= 0.0 or n == 1:
            return InterlacingReport(InterlaceKind.WEAK_ALTERNATING, None,
                                     bool(min_gap > margin), min_gap)
        return InterlacingReport(InterlaceKind.NOT_INTERLACING, None, False, min_gap)

    return InterlacingReport(InterlaceKind.NOT_INTERLACING, None, False, float("-inf"))


# ---------------------------------------------------------------------------
# theorem verifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TheoremReport:
    claim: str
    expected: dict
    observed: dict
    passed: bool

    def as_dict(self) -> dict:
        return {"claim": self.claim, "expected": self.expected,
                "observed": self.observed, "pass": self.passed}


def verify_zero_theorem(fam, n: int, resolution: int = 512,
                        tol: Optional[Tolerances] = None) -> TheoremReport:
    """Zero count, location and simplicity for the real-positive configuration."""
    tol = tol or default_tolerances()
    f = fam.orthonormal_coeffs(n)
    pole = has_pole_at_a(f, tol.pole_coeff_tol)
    on_gamma = Contour(fam.anchor.gamma)
    other = Contour.GAMMA1 if on_gamma is Contour.GAMMA2 else Contour.GAMMA2

    zmain = find_zeros(f, on_gamma, resolution, tol)
    zother = find_zeros(f, other, resolution, tol)

    if on_gamma is Contour.GAMMA2:
        if n % 2 == 0:
            expected = {"on_contour": n, "off_contour": 1 if pole else 0, "pole_at_a": pole}
        else:
            expected = {"on_contour": n + 1, "off_contour": 0, "pole_at_a": True}
    else:
        expected = {"on_contour": n, "off_contour": 1 if pole else 0, "pole_at_a": pole}

    simple = all(
        abs(d) > tol.simplicity_margin * zs.scale
        for zs in (zmain, zother) for d in zs.derivatives
    )
    observed = {
        "on_contour": len(zmain),
        "off_contour": len(zother),
        "pole_at_a": pole,
        "all_simple": simple,
        "resolution": zmain.resolution,
    }
    passed = (observed["on_contour"] == expected["on_contour"]
              and observed["off_contour"] == expected["off_contour"]
              and observed["pole_at_a"] == expected["pole_at_a"]
              and simple)
    claim = (f"degree-{n} member has exactly the predicted simple zero counts on "
             f"{on_gamma.value} and {other.value}")
    return TheoremReport(claim=claim, expected=expected, observed=observed, passed=passed)


def verify_interlacing_theorem(fam, n: int, resolution: int = 512,
                               tol: Optional[Tolerances] = None) -> TheoremReport:
    """Strict interlacing of consecutive orthonormal members on the contour."""
    tol = tol or default_tolerances()
    gamma = Contour(fam.anchor.gamma)
    zs_n = find_zeros(fam.orthonormal_coeffs(n), gamma, resolution, tol)
    zs_n1 = find_zeros(fam.orthonormal_coeffs(n + 1), gamma, resolution, tol)

    if gamma is Contour.GAMMA1:
        # n+1 zeros sandwich the n zeros strictly
        rep = check_interlacing(zs_n1.zeros, zs_n.zeros, tol.interlace_margin)
        ok = rep.kind is InterlaceKind.WEAK_ALTERNATING and rep.strict
        claim = f"zeros of member {n + 1} strictly sandwich those of member {n} on gamma1"
        expected = {"counts": (n + 1, n), "strict_sandwich": True}
    else:
        if n % 2 == 0:
            raise NonFinite("the gamma2 interlacing statement applies to odd n")
        rep = check_interlacing(zs_n.zeros, zs_n1.zeros, tol.interlace_margin)
        ok = rep.kind is InterlaceKind.STRICT_FULLY_ALTERNATING
        claim = (f"zeros of members {n} and {n + 1} strictly alternate on gamma2 "
                 f"(either direction)")
        expected = {"counts": (n + 1, n + 2), "strict_alternation": True}

    observed = {"counts": (len(zs_n), len(zs_n1)), "interlacing": rep.as_dict()}
    return TheoremReport(claim=claim, expected=expected, observed=observed, passed=bool(ok))


def half_contour_zeros(fam, n: int, resolution: int = 512,
                       tol: Optional[Tolerances] = None) -> np.ndarray:
    """Zeros of monic member n interior to the first half of gamma2 (t in (0, 1/2)).

    Structural endpoint zeros shared by all odd members (the b_1 factor) are
    excluded; the remaining zeros are the P-preimages of interval polynomial
    roots.
    """
    zs = find_zeros(fam.monic_coeffs(n), Contour.GAMMA2, resolution, tol)
    t = np.asarray(zs.zeros)
    eps = 1e-8
    return t[(t > eps) & (t < 0.5 - eps)]


def verify_half_contour_interlacing(fam, n: int, resolution: int = 512,
                                    tol: Optional[Tolerances] = None) -> TheoremReport:
    """Zeros of F_{n+2} strictly sandwich those of F_n on the open half contour."""
    tol = tol or default_tolerances()
    t_n = half_contour_zeros(fam, n, resolution, tol)
    t_n2 = half_contour_zeros(fam, n + 2, resolution, tol)
    rep = check_interlacing(t_n2, t_n, tol.interlace_margin)
    ok = (len(t_n2) == len(t_n) + 1
          and rep.kind is InterlaceKind.WEAK_ALTERNATING and rep.strict)
    return TheoremReport(
        claim=f"half-contour zeros of monic member {n + 2} strictly sandwich member {n}",
        expected={"counts": (len(t_n) + 1, len(t_n)), "strict_sandwich": True},
        observed={"counts": (len(t_n2), len(t_n)), "interlacing": rep.as_dict()},
        passed=bool(ok),
    )


def wronskian_sign_constant(fam, n: int, samples: int = 1000) -> bool:
    """f_{n+1} f_n' - f_n f_{n+1}' keeps one sign along the contour."""
    lat = fam.lattice
    gamma = Contour(fam.anchor.gamma)
    offset = 0.0 if gamma is Contour.GAMMA1 else 1j * lat.tau
    t = (np.arange(samples) + 0.5) / samples
    mask = np.ones(samples, dtype=bool)
    for t0 in _pole_params(fam.orthonormal_coeffs(n + 1), gamma):
        mask &= _circ_dist(t, t0) > 1e-3
    z = offset + 2.0 * lat.omega1 * t[mask]
    fn = fam.eval_f(n, z).real
    fn1 = fam.eval_f(n + 1, z).real
    dfn = fam.eval_f_deriv(n, z).real
    dfn1 = fam.eval_f_deriv(n + 1, z).real
    w = fn1 * dfn - fn * dfn1
    scale = np.abs(w).max()
    return bool(np.all(w > -1e-10 * scale) or np.all(w < 1e-10 * scale))
