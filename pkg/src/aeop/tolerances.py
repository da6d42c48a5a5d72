"""Default tolerance bundle, overridable through the EOP_TOL environment variable.

EOP_TOL accepts comma-separated ``name=value`` pairs matching the field names
of :class:`Tolerances`, e.g. ``EOP_TOL="quad_rtol=1e-9,gram_tol=1e-6"``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    # contour quadrature
    quad_rtol: float = 1e-11
    quad_cap: int = 2**20
    quad_cap_degenerate: int = 2**22
    # family construction
    monic_residual: float = 1e-10
    gram_tol: float = 1e-7
    ortho_residual: float = 1e-8
    degenerate_minor: float = 1e-12
    # recurrence / kernels
    recurrence_tol: float = 1e-7
    cd_tol: float = 1e-6
    confluent_tol: float = 1e-5
    cd_switch: float = 1e-6
    # zeros
    zero_refine_t: float = 1e-12
    pole_exclusion_t: float = 1e-6
    simplicity_margin: float = 1e-8
    interlace_margin: float = 1e-10
    # interval quadrature (OPRL / decompositions)
    interval_rtol: float = 1e-10
    dual_quad_agreement: float = 1e-8
    mop_residual: float = 1e-7
    # misc
    degree_tol: float = 1e-10
    pole_coeff_tol: float = 1e-8
    reality_tol: float = 1e-10


def _parse_overrides(text: str) -> dict:
    out = {}
    valid = {f.name: f.type for f in fields(Tolerances)}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ValueError(f"EOP_TOL entry {item!r} is not name=value")
        name, _, raw = item.partition("=")
        name = name.strip()
        if name not in valid:
            raise ValueError(f"EOP_TOL names unknown tolerance {name!r}")
        out[name] = int(raw) if "cap" in name else float(raw)
    return out


def default_tolerances() -> Tolerances:
    """Tolerance bundle with EOP_TOL overrides applied."""
    tol = Tolerances()
    env = os.environ.get("EOP_TOL", "")
    if env:
        tol = replace(tol, **_parse_overrides(env))
    return tol
