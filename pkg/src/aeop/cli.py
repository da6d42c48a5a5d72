"""Command-line harness: build families, verify the theorem suites, and emit
reproduction data (JSON, CSV, and figures).

Configuration comes from a flat key = value file (a TOML-compatible subset)
and/or flags; flags win.  All numeric output uses 17 significant digits and a
fixed key order, so identical configurations produce byte-identical files.
Exit codes: 0 success, 1 numerical tolerance failure, 2 configuration error,
3 theorem violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import errors
from .basis import Contour, anchor_config
from .engine import build_family
from .lattice import (
    RectLattice,
    lattice_from_branch_points,
    lattice_from_half_periods,
    wp,
)
from .mop import decompose, general_lift, reconstruction_residual
from .oprl import example2_family, jacobi_weight_m10, lift_symmetric
from .quadrature import (
    WeightSpec,
    example_v_weight,
    example_w_weight,
    inverse_power_weight,
    lifted_even_weight,
    oddly_perturbed_weight,
    user_weight,
)
from .reports import SUITES, reference_notes
from .zeros import find_zeros

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2
EXIT_THEOREM = 3


def fmt(value) -> str:
    return f"{value:.17g}"


def emit_json(data: dict, path=None) -> None:
    text = json.dumps(data, indent=1, sort_keys=True, default=_json_default)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + "\n")


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float):
        return obj
    return str(obj)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def parse_config_file(path: str) -> dict:
    """Flat key = value pairs; '#' comments; bare numbers, booleans, strings."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise errors.NonFinite(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip().strip('"').strip("'")
        low = val.lower()
        if low in ("true", "false"):
            out[key] = low == "true"
        else:
            try:
                out[key] = int(val)
            except ValueError:
                try:
                    out[key] = float(val)
                except ValueError:
                    out[key] = val
    return out


def build_lattice(cfg: dict) -> RectLattice:
    if cfg.get("e1") is not None:
        return lattice_from_branch_points(cfg["e1"], cfg["e2"], cfg["e3"])
    omega1 = cfg.get("omega1", None)
    tau = cfg.get("tau", None)
    if omega1 is None and tau is None:
        return lattice_from_branch_points(1.0, 0.0, -1.0)  # the square default
    return lattice_from_half_periods(omega1, tau)


def build_weight(cfg: dict, lat: RectLattice, anchor=None) -> WeightSpec:
    name = str(cfg.get("weight", "examplew")).lower().replace("_", "").replace("-", "")
    alpha = float(cfg.get("alpha", 0.0))
    beta = float(cfg.get("beta", 0.0))
    if name in ("examplew", "w"):
        return example_w_weight(alpha, beta)
    if name in ("examplev", "v"):
        return example_v_weight(alpha, beta)
    if name in ("flat", "unit", "one"):
        return user_weight(lambda z, _lat: np.ones(np.shape(z)), real_positive=True,
                           even=True, label="unit weight")
    if name in ("invpow", "inversepower"):
        power = int(cfg.get("power", cfg.get("maxn", 6) + 3))
        return inverse_power_weight(power)
    if name in ("perturbed", "oddperturbed"):
        eps = float(cfg.get("eps", 0.25))
        if anchor is None:
            raise errors.NonFinite("perturbed weight needs the anchor")
        return oddly_perturbed_weight(example_w_weight(alpha, beta), eps, anchor)
    if name in ("liftedjacobi", "lifted"):
        return lifted_even_weight(jacobi_weight_m10(alpha, beta).fn,
                                  label=f"lifted jacobi({alpha},{beta})")
    raise errors.NonFinite(f"unknown weight {cfg.get('weight')!r}")


def resolve_anchor(cfg: dict, lat: RectLattice, contour: Contour):
    spec = cfg.get("anchor", None)
    if spec is None:
        spec = "omega2" if contour is Contour.GAMMA1 else "omega1"
    if isinstance(spec, str):
        name = spec.lower()
        named = {"omega1": lat.omega1, "omega2": lat.omega2, "omega3": lat.omega3}
        if name in named:
            return anchor_config(named[name], contour, lat)
        if "," in name:
            re, im = (float(v) for v in name.split(","))
            return anchor_config(complex(re, im), contour, lat)
        spec = float(spec)
    if contour is Contour.GAMMA2:
        return anchor_config(float(spec), contour, lat)
    return anchor_config(float(spec) + 1j * lat.tau, contour, lat)


def family_from_config(cfg: dict):
    lat = build_lattice(cfg)
    contour = Contour(str(cfg.get("contour", "gamma2")).lower())
    anchor = resolve_anchor(cfg, lat, contour)
    weight = build_weight(cfg, lat, anchor)
    max_n = int(cfg.get("maxn", 6))
    fam = build_family(weight, anchor, lat, max_n)
    return fam


def merged_config(args) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        cfg.update(parse_config_file(args.config))
    for key in ("omega1", "tau", "e1", "e2", "e3", "alpha", "beta", "maxn", "n",
                "weight", "contour", "anchor", "power", "eps", "outdir", "suite"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def outdir_from(cfg: dict) -> Path:
    out = Path(cfg.get("outdir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def _savefig(fig, path: Path) -> None:
    fig.savefig(path, dpi=150)


def render_plotdata_figure(lat: RectLattice, t, g1, g2, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    axes[0].plot(2 * t, g1, lw=1.2)
    axes[0].set_xlabel(r"$t$  ($z = t\,\omega_1$)")
    axes[0].set_ylabel(r"$\wp(z)$")
    axes[0].set_title("real contour through the origin")
    axes[1].plot(2 * t, g2, lw=1.2, color="C1")
    axes[1].set_xlabel(r"$t$  ($z = \omega_3 + t\,\omega_1$)")
    axes[1].set_title("shifted real contour")
    for ax, ref in ((axes[0], lat.e1), (axes[1], lat.e2)):
        ax.axhline(ref, color="0.6", lw=0.6, ls="--")
    fig.tight_layout()
    _savefig(fig, path)
    plt.close(fig)


def render_zeros_figure(fam, ns, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    lat = fam.lattice
    gamma = Contour(fam.anchor.gamma)
    offset = 0.0 if gamma is Contour.GAMMA1 else 1j * lat.tau
    t = np.linspace(1e-4, 1 - 1e-4, 1200)
    fig, ax = plt.subplots(figsize=(8, 4))
    for n in ns:
        vals = fam.eval_f(n, offset + 2 * lat.omega1 * t).real
        clip = np.clip(vals, -50, 50)
        ax.plot(t, clip, lw=1.0, label=f"n = {n}")
        zset = find_zeros(fam.orthonormal_coeffs(n), gamma)
        ax.plot(zset.zeros, np.zeros(len(zset)), "o", ms=4, color=ax.lines[-1].get_color())
    ax.axhline(0.0, color="0.5", lw=0.6)
    ax.set_xlabel(f"contour parameter t on {gamma.value}")
    ax.set_ylabel("orthonormal member value")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    _savefig(fig, path)
    plt.close(fig)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_lattice(args) -> int:
    cfg = merged_config(args)
    lat = build_lattice(cfg)
    data = {k: float(fmt(v)) for k, v in lat.as_dict().items()}
    emit_json({"lattice": data})
    return EXIT_OK


def cmd_family(args) -> int:
    cfg = merged_config(args)
    fam = family_from_config(cfg)
    out = outdir_from(cfg)
    fam.save_json(out / "family.json")
    fam.save_recurrence_csv(out / "recurrence.csv")
    emit_json({"written": [str(out / "family.json"), str(out / "recurrence.csv")],
               "maxN": fam.max_n, "quad_nodes": fam.diagnostics["quad_nodes"],
               "gram_residual": fam.diagnostics["gram_residual"]})
    return EXIT_OK


def cmd_zeros(args) -> int:
    cfg = merged_config(args)
    fam = family_from_config(cfg)
    out = outdir_from(cfg)
    ns = [int(cfg.get("n", fam.max_n))] if cfg.get("n") is not None \
        else list(range(fam.max_n + 1))
    rows = []
    for n in ns:
        zset = find_zeros(fam.orthonormal_coeffs(n), fam.anchor.gamma)
        rows.extend(zset.csv_rows(n, fam.lattice))
    csv_path = out / "zeros.csv"
    with open(csv_path, "w") as fh:
        fh.write("n,contour,t,re_z,im_z\n")
        for n, contour, t, re, im in rows:
            fh.write(f"{n},{contour},{fmt(t)},{fmt(re)},{fmt(im)}\n")
    fig_path = out / "zeros.png"
    render_zeros_figure(fam, ns, fig_path)
    emit_json({"written": [str(csv_path), str(fig_path)],
               "counts": {str(n): sum(1 for r in rows if r[0] == n) for n in ns}})
    return EXIT_OK


def cmd_recurrence(args) -> int:
    cfg = merged_config(args)
    fam = family_from_config(cfg)
    out = outdir_from(cfg)
    path = out / "recurrence.csv"
    fam.save_recurrence_csv(path)
    emit_json({"written": [str(path)], "maxN": fam.max_n})
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = merged_config(args)
    suite = cfg.get("suite")
    if suite not in SUITES:
        print(f"unknown verify suite {suite!r}; choose from {sorted(SUITES)}",
              file=sys.stderr)
        return EXIT_CONFIG
    out = outdir_from(cfg)
    if suite == "corollary-jacobi":
        report = SUITES[suite](csv_path=out / "corollary_jacobi.csv")
    elif suite == "lattice":
        report = SUITES[suite]()
    else:
        fam = family_from_config(cfg)
        report = SUITES[suite](fam)
    emit_json(report)
    emit_json(report, out / f"verify_{suite}.json")
    return EXIT_OK if report["pass"] else EXIT_THEOREM


def cmd_lift(args) -> int:
    cfg = merged_config(args)
    lat = build_lattice(cfg)
    alpha = float(cfg.get("alpha", 0.0))
    beta = float(cfg.get("beta", 0.0))
    n = int(cfg.get("n", 3))
    kind = str(cfg.get("weight", "examplew")).lower().replace("_", "")
    anchor_spec = cfg.get("anchor", "omega1")
    out = outdir_from(cfg)
    if anchor_spec == "omega1":
        if kind.startswith("examplev"):
            closed = example2_family(n, alpha, beta, lat)
        else:
            closed = lift_symmetric(jacobi_weight_m10(alpha, beta), lat, n)
        lam_closed = np.asarray(closed.lam)
        fam = family_from_config({**cfg, "maxn": n})
        lam_mom = np.asarray(fam.monic[n])
        size = max(len(lam_closed), len(lam_mom))
        a = np.zeros(size, complex); a[: len(lam_closed)] = lam_closed
        b = np.zeros(size, complex); b[: len(lam_mom)] = lam_mom
        diff = float(np.max(np.abs(a - b)))
        data = {"n": n, "alpha": alpha, "beta": beta,
                "closed_form": closed.as_dict(), "coefficient_diff": diff,
                "pass": diff <= 1e-6}
    else:
        lat_cfg = {**cfg, "weight": "examplew"}
        contour = Contour.GAMMA2
        anchor = resolve_anchor(cfg, lat, contour)
        data_gl = general_lift(jacobi_weight_m10(alpha, beta), anchor.a, lat, n)
        from .mop import general_lift_family

        fam = general_lift_family(jacobi_weight_m10(alpha, beta), anchor.a, lat, n)
        lam_mom = np.asarray(fam.monic[n])
        lam_gen = np.asarray(data_gl.coeffs.lam)
        size = max(len(lam_gen), len(lam_mom))
        a = np.zeros(size, complex); a[: len(lam_gen)] = lam_gen
        b = np.zeros(size, complex); b[: len(lam_mom)] = lam_mom
        diff = float(np.max(np.abs(a - b)))
        data = {"n": n, "alpha": alpha, "beta": beta, **data_gl.as_dict(),
                "coefficient_diff": diff, "pass": diff <= 1e-6}
    emit_json(data)
    emit_json(data, out / "lift.json")
    return EXIT_OK if data["pass"] else EXIT_NUMERICAL


def cmd_decompose(args) -> int:
    cfg = merged_config(args)
    fam = family_from_config(cfg)
    n = int(cfg.get("n", fam.max_n))
    out = outdir_from(cfg)
    c = fam.monic_coeffs(n)
    dec = decompose(c)
    lat = fam.lattice
    rng = np.random.default_rng(3)
    z = 1j * lat.tau + 2 * lat.omega1 * rng.uniform(0.05, 0.95, 200)
    resid = reconstruction_residual(c, dec, z)
    data = {"n": n, **dec.as_dict(), "reconstruction_residual": resid,
            "pass": resid <= 1e-8}
    emit_json(data)
    emit_json(data, out / "decompose.json")
    return EXIT_OK if data["pass"] else EXIT_NUMERICAL


def cmd_plotdata(args) -> int:
    cfg = merged_config(args)
    lat = build_lattice(cfg)
    out = outdir_from(cfg)
    samples = int(cfg.get("samples", 1000))
    t = (np.arange(samples) + 0.5) / samples
    g1 = wp(2 * lat.omega1 * t, lat).real
    g2 = wp(1j * lat.tau + 2 * lat.omega1 * t, lat).real
    csv_path = out / "plotdata.csv"
    with open(csv_path, "w") as fh:
        fh.write("t,wp_gamma1,wp_gamma2\n")
        for ti, a, b in zip(t, g1, g2):
            fh.write(f"{fmt(ti)},{fmt(a)},{fmt(b)}\n")
    fig_path = out / "plotdata.png"
    render_plotdata_figure(lat, t, g1, g2, fig_path)
    emit_json({"written": [str(csv_path), str(fig_path)],
               "gamma2_range": [fmt(g2.min()), fmt(g2.max())],
               "gamma1_min": fmt(g1.min())})
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--half-periods", nargs=2, type=float, metavar=("OMEGA1", "TAU"),
                   dest="half_periods")
    p.add_argument("--branch-points", nargs=3, type=float, metavar=("E1", "E2", "E3"),
                   dest="branch_points")
    p.add_argument("--weight", help="examplew | examplev | flat | invpow | perturbed | lifted")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--maxn", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--contour", choices=["gamma1", "gamma2"])
    p.add_argument("--anchor", help="omega1 | omega2 | omega3 | position on the contour")
    p.add_argument("--power", type=int, help="exponent for the inverse-power weight")
    p.add_argument("--eps", type=float, help="odd perturbation size")
    p.add_argument("--outdir", help="output directory (default: current)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aeop",
        description="elliptic orthogonal a-polynomials: build, verify, report",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in [
        ("lattice", cmd_lattice), ("family", cmd_family), ("zeros", cmd_zeros),
        ("recurrence", cmd_recurrence), ("lift", cmd_lift),
        ("decompose", cmd_decompose), ("plotdata", cmd_plotdata),
    ]:
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(handler=fn)
    pv = sub.add_parser("verify")
    pv.add_argument("suite", choices=sorted(SUITES))
    _add_common(pv)
    pv.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if getattr(args, "half_periods", None):
        args.omega1, args.tau = args.half_periods
    else:
        args.omega1 = args.tau = None
    if getattr(args, "branch_points", None):
        args.e1, args.e2, args.e3 = args.branch_points
    else:
        args.e1 = args.e2 = args.e3 = None
    try:
        return args.handler(args)
    except (errors.NonFinite, errors.BadOrdering, errors.ParameterOutOfRange) as ex:
        print(f"configuration error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    except (errors.ToleranceNotMet, errors.MomentDivergence,
            errors.EvaluationFailure, errors.DegenerateMinor,
            errors.DegenerateDenominator) as ex:
        print(f"numerical failure: {ex}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (errors.UnstableCount, errors.NotRealOnContour) as ex:
        print(f"theorem-check failure: {ex}", file=sys.stderr)
        return EXIT_THEOREM


if __name__ == "__main__":
    sys.exit(main())
