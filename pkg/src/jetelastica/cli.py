"""Command-line driver: integrate, synthesize, classify, period, casimirs, gallery, verify."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import io as jio
from .analysis import (
    QuadratureError,
    action,
    classify,
    decompose_band,
    fit_curvature,
    period_shift,
    periodicity_defect,
)
from .core import CanonicalMomenta, JetPoint, Polynomial, ReducedMomenta, power_functions
from .dynamics import GeodesicState, IntegrationError, integrate
from .gallery import (
    ConvictParams,
    convict_profile,
    convict_spec,
    figure1_suite,
    graph_profile,
    theta_ode_defect,
)
from .poisson import annihilation_defect, casimirs, jacobi_defect, poisson_tensor, tensor_rank
from .synthesis import CurvatureSpec, build_profile, roundtrip_residual, synthesize

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    k: int | None = None
    p: list[float] | None = None
    anchor_x: float = 0.0
    anchor_duds: float = 0.0
    sigma: int = 1
    s_span: float = 50.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    n_samples: int | None = None
    out: str | None = None
    format: str | None = None
    seed: int = 0
    q: list[float] | None = None
    P: list[float] | None = None
    canonical: list[float] | None = None
    figure1: bool = False

    def validate(self) -> "RunConfig":
        if self.k is not None and (int(self.k) != self.k or self.k < 1):
            raise ConfigError(f"k must be a positive integer, got {self.k}")
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {v}")
        if not (math.isfinite(self.s_span) and self.s_span != 0):
            raise ConfigError("s_span must be finite and nonzero")
        if self.sigma not in (1, -1):
            raise ConfigError("sigma must be +1 or -1")
        if not abs(self.anchor_duds) < 1:
            raise ConfigError("anchor_duds must lie strictly inside (-1, 1)")
        if self.n_samples is not None and self.n_samples < 2:
            raise ConfigError("n_samples must be at least 2")
        if self.format not in (None, "csv", "json", "svg"):
            raise ConfigError(f"unknown format {self.format!r}")
        return self


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # every default is None so that unset flags never mask the config file
    common.add_argument("--config", help="JSON file with run parameters; flags take precedence")
    common.add_argument("--k", type=int)
    common.add_argument("--p", type=_floats, help='curvature coefficients "c0,c1,..." in ascending order')
    common.add_argument("--anchor-x", type=float)
    common.add_argument("--anchor-duds", type=float)
    common.add_argument("--sigma", type=int, choices=(1, -1))
    common.add_argument("--s-span", type=float)
    common.add_argument("--rel-tol", type=float)
    common.add_argument("--abs-tol", type=float)
    common.add_argument("--n-samples", type=int)
    common.add_argument("--out", help="output file, or directory for gallery")
    common.add_argument("--format", choices=("csv", "json", "svg"))
    common.add_argument("--seed", type=int)

    ap = argparse.ArgumentParser(prog="jetelastica", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    p_int = sub.add_parser("integrate", parents=[common], help="integrate from a jet point and momenta")
    p_int.add_argument("--q", type=_floats, help="jet point x,u_k,...,u_1,y (default: origin)")
    p_int.add_argument("--P", type=_floats, help="reduced momenta P_1,...,P_{k+2}")
    p_int.add_argument("--canonical", type=_floats, help="canonical momenta p_x,p_1,...,p_k,p_y")
    sub.add_parser("synthesize", parents=[common], help="geodesic with curvature kappa = p(x)")
    sub.add_parser("classify", parents=[common], help="band decomposition and motion classes")
    sub.add_parser("period", parents=[common], help="period, vertical shift and action per interval")
    sub.add_parser("casimirs", parents=[common], help="Casimir polynomials as JSON")
    p_gal = sub.add_parser("gallery", parents=[common], help="named curves as SVG plus a manifest")
    p_gal.add_argument("--figure1", action="store_true", default=None, help="only the three k=2 curves")
    sub.add_parser("verify", parents=[common], help="seeded invariant suite")
    return ap


def load_config(args: argparse.Namespace) -> RunConfig:
    doc: dict = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        # accept the nested anchor form used by curvature spec files
        anchor = doc.pop("anchor", None)
        if isinstance(anchor, dict):
            doc.setdefault("anchor_x", anchor.get("x", 0.0))
            doc.setdefault("anchor_duds", anchor.get("duds", 0.0))
        doc = {key.replace("-", "_"): v for key, v in doc.items()}
    known = {f.name for f in fields(RunConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    for name, value in vars(args).items():
        if name in known and value is not None:
            doc[name] = value
    doc["command"] = args.command
    try:
        cfg = RunConfig(**doc)
        for name in ("anchor_x", "anchor_duds", "s_span", "rel_tol", "abs_tol"):
            setattr(cfg, name, float(getattr(cfg, name)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return cfg.validate()


# -- outputs -------------------------------------------------------------------

def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _note(msg: str, cfg: RunConfig) -> None:
    """Diagnostics go to stdout unless stdout carries the artifact itself."""
    print(msg, file=sys.stdout if cfg.out else sys.stderr)


def _emit_arc(arc, cfg: RunConfig) -> None:
    if (cfg.format or "csv") == "svg":
        _emit(jio.svg_document([(arc.x, arc.u_top)]), cfg.out)
    elif cfg.format == "json":
        table = jio.arc_table(arc)
        _emit(json.dumps({"columns": jio.csv_header(arc.k), "rows": table.tolist()}) + "\n", cfg.out)
    else:
        _emit(jio.csv_text(arc), cfg.out)


def _need(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(f"{cfg.command} needs: {', '.join(missing)}")


def _spec(cfg: RunConfig) -> tuple[CurvatureSpec, int]:
    _need(cfg, "p")
    p = Polynomial(cfg.p)
    k = cfg.k if cfg.k is not None else max(1, int(p.degree) + 1 if p.degree >= 0 else 1)
    if p.degree > k - 1:
        raise ConfigError(f"curvature polynomial of degree {p.degree} needs k >= {p.degree + 1}")
    return CurvatureSpec(p, cfg.anchor_x, cfg.anchor_duds, cfg.sigma), k


# -- commands ------------------------------------------------------------------

def cmd_integrate(cfg: RunConfig) -> int:
    _need(cfg, "k")
    k = cfg.k
    q = JetPoint.origin(k) if cfg.q is None else None
    if cfg.q is not None:
        if len(cfg.q) != k + 2:
            raise ConfigError(f"q needs {k + 2} entries (x, u_k..u_1, y)")
        q = JetPoint.from_array(cfg.q)
    if (cfg.P is None) == (cfg.canonical is None):
        raise ConfigError("give exactly one of P (reduced) or canonical momenta")
    if cfg.P is not None:
        if len(cfg.P) != k + 2:
            raise ConfigError(f"P needs {k + 2} entries")
        P = ReducedMomenta(tuple(cfg.P))
    else:
        c = cfg.canonical
        if len(c) != k + 2:
            raise ConfigError(f"canonical momenta need {k + 2} entries (p_x, p_1..p_k, p_y)")
        P = power_functions(q, CanonicalMomenta(c[0], tuple(c[1:-1]), c[-1]))
    arc = integrate(GeodesicState(q, P), cfg.s_span, cfg.rel_tol, cfg.abs_tol, n_samples=cfg.n_samples)
    _emit_arc(arc, cfg)
    _note(f"maxInvariantDrift = {arc.max_invariant_drift:.6e}", cfg)
    return EXIT_OK


def cmd_synthesize(cfg: RunConfig) -> int:
    spec, k = _spec(cfg)
    arc = synthesize(spec, k, s_span=cfg.s_span, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                     n_samples=cfg.n_samples)
    _emit_arc(arc, cfg)
    res = roundtrip_residual(arc, build_profile(spec, k))
    _note(f"maxInvariantDrift = {arc.max_invariant_drift:.6e}", cfg)
    _note(f"roundtripResidual = {res:.6e}", cfg)
    return EXIT_OK


def cmd_classify(cfg: RunConfig) -> int:
    spec, k = _spec(cfg)
    report = jio.classification_report(build_profile(spec, k))
    _emit(json.dumps(report, indent=2) + "\n", cfg.out)
    return EXIT_OK


def cmd_period(cfg: RunConfig) -> int:
    spec, k = _spec(cfg)
    prof = build_profile(spec, k)
    report = jio.classification_report(prof)
    if cfg.format == "json":
        _emit(json.dumps(report, indent=2) + "\n", cfg.out)
        return EXIT_OK
    lines = [f"{'x0':>14} {'x1':>14} {'class':>22} {'L':>20} {'tau':>20} {'action':>20}"]
    for r in report["intervals"]:
        lines.append(
            f"{r['x0']:14.8g} {r['x1']:14.8g} {r['class']:>22} {str(r['L']):>20} "
            f"{str(r['tau']):>20} {str(r['action']):>20}"
        )
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


def cmd_casimirs(cfg: RunConfig) -> int:
    _need(cfg, "k")
    _emit(casimirs(cfg.k).to_json() + "\n", cfg.out)
    return EXIT_OK


def cmd_gallery(cfg: RunConfig) -> int:
    outdir = Path(cfg.out or "gallery")
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {"curves": []}
    for curve in figure1_suite():
        path = outdir / f"{curve.name}.svg"
        path.write_text(curve.svg)
        prof = convict_profile(ConvictParams(2, 1.0, curve.alpha))
        manifest["curves"].append({
            "name": curve.name, "k": 2, "a": 1.0, "alpha": curve.alpha, "svg": path.name,
            "selfIntersectionsPerPeriod": curve.intersections_per_period,
            "report": jio.classification_report(prof),
        })
    if not cfg.figure1:
        for m in (3, 4, 5):
            prof = graph_profile(m)
            spec = CurvatureSpec(prof.p, 0.0, float(prof.F(0.0)), 1)
            arc = synthesize(spec, m, s_span=cfg.s_span, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)
            path = outdir / f"graph-{m}.svg"
            path.write_text(jio.svg_document([(arc.x, arc.u_top)]))
            manifest["curves"].append({
                "name": f"graph-{m}", "k": m, "svg": path.name,
                "report": jio.classification_report(prof),
            })
        for k in (3, 4):
            params = ConvictParams(k, 1.0, 1.0)
            arc = synthesize(convict_spec(params), k, s_span=cfg.s_span,
                             rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)
            path = outdir / f"convict-k{k}.svg"
            path.write_text(jio.svg_document([(arc.x, arc.u_top)]))
            manifest["curves"].append({
                "name": f"convict-k{k}", "k": k, "a": 1.0, "alpha": 1.0, "svg": path.name,
                "report": jio.classification_report(convict_profile(params)),
            })
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(manifest['curves'])} curves to {outdir}")
    return EXIT_OK


def verify_checks(seed: int) -> list[tuple[str, float, float, bool]]:
    """(name, measured, bound, ok) rows; the numbers are worst cases over samples."""
    rng = np.random.default_rng(seed)
    rows = []

    def add(name, value, bound):
        rows.append((name, float(value), bound, bool(value <= bound)))

    for k in range(1, 5):
        Zs = rng.normal(size=(50, k + 2))
        anti = max(np.max(np.abs(poisson_tensor(Z) + poisson_tensor(Z).T)) for Z in Zs)
        jac = max(jacobi_defect(k, Z) for Z in Zs)
        ranks = {tensor_rank(Z) for Z in Zs}
        add(f"brackets k={k}", max(anti, jac, 0.0 if ranks <= {2} else 1.0), 0.0)
        C = casimirs(k)
        add(f"casimir annihilation k={k}", max(annihilation_defect(c, Z) for c in C for Z in Zs), 1e-12)

    for k in range(1, 4):
        Z = rng.normal(size=k + 2)
        Z[:2] /= math.hypot(Z[0], Z[1])
        arc = integrate(GeodesicState(JetPoint.origin(k), ReducedMomenta(tuple(Z))), 30.0)
        add(f"conservation k={k}", arc.max_invariant_drift, 1e-8)
        _, res = fit_curvature(arc, k - 1)
        add(f"curvature fit k={k}", res, 1e-6)

    for k in (2, 3):
        p = Polynomial(rng.normal(scale=0.5, size=k))
        spec = CurvatureSpec(p, 0.0, float(rng.uniform(-0.5, 0.5)), 1)
        arc = synthesize(spec, k, s_span=20.0)
        add(f"roundtrip k={k}", roundtrip_residual(arc, build_profile(spec, k)), 1e-6)

    prof = build_profile(CurvatureSpec(Polynomial([1.0])), 1)
    pd = period_shift(prof, decompose_band(prof).intervals[0])
    add("period of F=x", abs(pd.L - 2 * math.pi), 1e-10)
    add("shift of F=x", abs(pd.tau), 1e-10)

    prof = convict_profile(ConvictParams(2, 1.0, 0.0))
    iv = decompose_band(prof).intervals[0]
    pd = period_shift(prof, iv)
    arc = synthesize(CurvatureSpec(prof.p, 0.0, float(prof.F(0.0))), 2, s_span=2.5 * pd.L)
    add("periodicity pseudo-sinusoid", max(periodicity_defect(arc, pd.L, pd.tau)), 1e-6)
    h = 1e-4
    dI = (action(prof, iv, 0.5 + h) - action(prof, iv, 0.5 - h)) / (2 * h)
    add("action-period pseudo-sinusoid", abs(dI - pd.L), 1e-4)

    params = ConvictParams(2, 1.0, 1.0)
    arc = synthesize(convict_spec(params), 2, s_span=30.0)
    add("theta ODE convict k=2", theta_ode_defect(arc, params), 1e-8)
    cls = classify(decompose_band(prof).intervals[0], prof.p)
    add("pseudo-sinusoid periodic", 0.0 if cls.value == "Periodic" else 1.0, 0.0)
    return rows


def cmd_verify(cfg: RunConfig) -> int:
    rows = verify_checks(cfg.seed)
    print(f"seed = {cfg.seed}")
    print(f"{'check':<34} {'measured':>12} {'bound':>10}  result")
    for name, val, bound, ok in rows:
        print(f"{name:<34} {val:12.3e} {bound:10.1e}  {'PASS' if ok else 'FAIL'}")
    failed = sum(not r[3] for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} checks passed")
    if cfg.out:
        Path(cfg.out).write_text(json.dumps({
            "seed": cfg.seed,
            "checks": [{"name": n, "measured": v, "bound": b, "ok": ok} for n, v, b, ok in rows],
        }, indent=2) + "\n")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


COMMANDS = {
    "integrate": cmd_integrate,
    "synthesize": cmd_synthesize,
    "classify": cmd_classify,
    "period": cmd_period,
    "casimirs": cmd_casimirs,
    "gallery": cmd_gallery,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, QuadratureError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # raised by the library's own argument validation
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
