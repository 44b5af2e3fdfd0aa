"""Command-line front end: ``qcells gen|cells|bounds|area|validate``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import analytics, deploy, oracle, render
from .cells import QCell, qcell, refined_qcell
from .deploy import DeploymentError
from .geom import Arc, GeometryError, Segment
from .mathfn import DomainError, FadingModel
from .oracle import OracleOptions
from .qos import QosSpec, Regime, stringency


class ValidationFailure(Exception):
    """A requested run is well-formed but not meaningful (exit status 1)."""


def _floats(n: Optional[int] = None):
    def conv(text: str):
        try:
            vals = [float(v) for v in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
        if n is not None and len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} numbers, got {len(vals)}")
        return vals
    return conv


def _fading(text: str) -> FadingModel:
    try:
        return FadingModel.parse(text)
    except (ValueError, DomainError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_spec(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("QoS")
    g.add_argument("--theta", type=float, default=1.0, help="SIR threshold (linear)")
    g.add_argument("--u", type=float, default=0.8, help="target reliability")
    g.add_argument("--alpha", type=float, default=4.0, help="path loss exponent")
    g.add_argument("--fading", type=_fading, default=FadingModel(1.0, 1.0),
                   help="Nakagami parameters p,q of the fading ratio; 'inf' allowed")


def _add_oracle(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("oracle")
    g.add_argument("--samples", type=int, default=oracle.DEFAULT_GRID_SAMPLES)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--cutoff", type=float, default=None, help="interferer cutoff radius")
    g.add_argument("--estimator", choices=("auto", "exact", "monte_carlo"), default="auto")


def _add_render(p: argparse.ArgumentParser, default_layers: str) -> None:
    g = p.add_argument_group("rendering")
    g.add_argument("--svg", type=Path, default=None)
    g.add_argument("--layers", default=default_layers,
                   help=f"comma-separated subset of {','.join(render.LAYERS)}")
    g.add_argument("--stroke-width", type=float, default=1.5)
    g.add_argument("--color", action="append", default=[], metavar="LAYER=COLOR")
    g.add_argument("--no-timestamp", action="store_true")


def _add_nu(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--nu", type=float, default=None, help="explicit area scaling factor")
    g.add_argument("--nu-from-md", type=int, default=None, metavar="RES",
                   help="measure the MD on a RES x RES oracle grid and set nu = eta_C/eta_Q*")
    g.add_argument("--g", type=float, default=None, help="regularity for the heuristic nu")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcells", description="Q cells and coverage cells of cellular deployments")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a deployment file")
    p.add_argument("--kind", choices=("square", "triangular", "perturbed", "ppp"), required=True)
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--window", type=_floats(4), default=[0.0, 0.0, 10.0, 10.0], help="x0,y0,x1,y1")
    p.add_argument("--guard", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variance", type=float, default=1.0 / 16)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = sub.add_parser("cells", help="Q, refined or scaled cells as JSON and SVG")
    p.add_argument("input", type=Path)
    _add_spec(p)
    p.add_argument("--rho", type=float, default=None, help="override the distance ratio")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--refined", action="store_true")
    mode.add_argument("--scaled", action="store_true")
    _add_nu(p)
    p.add_argument("--owners", type=_floats(), default=None, help="owner indices (default: window owners)")
    p.add_argument("--json", type=Path, default=None, help="cell JSON output (default stdout)")
    _add_render(p, "qcells")

    p = sub.add_parser("bounds", help="stringency, regime and MD bounds")
    _add_spec(p)
    p.add_argument("-o", "--output", type=Path, default=None)

    p = sub.add_parser("area", help="area fractions over a rho sweep")
    p.add_argument("--kind", required=True, choices=("square", "triangular", "perturbed", "ppp", "explicit"))
    p.add_argument("--rho", type=_floats(), required=True, help="one or more comma-separated rho values")
    p.add_argument("--input", type=Path, default=None, help="deployment for the empirical estimate")
    p.add_argument("--empirical", action="store_true", help="generate deployments for the empirical estimate")
    p.add_argument("--window", type=_floats(4), default=[0.0, 0.0, 30.0, 30.0])
    p.add_argument("--seeds", type=_floats(), default=[0.0])
    p.add_argument("--variance", type=float, default=1.0 / 16)
    p.add_argument("-o", "--output", type=Path, default=None)

    p = sub.add_parser("validate", help="oracle grid, boundary statistics and nu measurement")
    p.add_argument("input", type=Path)
    _add_spec(p)
    _add_oracle(p)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--boundary-samples", type=int, default=1000, help="samples per cell boundary")
    p.add_argument("--g", type=float, default=None, help="regularity for the heuristic nu")
    p.add_argument("--csv", type=Path, default=None)
    _add_render(p, "heatmap,refined,scaled")
    return ap


def spec_from(args) -> QosSpec:
    try:
        return QosSpec(args.theta, args.u, args.alpha, args.fading)
    except DomainError as exc:
        raise _Usage(f"--theta/--u/--alpha: {exc}")


class _Usage(Exception):
    pass


def _key(kind, rho, spec: Optional[QosSpec], seed) -> dict:
    d = {"kind": kind, "rho": rho, "seed": seed}
    if spec is not None:
        d.update(theta=spec.theta, u=spec.u, alpha=spec.alpha, p=spec.fading.p, q=spec.fading.q)
    return d


def _write(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def cell_to_json(cell: QCell) -> dict:
    out = {"owner": int(cell.owner), "kind": cell.kind, "rho": cell.rho}
    if cell.region is None:
        out.update(boundary=[], area=None, strong=[int(t) for t in cell.strong_interferers], corners=[],
                   exclusions=[{"cx": e.disk.center[0], "cy": e.disk.center[1], "r": e.disk.radius}
                               for e in cell.exclusions])
        return out
    reg = cell.region
    bnd = []
    for e in reg.edges:
        if isinstance(e, Arc):
            d = reg.supports[e.support]
            bnd.append({"arc": {"cx": d.center[0], "cy": d.center[1], "r": d.radius, "a0": e.a0, "a1": e.a1}})
        else:
            bnd.append({"seg": [list(e.start), list(e.end)]})
    out.update(boundary=bnd, area=reg.area(), strong=[int(t) for t in cell.strong_interferers],
               corners=[[float(x), float(y)] for x, y in cell.corners])
    if cell.flags:
        out["flags"] = cell.flags
    return out


def _style(args) -> render.Style:
    st = render.Style(stroke_width=args.stroke_width)
    for item in args.color:
        name, _, col = item.partition("=")
        if name not in st.colors or not col:
            raise _Usage(f"--color: expected LAYER=COLOR with LAYER in {sorted(st.colors)}, got {item!r}")
        st.colors[name] = col
    return st


def _layers(args) -> list[str]:
    names = [s for s in args.layers.split(",") if s]
    bad = [s for s in names if s not in render.LAYERS]
    if bad:
        raise _Usage(f"--layers: unknown layer(s) {bad}; choose from {','.join(render.LAYERS)}")
    return names


def _load(path: Path):
    try:
        return deploy.load(path)
    except FileNotFoundError:
        raise _Usage(f"input: no such file {path}")


def cmd_gen(args) -> None:
    dep = deploy.generate(args.kind, args.density, tuple(args.window), args.guard, args.seed, args.variance)
    deploy.save(dep, args.output)


def cmd_cells(args) -> None:
    dep = _load(args.input)
    spec = spec_from(args)
    rep = stringency(spec)
    rho = rep.rho if args.rho is None else args.rho
    if not rho > 0:
        raise _Usage(f"--rho must be positive, got {rho}")
    owners = [int(v) for v in (dep.inner_indices if args.owners is None else args.owners)]
    if args.owners is not None and any(not 0 <= o < len(dep) for o in owners):
        raise _Usage(f"--owners: index out of range for {len(dep)} transmitters")
    layers = _layers(args)
    nu_flags = args.nu is not None or args.nu_from_md is not None or args.g is not None
    if nu_flags and not args.scaled:
        raise _Usage("--nu/--nu-from-md/--g need --scaled")
    drawn: dict = {}
    if args.refined or args.scaled:
        if not rho > 1.0:
            raise ValidationFailure(f"--refined/--scaled need the stringent regime, got rho = {rho:.6g}")
        if args.scaled:
            source = "explicit" if args.nu is not None else "measured_md" if args.nu_from_md else "heuristic"
            cells, report = analytics.recipe_scaled_cells(
                dep, spec, source, nu=args.nu, g=args.g, resolution=args.nu_from_md or 0)
            if args.owners is not None:
                cells = [c for c in cells if c.owner in set(owners)]
            sys.stderr.write(f"nu={report.nu:.6g} ({report.nu_source}) eta_Q*={report.eta_qstar:.6g}\n")
            drawn["scaled"] = cells
        else:
            cells = [refined_qcell(o, dep, rho=rho, rho_star=rep.rho_star) for o in owners]
            drawn["refined"] = cells
    else:
        cells = [qcell(o, dep, rho) for o in owners]
        drawn["qcells"] = cells
    if "voronoi" in layers:
        drawn["voronoi"] = [qcell(o, dep, 1.0) for o in owners]
    doc = {"rho": rho, "cells": [cell_to_json(c) for c in cells]}
    _write(json.dumps(doc, indent=1) + "\n", args.json)
    if args.svg is not None:
        want = {k: v for k, v in drawn.items() if k in layers}
        for name in layers:
            if name not in want and name not in ("voronoi",):
                if name in ("qcells", "refined", "scaled"):
                    want[name] = cells
        args.svg.write_text(render.svg(dep.window, dep.points, want, _style(args),
                                       timestamp=not args.no_timestamp), encoding="utf-8")


def cmd_bounds(args) -> None:
    spec = spec_from(args)
    rep = stringency(spec)
    b = analytics.bounds(spec)
    row = _key("", rep.rho, spec, "")
    row.update(sigma=rep.sigma, regime=rep.regime.value, rho_star=rep.rho_star,
               md_upper_general=b.md_upper_general, md_upper_ppp=b.md_upper_ppp,
               uncovered_lower=b.uncovered_lower)
    fields = ["sigma", "regime", "rho_star", "md_upper_general", "md_upper_ppp", "uncovered_lower"]
    _write(analytics.rows_to_csv([row], fields), args.output)


def cmd_area(args) -> None:
    if any(not r > 1.0 for r in args.rho):
        raise _Usage("--rho values must exceed 1")
    deps = []
    if args.input is not None:
        deps = [(_load(args.input), "")]
    elif args.empirical:
        if args.kind == "explicit":
            raise _Usage("--empirical cannot generate explicit deployments; pass --input")
        for s in args.seeds:
            deps.append((deploy.generate(args.kind, 1.0, tuple(args.window), None, int(s), args.variance), int(s)))
    elif args.kind not in analytics.CLOSED_FORM_KINDS:
        raise _Usage(f"--kind {args.kind} has no closed form; pass --input or --empirical")
    rows = []
    for rho in args.rho:
        closed = analytics.eta_closed_form(args.kind, rho) if args.kind in analytics.CLOSED_FORM_KINDS else None
        for dep, seed in deps or [(None, "")]:
            rep = analytics.area_fraction_report(args.kind, rho, None)
            row = _key(args.kind, rho, None, seed)
            row.update(eta_closed=closed,
                       eta_empirical=analytics.eta_empirical(dep, rho) if dep is not None else None,
                       eta_upper_bound=rep.eta_upper_bound, eta_ppp=rep.eta_ppp, eta_approx=rep.eta_approx)
            rows.append(row)
    fields = ["eta_closed", "eta_empirical", "eta_upper_bound", "eta_ppp", "eta_approx"]
    _write(analytics.rows_to_csv(rows, fields), args.output)


def cmd_validate(args) -> int:
    dep = _load(args.input)
    spec = spec_from(args)
    rep = stringency(spec)
    if rep.regime is not Regime.STRINGENT:
        raise ValidationFailure(f"validation needs the stringent regime, sigma = {rep.sigma:.6g}")
    opts = OracleOptions(args.samples, args.seed, args.cutoff, args.estimator)
    eta_c, fld = analytics.measure_eta_c(dep, spec, args.resolution, opts)
    scaled, recipe = analytics.recipe_scaled_cells(dep, spec, "measured_md", eta_c=eta_c, opts=opts)
    owners = [c.owner for c in scaled]
    base = [qcell(o, dep, rep.rho) for o in owners]
    refined = [refined_qcell(o, dep, rho=rep.rho, rho_star=rep.rho_star) for o in owners]
    eta_q = analytics.eta_of_cells(base, dep)
    pu = analytics.pooled_boundary_stats(refined, dep, spec, opts, args.boundary_samples)
    pu_hat = analytics.pooled_boundary_stats(scaled, dep, spec, opts, args.boundary_samples)
    g = args.g if args.g is not None else analytics.REGULARITY.get(dep.kind)

    # a location can only lie in the refined cell of its nearest transmitter
    Y = np.column_stack([c.ravel() for c in np.meshgrid(fld.xs, fld.ys)])
    _, nearest = dep.tree.query(Y)
    inside = np.zeros(len(Y), dtype=bool)
    for o in np.unique(nearest):
        sel = nearest == o
        c = refined_qcell(int(o), dep, rho=rep.rho, rho_star=rep.rho_star)
        inside[sel] = c.contains(Y[sel])
    vals = fld.grid.ravel()
    _, se = oracle.reliabilities(Y[~inside], dep, spec, opts) if (~inside).any() else (None, np.zeros(0))
    outer_ok = bool(np.all(vals[~inside] <= spec.u + 3 * se + 1e-12))
    chain_ok = eta_c <= recipe.eta_qstar + 1e-12 and recipe.eta_qstar <= eta_q + 1e-12
    bound_ok = eta_q <= analytics.eta_upper_bound(rep.rho)

    row = _key(dep.kind, rep.rho, spec, args.seed)
    row.update(sigma=rep.sigma, rho_star=rep.rho_star, eta_c=eta_c, eta_q=eta_q, eta_qstar=recipe.eta_qstar,
               nu=recipe.nu, eta_qhat=recipe.eta_qhat,
               nu_heuristic=analytics.select_nu(spec.delta, g=g)[0] if g is not None else None,
               mean_u=pu.mean, var_u=pu.pooled_variance, mean_u_hat=pu_hat.mean, var_u_hat=pu_hat.pooled_variance,
               outer_bound_ok=outer_ok, chain_ok=chain_ok, upper_bound_ok=bound_ok)
    fields = ["sigma", "rho_star", "eta_c", "eta_q", "eta_qstar", "nu", "eta_qhat", "nu_heuristic",
              "mean_u", "var_u", "mean_u_hat", "var_u_hat", "outer_bound_ok", "chain_ok", "upper_bound_ok"]
    _write(analytics.rows_to_csv([row], fields), args.csv)
    if args.svg is not None:
        layers = _layers(args)
        content = {"heatmap": fld.grid, "qcells": base, "refined": refined, "scaled": scaled,
                   "voronoi": [qcell(o, dep, 1.0) for o in owners]}
        if "coverage" in layers:
            content["coverage"] = [oracle.coverage_boundary(o, dep, spec, opts).points for o in owners]
        args.svg.write_text(render.svg(dep.window, dep.points, {k: content[k] for k in layers},
                                       _style(args), timestamp=not args.no_timestamp), encoding="utf-8")
    if not (outer_ok and chain_ok and bound_ok):
        sys.stderr.write("validation failed: "
                         + ", ".join(n for n, ok in (("outer bound", outer_ok), ("inclusion chain", chain_ok),
                                                      ("universal bound", bound_ok)) if not ok) + "\n")
        return 1
    return 0


COMMANDS = {"gen": cmd_gen, "cells": cmd_cells, "bounds": cmd_bounds, "area": cmd_area, "validate": cmd_validate}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)  # exits with status 2 on usage errors
    try:
        status = COMMANDS[args.command](args)
    except _Usage as exc:
        ap.error(str(exc))
    except ValidationFailure as exc:
        sys.stderr.write(f"qcells {args.command}: {exc}\n")
        return 1
    except (DeploymentError, GeometryError, DomainError, oracle.OracleError) as exc:
        sys.stderr.write(f"qcells {args.command}: {exc}\n")
        return 1
    return int(status or 0)


if __name__ == "__main__":
    sys.exit(main())
