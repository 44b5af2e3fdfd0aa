"""Area fractions of Q-cell families, bounds on the meta distribution, and the scaled-cell recipe."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import oracle
from .cells import QCell, all_cells, scale_cell
from .deploy import Deployment
from .mathfn import DomainError
from .oracle import OracleOptions
from .qos import REGULARITY, QosSpec, Regime, UnsupportedFormula, select_nu, stringency

CLOSED_FORM_KINDS = ("square", "triangular", "ppp")
# rho^2 eta_Q(rho) as rho -> infinity, and -d eta_Q/d rho at rho = 1
ASYMPTOTIC_CONSTANT = {"triangular": 2 * math.pi / math.sqrt(3), "square": math.pi, "ppp": 1.0}
NEAR_ONE_SLOPE = {"triangular": 10.0 / 9.0, "square": 4.0 / 3.0, "ppp": 2.0}


class RecipeNotApplicable(ValueError):
    """The scaled-cell recipe needs the stringent regime."""


def _check_rho(rho: float, strict: bool = True) -> None:
    ok = rho > 1.0 if strict else rho >= 1.0
    if not ok:
        raise DomainError(f"rho must be {'>' if strict else '>='} 1, got {rho}")


def eta_closed_form(kind: str, rho: float) -> float:
    """Q-cell area fraction of the square lattice, triangular lattice or PPP."""
    _check_rho(rho)
    r2 = rho * rho
    if kind == "ppp":
        return 1.0 / r2
    den = (r2 - 1.0) ** 2
    if kind == "square":
        s = math.sqrt(2 * r2 - 1)
        return (4 * r2 * math.atan((s - 1) / (s + 1)) - 2 * s + 2) / den
    if kind == "triangular":
        r = math.sqrt(4 * r2 - 1)
        s3 = math.sqrt(3.0)
        return (4 * s3 * r2 * math.atan((r - s3) / (s3 * r + 1)) - s3 * r + 3) / den
    raise UnsupportedFormula(f"no closed-form area fraction for {kind!r}; use eta_empirical")


def eta_upper_bound(rho: float) -> float:
    """Upper bound 4/(1+rho)^2 on the Q-cell area fraction of any deployment."""
    _check_rho(rho, strict=False)
    return 4.0 / (1.0 + rho) ** 2


def eta_approx(rho: float) -> float:
    _check_rho(rho, strict=False)
    return 1.5 / rho**2 - 0.5 * math.exp(-3.0 * (rho - 1.0))


def asymptotics(kind: str, rho: float) -> dict[str, float]:
    """First-order expansion near rho = 1 and the rho^-2 law at infinity."""
    if kind not in ASYMPTOTIC_CONSTANT:
        raise UnsupportedFormula(f"no asymptotics for {kind!r}")
    return {
        "near_one": 1.0 - NEAR_ONE_SLOPE[kind] * (rho - 1.0),
        "at_infinity": ASYMPTOTIC_CONSTANT[kind] / rho**2,
    }


@dataclass(frozen=True)
class MdBounds:
    md_upper_general: float
    md_upper_ppp: float
    uncovered_lower: float


def bounds(spec: QosSpec) -> MdBounds:
    """Upper bounds on the meta distribution and the matching lower bound on the uncovered fraction."""
    rep = stringency(spec)
    if rep.regime is not Regime.STRINGENT:
        return MdBounds(1.0, 1.0, 0.0)
    general = eta_upper_bound(rep.rho)
    # rho^-2 written through sigma so it also holds for delta != 1/2
    ppp = min(1.0, rep.sigma ** (-spec.delta))
    return MdBounds(general, ppp, 1.0 - general)


def eta_of_cells(cells: Iterable[QCell], dep: Deployment) -> float:
    """Window estimate sum |cell| / |window| over the cells of window owners."""
    total = 0.0
    for c in cells:
        if c.region is None:
            raise DomainError("area fraction is undefined for unbounded cells")
        total += c.area()
    return total / dep.window_area


def eta_empirical(dep: Deployment, rho: float, *, refined: bool = False,
                  rho_star: Optional[float] = None) -> float:
    """Empirical Q-cell (or refined-cell) area fraction over the owners inside the window."""
    _check_rho(rho)
    return eta_of_cells(all_cells(dep, rho, refined=refined, rho_star=rho_star), dep)


@dataclass
class AreaFractionReport:
    kind: str
    rho: float
    eta_closed: Optional[float]
    eta_empirical: Optional[float]
    eta_upper_bound: float
    eta_ppp: float
    eta_approx: float

    def check(self) -> list[str]:
        problems = []
        for name in ("eta_closed", "eta_empirical", "eta_upper_bound", "eta_ppp", "eta_approx"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                problems.append(f"{name}={v} outside [0, 1]")
        if self.eta_closed is not None and self.eta_closed > self.eta_upper_bound:
            problems.append("closed form exceeds the universal bound")
        return problems


def area_fraction_report(kind: str, rho: float, dep: Optional[Deployment] = None) -> AreaFractionReport:
    closed = eta_closed_form(kind, rho) if kind in CLOSED_FORM_KINDS else None
    emp = eta_empirical(dep, rho) if dep is not None else None
    return AreaFractionReport(kind, rho, closed, emp, eta_upper_bound(rho), rho**-2, eta_approx(rho))


def measure_eta_c(dep: Deployment, spec: QosSpec, resolution: int,
                  opts: OracleOptions = OracleOptions()) -> tuple[float, oracle.ReliabilityField]:
    """Meta distribution estimated as the covered fraction of an oracle grid over the window."""
    fld = oracle.reliability_grid(dep, spec, resolution, opts)
    return oracle.covered_area_fraction(fld, spec.u), fld


@dataclass
class RecipeReport:
    sigma: float
    rho: float
    rho_star: float
    nu: float
    nu_source: str
    eta_qstar: float
    eta_qhat: float
    eta_c: Optional[float] = None
    cells: int = 0
    flags: dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def recipe_scaled_cells(
    dep: Deployment,
    spec: QosSpec,
    nu_source: str = "heuristic",
    *,
    nu: Optional[float] = None,
    g: Optional[float] = None,
    eta_c: Optional[float] = None,
    resolution: int = 0,
    opts: OracleOptions = OracleOptions(),
) -> tuple[list[QCell], RecipeReport]:
    """Scaled refined cells of every window owner.

    ``nu_source`` is ``explicit`` (needs ``nu``), ``measured_md`` (uses ``eta_c``
    or, if absent, measures it on a ``resolution`` grid) or ``heuristic``
    (regularity ``g``, defaulting to the table entry for the deployment kind).
    """
    rep = stringency(spec)
    if rep.regime is not Regime.STRINGENT:
        raise RecipeNotApplicable(f"recipe needs the stringent regime, sigma = {rep.sigma:.6g}")
    refined = all_cells(dep, rep.rho, refined=True, rho_star=rep.rho_star)
    eta_qstar = eta_of_cells(refined, dep)

    if nu_source == "explicit":
        if nu is None:
            raise DomainError("explicit nu source needs a value")
        nu_val, src = select_nu(spec.delta, explicit=nu)
    elif nu_source == "measured_md":
        if eta_c is None:
            if resolution <= 0:
                raise DomainError("measured MD needs eta_c or a grid resolution")
            eta_c, _ = measure_eta_c(dep, spec, resolution, opts)
        nu_val, src = select_nu(spec.delta, eta_c=eta_c, eta_qstar=eta_qstar)
    elif nu_source == "heuristic":
        if g is None:
            if dep.kind == "perturbed" and dep.variance is not None:
                from .qos import regularity_of_perturbed_lattice
                g = regularity_of_perturbed_lattice(dep.variance)
            elif dep.kind in REGULARITY:
                g = REGULARITY[dep.kind]
            else:
                raise DomainError(f"no default regularity for {dep.kind!r} deployments; pass g")
        nu_val, src = select_nu(spec.delta, g=g)
    else:
        raise DomainError(f"unknown nu source {nu_source!r}")

    scaled = [scale_cell(c, nu_val) for c in refined]
    flags: dict[str, int] = {}
    for c in refined:
        for f in c.flags:
            flags[f] = flags.get(f, 0) + 1
    report = RecipeReport(rep.sigma, rep.rho, rep.rho_star, nu_val, src, eta_qstar,
                          nu_val * eta_qstar, eta_c, len(scaled), flags)
    return scaled, report


@dataclass(frozen=True)
class PooledBoundary:
    mean: float
    pooled_variance: float
    cell_mean_variance: float
    cells: int
    samples: int


def pooled_boundary_stats(cells: Iterable, dep: Deployment, spec: QosSpec,
                          opts: OracleOptions = OracleOptions(), n: Optional[int] = None) -> PooledBoundary:
    """Reliability statistics over the boundaries of many cells.

    ``pooled_variance`` is taken over all boundary samples together;
    ``cell_mean_variance`` is the spread of the per-boundary means.
    """
    means, pooled = [], []
    for c in cells:
        pts = oracle.boundary_samples(c, n)
        v, _ = oracle.reliabilities(pts, dep, spec, opts)
        means.append(v.mean())
        pooled.append(v)
    if not pooled:
        raise DomainError("no boundaries given")
    allv = np.concatenate(pooled)
    return PooledBoundary(float(allv.mean()), float(allv.var()), float(np.var(means)),
                          len(means), len(allv))


KEY_FIELDS = ("kind", "rho", "theta", "u", "alpha", "p", "q", "seed")


def rows_to_csv(rows: list[dict], value_fields: Optional[list[str]] = None) -> str:
    """CSV text with the parameter key columns first; floats use the shortest round-trip form."""
    if value_fields is None:
        value_fields = sorted({k for r in rows for k in r} - set(KEY_FIELDS))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(KEY_FIELDS) + value_fields)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in list(KEY_FIELDS) + value_fields])
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v)
    return str(v)
