"""Ground-truth conditional success probabilities P(SIR_y > theta | X).

Rayleigh fading (p = q = 1) has the exact product form
``prod_i 1 / (1 + theta (r1/ri)^alpha)``; every other Nakagami-(p, q) model
is estimated by Monte Carlo over fading draws.  Monte Carlo draws for a
location come from its own counter-based stream keyed by (seed, location
index), so results never depend on thread count or evaluation order.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import rng
from .cells import QCell, qcell
from .deploy import Deployment
from .geom import ConvexArcRegion
from .qos import QosSpec, stringency

DEFAULT_GRID_SAMPLES = 10_000
DEFAULT_BOUNDARY_SAMPLES = 100_000
MIN_CUTOFF_FACTOR = 10.0  # cutoff radius is at least this multiple of r1
_BLOCK = 2_000_000  # distance-matrix entries per block


class AmbiguousServer(ValueError):
    """The two nearest transmitters are equidistant within tolerance."""


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class OracleOptions:
    samples: int = DEFAULT_GRID_SAMPLES
    seed: int = 0
    interferer_cutoff: Optional[float] = None  # radius; None keeps every transmitter
    estimator: str = "auto"  # auto | exact | monte_carlo
    tie_tol: float = 1e-9

    def resolved_estimator(self, spec: QosSpec) -> str:
        if self.estimator == "auto":
            return "exact" if spec.fading.is_rayleigh else "monte_carlo"
        if self.estimator == "exact" and not spec.fading.is_rayleigh:
            raise OracleError("the exact estimator needs Rayleigh fading")
        if self.estimator not in ("exact", "monte_carlo"):
            raise OracleError(f"unknown estimator {self.estimator!r}")
        return self.estimator


@dataclass
class ReliabilityField:
    grid: np.ndarray  # (resolution, resolution), row k at y = ys[k]
    resolution: int
    window: tuple[float, float, float, float]
    estimator: str
    samples: Optional[int]
    seed: Optional[int]
    xs: np.ndarray = field(repr=False, default=None)
    ys: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class BoundaryStats:
    mean: float
    variance: float
    min: float
    max: float
    sample_count: int


@dataclass
class CoverageBoundary:
    owner: int
    angles: np.ndarray
    radii: np.ndarray
    points: np.ndarray
    unresolved: np.ndarray
    caveat: str = "radial tracing assumes the coverage cell is star-shaped about its owner"

    def area(self) -> float:
        x, y = self.points[:, 0], self.points[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QCA_THREADS", "1")))
    except ValueError:
        return 1


def _warn_alpha(spec: QosSpec, opts: OracleOptions) -> None:
    if opts.interferer_cutoff is not None and spec.alpha <= 2.5:
        warnings.warn(
            f"alpha = {spec.alpha} <= 2.5: far interference is significant and the "
            "interferer cutoff may bias reliabilities beyond tolerance",
            stacklevel=3,
        )


def _servers(Y, dep: Deployment, server, tie_tol, strict):
    if server is not None:
        s = np.full(len(Y), int(server))
        r1 = np.hypot(*(Y - dep.points[server]).T)
        return s, r1
    k = min(2, len(dep))
    d, idx = dep.tree.query(Y, k=k)
    # lowest index wins exact ties; the KD tree does not promise that
    tie = np.abs(d[:, 1] - d[:, 0]) <= tie_tol * np.maximum(d[:, 0], 1e-300)
    if strict and tie.any():
        raise AmbiguousServer("location is equidistant to its two nearest transmitters")
    s = np.where(tie, np.minimum(idx[:, 0], idx[:, 1]), idx[:, 0])
    return s, d[:, 0]


def _candidates(Y, dep: Deployment, radius: np.ndarray):
    """Indices of transmitters possibly within ``radius[i]`` of some point of the block."""
    lo, hi = Y.min(axis=0), Y.max(axis=0)
    c = 0.5 * (lo + hi)
    R = 0.5 * math.hypot(*(hi - lo)) + float(radius.max())
    return np.array(dep.tree.query_ball_point(c, R), dtype=int)


def _blocks(Y: np.ndarray, tile: float):
    """Group point indices into spatial tiles of side ``tile``."""
    keys = np.floor(Y / tile).astype(np.int64)
    _, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    order = np.argsort(inv, kind="stable")
    bounds = np.flatnonzero(np.diff(inv[order])) + 1
    return np.split(order, bounds)


def _exact_block(Y, s, r1, P, cand, spec, cutoff, max_interferers):
    D = np.hypot(Y[:, None, 0] - P[cand][None, :, 0], Y[:, None, 1] - P[cand][None, :, 1])
    D[cand[None, :] == s[:, None]] = np.inf
    if cutoff is not None:
        D[D > cutoff[:, None]] = np.inf
    if max_interferers is not None:
        kk = min(max_interferers, D.shape[1])
        D = np.partition(D, kk - 1, axis=1)[:, :kk] if kk < D.shape[1] else D
    with np.errstate(divide="ignore"):
        ratio = (r1[:, None] / D) ** spec.alpha
    return np.exp(-np.log1p(spec.theta * ratio).sum(axis=1))


def _mc_point(y_r1, dists, spec, samples, gen):
    p, q = spec.fading.p, spec.fading.q
    h1 = gen.gamma(p, 1.0 / p, samples) if math.isfinite(p) else np.ones(samples)
    g = dists ** (-spec.alpha)
    if math.isfinite(q):
        hi = gen.gamma(q, 1.0 / q, (samples, len(dists)))
        interf = hi @ g
    else:
        interf = np.full(samples, g.sum())
    return float(np.mean(h1 * y_r1 ** (-spec.alpha) > spec.theta * interf))


def reliabilities(
    Y,
    dep: Deployment,
    spec: QosSpec,
    opts: OracleOptions = OracleOptions(),
    *,
    server: Optional[int] = None,
    max_interferers: Optional[int] = None,
    index_offset: int = 0,
    strict: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized reliabilities and their standard errors at locations ``Y``.

    ``server`` forces the serving transmitter (default: nearest, ties to the
    lower index).  ``max_interferers`` keeps only that many nearest
    interferers.  Monte Carlo location ``i`` draws from the stream keyed by
    ``index_offset + i``.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    est = opts.resolved_estimator(spec)
    _warn_alpha(spec, opts)
    s, r1 = _servers(Y, dep, server, opts.tie_tol, strict)
    P = dep.points
    cutoff = None
    if opts.interferer_cutoff is not None:
        cutoff = np.maximum(opts.interferer_cutoff, MIN_CUTOFF_FACTOR * r1)
    out = np.empty(len(Y))
    err = np.zeros(len(Y))

    if est == "exact":
        if cutoff is None:
            cand = np.arange(len(P))
            step = max(1, _BLOCK // len(P))
            for a in range(0, len(Y), step):
                sl = slice(a, a + step)
                out[sl] = _exact_block(Y[sl], s[sl], r1[sl], P, cand, spec, None, max_interferers)
        else:
            tile = max(float(opts.interferer_cutoff) / 4.0, 1e-12)
            for blk in _blocks(Y, tile):
                cand = _candidates(Y[blk], dep, cutoff[blk])
                out[blk] = _exact_block(Y[blk], s[blk], r1[blk], P, cand, spec, cutoff[blk], max_interferers)
        return out, err

    for i in range(len(Y)):
        d = np.hypot(*(P - Y[i]).T)
        d[s[i]] = np.inf
        if cutoff is not None:
            d[d > cutoff[i]] = np.inf
        d = d[np.isfinite(d)]
        if max_interferers is not None:
            d = np.sort(d)[:max_interferers]
        gen = rng.stream(opts.seed, rng.FADING, index_offset + i)
        out[i] = _mc_point(r1[i], d, spec, opts.samples, gen)
        err[i] = math.sqrt(max(out[i] * (1 - out[i]), 0.0) / opts.samples)
    return out, err


def reliability(y, dep: Deployment, spec: QosSpec, opts: OracleOptions = OracleOptions(),
                on_tie: str = "error") -> float:
    """P(SIR_y > theta | X) with nearest-transmitter association.

    ``on_tie="error"`` raises :class:`AmbiguousServer` when the two nearest
    transmitters are equidistant within ``opts.tie_tol``; ``"lower"`` serves
    from the lower index.
    """
    val, _ = reliabilities([y], dep, spec, opts, strict=(on_tie == "error"))
    return float(val[0])


def reliability_two_nearest(y, dep: Deployment, spec: QosSpec, opts: OracleOptions = OracleOptions(),
                            on_tie: str = "error") -> float:
    """Reliability with interference from the two nearest interferers only."""
    if len(dep) < 3:
        raise OracleError("two-interferer reliability needs at least 3 transmitters")
    val, _ = reliabilities([y], dep, spec, opts, max_interferers=2, strict=(on_tie == "error"))
    return float(val[0])


def _default_tol(dep: Deployment) -> float:
    lam = dep.density
    if lam is None:
        x0, y0, x1, y1 = dep.expanded_window
        lam = len(dep) / ((x1 - x0) * (y1 - y0))
    return 1e-4 * math.sqrt(1.0 / lam)


def coverage_boundary(owner: int, dep: Deployment, spec: QosSpec, opts: OracleOptions = OracleOptions(),
                      rays: int = 720, tol: Optional[float] = None, cell: Optional[QCell] = None) -> CoverageBoundary:
    """Trace the level set {reliability = u} of the owner's coverage cell along rays.

    Each ray is bracketed by the owner (reliability near 1) and the exit point
    of the standard Q cell, where reliability cannot exceed u; bisection then
    runs to radial tolerance ``tol``.  The owner serves every ray point.
    Rays whose bracket shows no sign change are flagged unresolved.
    """
    rep = stringency(spec)
    if not rep.rho > 1.0:
        raise OracleError("coverage tracing needs the stringent regime")
    tol = _default_tol(dep) if tol is None else tol
    x = dep.points[owner]
    if cell is None:
        cell = qcell(owner, dep, rep.rho)
    ang = (np.arange(rays) + 0.5) * (2 * math.pi / rays)
    dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    hi = cell.region.exit_distance(x, ang)
    lo = np.zeros(rays)
    u = spec.u

    def rel(r, idx):
        pts = x + r[:, None] * dirs[idx]
        if opts.resolved_estimator(spec) == "exact":
            v, _ = reliabilities(pts, dep, spec, opts, server=owner)
            return v
        # common random numbers along a ray keep the estimate monotone-ish in r
        vals = np.empty(len(idx))
        for k, j in enumerate(idx):
            v, _ = reliabilities(pts[k:k + 1], dep, spec, opts, server=owner,
                                 index_offset=owner * rays + int(j))
            vals[k] = v[0]
        return vals

    all_idx = np.arange(rays)
    at_hi = rel(hi, all_idx)
    unresolved = at_hi > u + 1e-9
    boundary_eq = np.abs(at_hi - u) <= 1e-12
    active = ~unresolved & ~boundary_eq
    lo_a, hi_a = lo.copy(), hi.copy()
    while active.any():
        idx = np.flatnonzero(active)
        mid = 0.5 * (lo_a[idx] + hi_a[idx])
        v = rel(mid, idx)
        up = v > u
        lo_a[idx[up]] = mid[up]
        hi_a[idx[~up]] = mid[~up]
        active[idx] = (hi_a[idx] - lo_a[idx]) > tol
    radii = np.where(boundary_eq | unresolved, hi, 0.5 * (lo_a + hi_a))
    pts = x + radii[:, None] * dirs
    return CoverageBoundary(owner, ang, radii, pts, unresolved)


def _resample_polyline(poly: np.ndarray, n: int) -> np.ndarray:
    closed = np.vstack([poly, poly[:1]])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = (np.arange(n) + 0.5) * cum[-1] / n
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
    t = (s - cum[k]) / np.where(seg[k] > 0, seg[k], 1.0)
    return closed[k] + t[:, None] * (closed[k + 1] - closed[k])


def boundary_samples(boundary, n: Optional[int] = None) -> np.ndarray:
    """Arclength-uniform samples of a region, cell, or closed polyline (step <= perimeter/1000)."""
    n = 1000 if n is None else max(int(n), 1000)
    if isinstance(boundary, QCell):
        boundary = boundary.region
    if isinstance(boundary, CoverageBoundary):
        boundary = boundary.points
    if isinstance(boundary, ConvexArcRegion):
        return boundary.sample_boundary(n)
    poly = np.asarray(boundary, dtype=float)
    if poly.ndim != 2 or len(poly) < 3:
        raise OracleError("boundary polyline must be a closed chain of at least 3 points")
    return _resample_polyline(poly, n)


def boundary_stats(boundary, dep: Deployment, spec: QosSpec, opts: OracleOptions = OracleOptions(),
                   n: Optional[int] = None) -> BoundaryStats:
    """Mean, variance and range of the reliability along a closed boundary."""
    pts = boundary_samples(boundary, n)
    v, _ = reliabilities(pts, dep, spec, opts)
    return BoundaryStats(float(v.mean()), float(v.var()), float(v.min()), float(v.max()), len(v))


def reliability_grid(dep: Deployment, spec: QosSpec, resolution: int,
                     opts: OracleOptions = OracleOptions()) -> ReliabilityField:
    """Reliability at the centers of a resolution x resolution grid over the inner window."""
    if resolution < 8:
        raise OracleError(f"grid resolution must be at least 8, got {resolution}")
    x0, y0, x1, y1 = dep.window
    xs = x0 + (np.arange(resolution) + 0.5) * (x1 - x0) / resolution
    ys = y0 + (np.arange(resolution) + 0.5) * (y1 - y0) / resolution
    gx, gy = np.meshgrid(xs, ys)
    Y = np.column_stack([gx.ravel(), gy.ravel()])
    est = opts.resolved_estimator(spec)
    chunk = max(resolution, (len(Y) + 63) // 64)
    starts = list(range(0, len(Y), chunk))

    def work(a):
        v, _ = reliabilities(Y[a:a + chunk], dep, spec, opts, index_offset=a)
        return v

    nthreads = _threads()
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            parts = list(ex.map(work, starts))
    else:
        parts = [work(a) for a in starts]
    grid = np.concatenate(parts).reshape(resolution, resolution)
    return ReliabilityField(grid, resolution, dep.window, est,
                            opts.samples if est == "monte_carlo" else None, opts.seed, xs, ys)


def covered_area_fraction(field: ReliabilityField, u: float) -> float:
    """Fraction of grid cells whose reliability exceeds u (window estimate of the MD)."""
    return float(np.mean(field.grid > u))


def field_to_csv(field: ReliabilityField) -> str:
    x0, y0, x1, y1 = field.window
    head = (f"# window={x0:.17g},{y0:.17g},{x1:.17g},{y1:.17g} resolution={field.resolution} "
            f"estimator={field.estimator} samples={field.samples} seed={field.seed}\n")
    rows = "\n".join(",".join(format(v, ".17g") for v in row) for row in field.grid)
    return head + rows + "\n"
