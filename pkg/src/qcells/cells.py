"""Q cells, interference-cloned and refined cells, and their scaled versions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .deploy import Deployment
from .geom import (
    Arc,
    ConvexArcRegion,
    Disk,
    ExclusionDisk,
    GeometryError,
    HalfPlane,
    Packed,
    apollonius,
    assemble,
    convex_region,
    envelope,
)
from .qos import QosSpec, stringency

KINDS = ("standard", "cloned", "refined", "scaled")
_FIRST_BATCH = 12


@dataclass
class QCell:
    owner: int
    kind: str
    rho: float
    region: Optional[ConvexArcRegion]
    strong_interferers: list[int] = field(default_factory=list)
    corners: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    exclusions: list[ExclusionDisk] = field(default_factory=list)
    center: tuple[float, float] = (0.0, 0.0)
    cuts: list[HalfPlane] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @property
    def is_lax(self) -> bool:
        return self.region is None

    def area(self) -> float:
        if self.region is None:
            return math.inf
        return self.region.area()

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.region is None:
            ok = np.ones(pts.shape[:-1], dtype=bool)
            for e in self.exclusions:
                ok &= e.contains(pts, tol)
            return ok
        return self.region.contains(pts, tol)


def _check_owner(owner: int, dep: Deployment) -> None:
    if len(dep) < 2:
        raise GeometryError("need at least 2 transmitters")
    if not 0 <= owner < len(dep):
        raise IndexError(f"owner index {owner} out of range for {len(dep)} transmitters")


def _neighbors(dep: Deployment, owner: int, k: int):
    k = min(k + 1, len(dep))
    d, idx = dep.tree.query(dep.points[owner], k=k)
    d, idx = np.atleast_1d(d), np.atleast_1d(idx)
    sel = idx != owner
    return d[sel], idx[sel]


def _ball(dep: Deployment, owner: int, radius: float):
    x = dep.points[owner]
    idx = np.array(dep.tree.query_ball_point(x, radius), dtype=int)
    idx = idx[idx != owner]
    d = np.hypot(*(dep.points[idx] - x).T) if len(idx) else np.zeros(0)
    order = np.argsort(d, kind="stable")
    return d[order], idx[order]


def _window_box(dep: Deployment):
    x0, y0, x1, y1 = dep.expanded_window
    pad = max(x1 - x0, y1 - y0)
    x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
    return [
        HalfPlane((x0, 0.0), 0.0),
        HalfPlane((x1, 0.0), math.pi),
        HalfPlane((0.0, y0), 0.5 * math.pi),
        HalfPlane((0.0, y1), 1.5 * math.pi),
    ]


def _region_from(dep, owner, rho, idx):
    x = dep.points[owner]
    if rho > 1.0:
        v = dep.points[idx] - x
        b = np.hypot(v[:, 0], v[:, 1])
        if (b == 0).any():
            raise GeometryError("transmitter and interferer coincide")
        c = 1.0 / (1.0 - rho * rho)  # center offset as a fraction of b
        C = x + c * v
        R = rho * abs(c) * b
        pk = Packed(C, R, np.zeros((0, 2)), np.zeros((0, 2)))
        verts, owners = envelope(pk, x)
        cons = [Disk((float(C[k, 0]), float(C[k, 1])), float(R[k])) for k in owners]
        uniq = {k: d for k, d in zip(owners, cons)}
        return assemble([uniq[k] for k in owners], [int(idx[k]) for k in owners], verts)
    cons = [apollonius(x, dep.points[i], rho) for i in idx]
    tags = [int(i) for i in idx]
    box = _window_box(dep)
    cons += box
    tags += [f"box{k}" for k in range(len(box))]
    return convex_region(cons, x, tags)


def qcell(owner: int, dep: Deployment, rho: float, kind: str = "standard") -> QCell:
    """Q cell of transmitter ``owner`` at distance ratio ``rho``.

    For rho > 1 the cell is the intersection of Apollonius disks.  Only
    interferers that can reach the cell are used: the disk of an interferer at
    distance d' contains the ball of radius d'/(1+rho) around the owner, so
    once the running cell lies inside that ball every farther interferer is
    redundant.  For rho = 1 the cell is the open Voronoi cell, clipped to a
    box well beyond the expanded window for hull points.  For rho < 1 the cell
    is unbounded and is reported through its exclusion disks.
    """
    _check_owner(owner, dep)
    if not rho > 0:
        raise GeometryError(f"rho must be positive, got {rho}")
    x = tuple(float(v) for v in dep.points[owner])
    if rho < 1.0:
        excl = [apollonius(x, dep.points[i], rho) for i in range(len(dep)) if i != owner]
        return QCell(owner, kind, rho, None, [i for i in range(len(dep)) if i != owner],
                     exclusions=excl, center=x)
    reach = (1.0 + rho) if rho > 1.0 else 2.0
    d, idx = _neighbors(dep, owner, _FIRST_BATCH)
    searched = d[-1]
    region = _region_from(dep, owner, rho, idx)
    while True:
        need = reach * region.max_distance(x)
        if len(idx) == len(dep) - 1 or searched >= need:
            break
        searched = need * (1 + 1e-12)
        d, idx = _ball(dep, owner, searched)
        region = _region_from(dep, owner, rho, idx)
    strong = [t for t in region.tags if isinstance(t, int)]
    return QCell(owner, kind, rho, region, strong, region.vertices.copy(), center=x)


def corner_cuts(cell: QCell) -> list[HalfPlane]:
    """Half-planes through each corner of ``cell`` whose boundary bisects the two arc tangents.

    The inward normal is the reversed mean of the two arcs' outward normals at
    the corner, so the line is a supporting line of the cell and the owner lies
    strictly inside.
    """
    reg = cell.region
    if reg is None or reg.empty or len(reg.vertices) < 2:
        return []
    cuts = []
    m = len(reg.edges)
    for k in range(m):
        e_in, e_out = reg.edges[k - 1], reg.edges[k]
        q = reg.vertices[k]
        normals = []
        for e in (e_in, e_out):
            if not isinstance(e, Arc):
                raise GeometryError("corner cuts need arc edges on both sides")
            c = reg.supports[e.support].center
            v = q - np.asarray(c)
            normals.append(v / math.hypot(*v))
        n = normals[0] + normals[1]
        if math.hypot(*n) < 1e-15:
            continue
        cuts.append(HalfPlane((float(q[0]), float(q[1])), math.atan2(-n[1], -n[0])))
    return cuts


def refined_qcell(owner: int, dep: Deployment, spec: QosSpec | None = None,
                  rho: float | None = None, rho_star: float | None = None) -> QCell:
    """Refined Q cell: Q(rho) with the corners of the interference-cloned cell Q(rho*) cut off."""
    if spec is not None:
        rep = stringency(spec)
        rho = rep.rho if rho is None else rho
        rho_star = rep.rho_star if rho_star is None else rho_star
    if rho is None or rho_star is None:
        raise ValueError("need a QosSpec or explicit rho and rho_star")
    if not rho > 1.0:
        raise GeometryError(f"refined cells need the stringent regime (rho > 1), got rho = {rho}")
    base = qcell(owner, dep, rho)
    cloned = qcell(owner, dep, rho_star, kind="cloned")
    flags = []
    if cloned.region is None or cloned.region.empty:
        flags.append("cloned-cell-empty")
    cuts = corner_cuts(cloned)
    if not cuts:
        return replace(base, kind="refined", flags=flags)
    reg = base.region
    cons = list(reg.supports) + cuts
    tags = list(reg.tags) + [f"cut{k}" for k in range(len(cuts))]
    region = convex_region(cons, base.center, tags)
    strong = [t for t in region.tags if isinstance(t, int)]
    return QCell(owner, "refined", rho, region, strong, region.vertices.copy(),
                 center=base.center, cuts=cuts, flags=flags)


def scale_cell(cell: QCell, nu: float) -> QCell:
    """Homothety of ``cell`` about its owner with area factor ``nu``."""
    if cell.region is None or cell.region.empty:
        raise GeometryError("cannot scale an empty or unbounded cell")
    if not 0.0 < nu <= 1.0:
        raise GeometryError(f"nu must lie in (0, 1], got {nu}")
    s = math.sqrt(nu)
    region = cell.region.transformed(cell.center, s)
    cuts = [HalfPlane(tuple(np.asarray(cell.center) + s * (np.asarray(h.anchor) - cell.center)),
                      h.inward_normal_angle) for h in cell.cuts]
    return replace(cell, kind="scaled", region=region, corners=region.vertices.copy(), cuts=cuts)


def region_area(region: ConvexArcRegion) -> float:
    region.validate()
    return region.area()


def all_cells(dep: Deployment, rho: float, owners=None, refined: bool = False,
              rho_star: float | None = None) -> list[QCell]:
    owners = dep.inner_indices if owners is None else owners
    if refined:
        return [refined_qcell(int(i), dep, rho=rho, rho_star=rho_star) for i in owners]
    return [qcell(int(i), dep, rho) for i in owners]
