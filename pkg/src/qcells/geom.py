"""Exact Q-cell geometry: Apollonius disks, convex arc regions, refined and scaled cells.

A convex region is built from constraints (open disks and open half-planes)
that all contain a known interior point.  Seen from that point the region is
star-shaped, so its boundary is the lower envelope of the constraints' exit
distances along rays.  Vertices are the pairwise boundary intersections that
survive every constraint; the constraint owning each angular gap between
consecutive vertices is the one with the smallest exit distance at the gap's
midpoint.  This stays exact and handles tangencies without special cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi
MERGE_TOL = 1e-9  # relative vertex merge distance


class GeometryError(ValueError):
    """Degenerate geometric input (coincident points, malformed chains)."""


def canon_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    elif a > math.pi:
        a -= TWO_PI
    return a


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError(f"disk radius must be positive, got {self.radius}")

    def margin(self, pts: np.ndarray) -> np.ndarray:
        d = np.asarray(pts, dtype=float) - self.center
        return self.radius - np.hypot(d[..., 0], d[..., 1])

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        return self.margin(pts) > -tol

    @property
    def area(self) -> float:
        return math.pi * self.radius**2


@dataclass(frozen=True)
class HalfPlane:
    """Open half-plane {y : (y - anchor) . n > 0}, n = (cos a, sin a) the inward normal."""

    anchor: tuple[float, float]
    inward_normal_angle: float

    def __post_init__(self):
        object.__setattr__(self, "inward_normal_angle", self.inward_normal_angle % TWO_PI)

    @property
    def normal(self) -> np.ndarray:
        return np.array([math.cos(self.inward_normal_angle), math.sin(self.inward_normal_angle)])

    def margin(self, pts: np.ndarray) -> np.ndarray:
        d = np.asarray(pts, dtype=float) - self.anchor
        n = self.normal
        return d[..., 0] * n[0] + d[..., 1] * n[1]

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        return self.margin(pts) > -tol


@dataclass(frozen=True)
class ExclusionDisk:
    """Complement of a closed disk; the lax-regime (rho < 1) Apollonius set around an interferer."""

    disk: Disk

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        return self.disk.margin(pts) < tol


Constraint = Union[Disk, HalfPlane]


@dataclass(frozen=True)
class Arc:
    support: int
    a0: float  # start angle about the support's center, canonical
    sweep: float  # counterclockwise extent in (0, 2 pi]

    @property
    def a1(self) -> float:
        return self.a0 + self.sweep


@dataclass(frozen=True)
class Segment:
    support: int
    start: tuple[float, float]
    end: tuple[float, float]


Edge = Union[Arc, Segment]


@dataclass(frozen=True)
class ConvexArcRegion:
    """Convex region bounded by a counterclockwise chain of arcs and segments.

    ``supports`` holds only the constraints that contribute an edge, so their
    intersection equals the region.  ``tags`` carries caller bookkeeping for
    each support (interferer index, cut label, ...).
    """

    supports: tuple[Constraint, ...]
    edges: tuple[Edge, ...]
    vertices: np.ndarray
    tags: tuple = ()
    empty: bool = False

    @classmethod
    def make_empty(cls) -> "ConvexArcRegion":
        return cls((), (), np.zeros((0, 2)), (), True)

    @property
    def arc_count(self) -> int:
        return sum(isinstance(e, Arc) for e in self.edges)

    def edge_endpoints(self, e: Edge) -> tuple[np.ndarray, np.ndarray]:
        if isinstance(e, Segment):
            return np.asarray(e.start), np.asarray(e.end)
        d = self.supports[e.support]
        c, r = np.asarray(d.center), d.radius
        return (
            c + r * np.array([math.cos(e.a0), math.sin(e.a0)]),
            c + r * np.array([math.cos(e.a1), math.sin(e.a1)]),
        )

    def validate(self, rtol: float = 1e-9) -> None:
        """Check chain closure; raise GeometryError on a malformed chain."""
        if self.empty:
            return
        if not self.edges:
            raise GeometryError("non-empty region without edges")
        scale = self.diameter_bound()
        for k, e in enumerate(self.edges):
            _, end = self.edge_endpoints(e)
            start, _ = self.edge_endpoints(self.edges[(k + 1) % len(self.edges)])
            if np.hypot(*(end - start)) > rtol * max(scale, 1.0):
                raise GeometryError(f"edge {k} does not join edge {(k + 1) % len(self.edges)}")

    def diameter_bound(self) -> float:
        if self.empty:
            return 0.0
        rs = [s.radius for s in self.supports if isinstance(s, Disk)]
        span = np.ptp(self.vertices, axis=0).max() if len(self.vertices) else 0.0
        return max([2 * r for r in rs] + [span])

    def area(self) -> float:
        """Green's-theorem area: shoelace of the vertex chain plus the circular segments."""
        if self.empty:
            return 0.0
        total = 0.0
        for e in self.edges:
            if isinstance(e, Segment):
                (x0, y0), (x1, y1) = e.start, e.end
                total += x0 * y1 - x1 * y0
            else:
                d = self.supports[e.support]
                (cx, cy), r = d.center, d.radius
                total += r * r * e.sweep + r * (
                    cx * (math.sin(e.a1) - math.sin(e.a0)) - cy * (math.cos(e.a1) - math.cos(e.a0))
                )
        return 0.5 * total

    def perimeter(self) -> float:
        return float(sum(self._edge_lengths()))

    def _edge_lengths(self) -> list[float]:
        out = []
        for e in self.edges:
            if isinstance(e, Segment):
                out.append(math.dist(e.start, e.end))
            else:
                out.append(self.supports[e.support].radius * e.sweep)
        return out

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.empty:
            return np.zeros(pts.shape[:-1], dtype=bool)
        ok = np.ones(pts.shape[:-1], dtype=bool)
        for s in self.supports:
            ok &= s.contains(pts, tol)
        return ok

    def sample_boundary(self, n: int) -> np.ndarray:
        """n points equally spaced in arclength (midpoint rule) along the boundary."""
        if self.empty:
            raise GeometryError("cannot sample the boundary of an empty region")
        lengths = np.array(self._edge_lengths())
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        s = (np.arange(n) + 0.5) * cum[-1] / n
        idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(self.edges) - 1)
        out = np.empty((n, 2))
        for k, e in enumerate(self.edges):
            sel = idx == k
            if not sel.any():
                continue
            t = (s[sel] - cum[k]) / lengths[k] if lengths[k] > 0 else np.zeros(sel.sum())
            if isinstance(e, Segment):
                a, b = np.asarray(e.start), np.asarray(e.end)
                out[sel] = a + t[:, None] * (b - a)
            else:
                d = self.supports[e.support]
                ang = e.a0 + t * e.sweep
                out[sel] = np.asarray(d.center) + d.radius * np.column_stack([np.cos(ang), np.sin(ang)])
        return out

    def max_distance(self, point) -> float:
        """Largest distance from ``point`` to the region."""
        if self.empty:
            return 0.0
        x = np.asarray(point, dtype=float)
        best = float(np.hypot(*(self.vertices - x).T).max()) if len(self.vertices) else 0.0
        for e in self.edges:
            if isinstance(e, Arc):
                d = self.supports[e.support]
                v = np.asarray(d.center) - x
                dist = math.hypot(*v)
                if dist == 0.0:
                    best = max(best, d.radius)
                    continue
                far = math.atan2(v[1], v[0])
                if (far - e.a0) % TWO_PI <= e.sweep:
                    best = max(best, dist + d.radius)
        return best

    def exit_distance(self, origin, angles) -> np.ndarray:
        """Distance from an interior ``origin`` to the boundary along each direction."""
        o = np.asarray(origin, dtype=float)
        dirs = np.column_stack([np.cos(angles), np.sin(angles)])
        return Packed.of(list(self.supports))[0].exits(o, dirs).min(axis=0)

    def transformed(self, about, factor: float) -> "ConvexArcRegion":
        """Homothety about ``about`` with linear factor ``factor``."""
        if self.empty:
            return self
        x = np.asarray(about, dtype=float)

        def mp(p):
            return tuple(float(v) for v in x + factor * (np.asarray(p) - x))

        sup = []
        for s in self.supports:
            if isinstance(s, Disk):
                sup.append(Disk(mp(s.center), s.radius * factor))
            else:
                sup.append(HalfPlane(mp(s.anchor), s.inward_normal_angle))
        edges = []
        for e in self.edges:
            if isinstance(e, Segment):
                edges.append(Segment(e.support, mp(e.start), mp(e.end)))
            else:
                edges.append(e)
        verts = x + factor * (self.vertices - x)
        return ConvexArcRegion(tuple(sup), tuple(edges), verts, self.tags)


# ---------------------------------------------------------------------------
# envelope construction on packed constraint arrays


@dataclass(frozen=True)
class Packed:
    """Constraints as arrays: disks (centers C, radii R) then half-planes (anchors A, inward normals N)."""

    C: np.ndarray
    R: np.ndarray
    A: np.ndarray
    N: np.ndarray

    @property
    def n_disks(self) -> int:
        return len(self.R)

    def __len__(self):
        return len(self.R) + len(self.A)

    @classmethod
    def of(cls, constraints) -> "tuple[Packed, list[int]]":
        """Pack constraints; also return the packed position -> input position map."""
        di = [k for k, c in enumerate(constraints) if isinstance(c, Disk)]
        li = [k for k, c in enumerate(constraints) if isinstance(c, HalfPlane)]
        C = np.array([constraints[k].center for k in di], dtype=float).reshape(-1, 2)
        R = np.array([constraints[k].radius for k in di], dtype=float)
        A = np.array([constraints[k].anchor for k in li], dtype=float).reshape(-1, 2)
        N = np.array([constraints[k].normal for k in li], dtype=float).reshape(-1, 2)
        return cls(C, R, A, N), di + li

    def margins(self, pts: np.ndarray) -> np.ndarray:
        """(n_constraints, n_pts) signed margins; positive inside."""
        pts = np.atleast_2d(pts)
        dm = self.R[:, None] - np.hypot(pts[None, :, 0] - self.C[:, None, 0], pts[None, :, 1] - self.C[:, None, 1])
        lm = (pts[None, :, 0] - self.A[:, None, 0]) * self.N[:, None, 0] + (
            pts[None, :, 1] - self.A[:, None, 1]
        ) * self.N[:, None, 1]
        return np.vstack([dm, lm])

    def exits(self, o: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """(n_constraints, n_dirs) exit distances from interior point o."""
        w = o - self.C
        b = w @ dirs.T
        cc = (w * w).sum(axis=1) - self.R**2
        de = -b + np.sqrt(np.maximum(b * b - cc[:, None], 0.0))
        dn = self.N @ dirs.T
        m = ((o - self.A) * self.N).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            le = np.where(dn < 0, -m[:, None] / dn, np.inf)
        return np.vstack([de, le])

    def candidates(self) -> np.ndarray:
        """All pairwise boundary intersection points."""
        C, R, A, N = self.C, self.R, self.A, self.N
        pts = []
        if len(R) >= 2:
            i, j = np.triu_indices(len(R), 1)
            dv = C[j] - C[i]
            dd = np.hypot(dv[:, 0], dv[:, 1])
            ok = (dd > 0) & (dd <= R[i] + R[j]) & (dd >= np.abs(R[i] - R[j]))
            if ok.any():
                i, j, dv, dd = i[ok], j[ok], dv[ok], dd[ok]
                a = (dd**2 + R[i] ** 2 - R[j] ** 2) / (2 * dd)
                h = np.sqrt(np.maximum(R[i] ** 2 - a**2, 0.0))
                ev = dv / dd[:, None]
                base = C[i] + a[:, None] * ev
                perp = np.column_stack([-ev[:, 1], ev[:, 0]])
                pts += [base + h[:, None] * perp, base - h[:, None] * perp]
        if len(A) and len(R):
            T = np.column_stack([-N[:, 1], N[:, 0]])
            w = A[:, None, :] - C[None, :, :]  # (lines, disks, 2)
            b = (T[:, None, :] * w).sum(axis=2)
            disc = b * b - ((w * w).sum(axis=2) - R[None, :] ** 2)
            li, di = np.nonzero(disc >= 0)
            if len(li):
                s = np.sqrt(disc[li, di])
                for sign in (1.0, -1.0):
                    pts.append(A[li] + ((-b[li, di] + sign * s))[:, None] * T[li])
        if len(A) >= 2:
            i, j = np.triu_indices(len(A), 1)
            det = N[i, 0] * N[j, 1] - N[i, 1] * N[j, 0]
            ok = np.abs(det) > 1e-14
            i, j, det = i[ok], j[ok], det[ok]
            r1 = (N[i] * A[i]).sum(axis=1)
            r2 = (N[j] * A[j]).sum(axis=1)
            x = (r1 * N[j, 1] - r2 * N[i, 1]) / det
            y = (N[i, 0] * r2 - N[j, 0] * r1) / det
            pts.append(np.column_stack([x, y]))
        if not pts:
            return np.zeros((0, 2))
        return np.vstack(pts)


@njit(cache=True)
def _exit(C, R, A, N, o, dx, dy, k):
    nd = R.shape[0]
    if k < nd:
        wx = o[0] - C[k, 0]
        wy = o[1] - C[k, 1]
        b = dx * wx + dy * wy
        cc = wx * wx + wy * wy - R[k] * R[k]
        return -b + math.sqrt(max(b * b - cc, 0.0))
    l = k - nd
    dn = dx * N[l, 0] + dy * N[l, 1]
    if dn >= 0.0:
        return np.inf
    return -((o[0] - A[l, 0]) * N[l, 0] + (o[1] - A[l, 1]) * N[l, 1]) / dn


@njit(cache=True)
def _margin(C, R, A, N, x, y, k):
    nd = R.shape[0]
    if k < nd:
        return R[k] - math.hypot(x - C[k, 0], y - C[k, 1])
    l = k - nd
    return (x - A[l, 0]) * N[l, 0] + (y - A[l, 1]) * N[l, 1]


@njit(cache=True)
def _envelope_kernel(C, R, A, N, o, tol):
    """Returns (vertices, owners, status); status 0 ok, 1 interior point outside, 2 unbounded."""
    nd = R.shape[0]
    nl = A.shape[0]
    n = nd + nl
    for k in range(n):
        if not _margin(C, R, A, N, o[0], o[1], k) > 0.0:
            return np.zeros((0, 2)), np.zeros(0, np.int64), 1
    P = np.empty((nd * nd + 2 * nl * nd + nl * nl + 1, 2))
    m = 0
    for i in range(nd):
        for j in range(i + 1, nd):
            dx = C[j, 0] - C[i, 0]
            dy = C[j, 1] - C[i, 1]
            dd = math.hypot(dx, dy)
            if dd == 0.0 or dd > R[i] + R[j] or dd < abs(R[i] - R[j]):
                continue
            a = (dd * dd + R[i] * R[i] - R[j] * R[j]) / (2.0 * dd)
            h = math.sqrt(max(R[i] * R[i] - a * a, 0.0))
            ex = dx / dd
            ey = dy / dd
            bx = C[i, 0] + a * ex
            by = C[i, 1] + a * ey
            P[m, 0] = bx - h * ey
            P[m, 1] = by + h * ex
            P[m + 1, 0] = bx + h * ey
            P[m + 1, 1] = by - h * ex
            m += 2
    for l in range(nl):
        tx = -N[l, 1]
        ty = N[l, 0]
        for i in range(nd):
            wx = A[l, 0] - C[i, 0]
            wy = A[l, 1] - C[i, 1]
            b = tx * wx + ty * wy
            disc = b * b - (wx * wx + wy * wy - R[i] * R[i])
            if disc < 0.0:
                continue
            s = math.sqrt(disc)
            P[m, 0] = A[l, 0] + (-b + s) * tx
            P[m, 1] = A[l, 1] + (-b + s) * ty
            P[m + 1, 0] = A[l, 0] + (-b - s) * tx
            P[m + 1, 1] = A[l, 1] + (-b - s) * ty
            m += 2
    for l in range(nl):
        for k in range(l + 1, nl):
            det = N[l, 0] * N[k, 1] - N[l, 1] * N[k, 0]
            if abs(det) <= 1e-14:
                continue
            r1 = N[l, 0] * A[l, 0] + N[l, 1] * A[l, 1]
            r2 = N[k, 0] * A[k, 0] + N[k, 1] * A[k, 1]
            P[m, 0] = (r1 * N[k, 1] - r2 * N[l, 1]) / det
            P[m, 1] = (N[l, 0] * r2 - N[k, 0] * r1) / det
            m += 1

    keep = np.zeros(m, np.bool_)
    nk = 0
    for p in range(m):
        ok = True
        for k in range(n):
            if _margin(C, R, A, N, P[p, 0], P[p, 1], k) <= -tol:
                ok = False
                break
        keep[p] = ok
        if ok:
            nk += 1
    V = np.empty((nk, 2))
    ang = np.empty(nk)
    q = 0
    for p in range(m):
        if keep[p]:
            V[q] = P[p]
            ang[q] = math.atan2(P[p, 1] - o[1], P[p, 0] - o[0])
            q += 1
    order = np.argsort(ang)
    V = V[order]
    ang = ang[order]
    # merge near-coincident vertices (tangencies, concurrent circles)
    sel = np.zeros(nk, np.int64)
    ns = 0
    for p in range(nk):
        if ns == 0 or math.hypot(V[p, 0] - V[sel[ns - 1], 0], V[p, 1] - V[sel[ns - 1], 1]) > tol:
            sel[ns] = p
            ns += 1
    if ns > 1 and math.hypot(V[sel[0], 0] - V[sel[ns - 1], 0], V[sel[0], 1] - V[sel[ns - 1], 1]) <= tol:
        ns -= 1
    if ns >= 2:
        owner = np.empty(ns, np.int64)
        for g in range(ns):
            a0 = ang[sel[g]]
            a1 = ang[sel[(g + 1) % ns]]
            gap = (a1 - a0) % (2.0 * math.pi)
            if gap == 0.0:
                gap = 2.0 * math.pi
            mid = a0 + 0.5 * gap
            dx = math.cos(mid)
            dy = math.sin(mid)
            best = np.inf
            bk = -1
            for k in range(n):
                t = _exit(C, R, A, N, o, dx, dy, k)
                if t < best:
                    best = t
                    bk = k
            owner[g] = bk
        cnt = 0
        for g in range(ns):
            if owner[g - 1] != owner[g]:
                cnt += 1
        if cnt >= 2:
            Vo = np.empty((cnt, 2))
            Oo = np.empty(cnt, np.int64)
            c = 0
            for g in range(ns):
                if owner[g - 1] != owner[g]:
                    Vo[c] = V[sel[g]]
                    Oo[c] = owner[g]
                    c += 1
            return Vo, Oo, 0
    best = np.inf
    bk = -1
    for k in range(n):
        t = _exit(C, R, A, N, o, 1.0, 0.0, k)
        if t < best:
            best = t
            bk = k
    out = np.zeros(1, np.int64)
    out[0] = bk
    if bk < 0 or bk >= nd:
        return np.zeros((0, 2)), out, 2
    return np.zeros((0, 2)), out, 0


def envelope(pk: Packed, o: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Vertices (ccw about o) and, per vertex, the packed index owning the edge that starts there.

    An empty vertex array with a single owner means one disk bounds the region.
    """
    if len(pk) == 0:
        raise GeometryError("need at least one constraint")
    o = np.ascontiguousarray(o, dtype=float)
    scale = float(pk.R.max()) if len(pk.R) else 0.0
    scale = max(scale, float(np.abs(pk.margins(o[None, :])).max()))
    verts, owners, status = _envelope_kernel(
        np.ascontiguousarray(pk.C, dtype=float), np.ascontiguousarray(pk.R, dtype=float),
        np.ascontiguousarray(pk.A, dtype=float), np.ascontiguousarray(pk.N, dtype=float),
        o, MERGE_TOL * scale,
    )
    if status == 1:
        raise GeometryError("interior point is not strictly inside every constraint")
    if status == 2:
        raise GeometryError("region is unbounded")
    return verts, [int(k) for k in owners]


def convex_region(constraints: Sequence[Constraint], interior, tags: Sequence = ()) -> ConvexArcRegion:
    """Intersection of open disks and half-planes that all contain ``interior``."""
    constraints = list(constraints)
    tags = list(tags) if tags else list(range(len(constraints)))
    pk, pos = Packed.of(constraints)
    verts, owners = envelope(pk, np.asarray(interior, dtype=float))
    return assemble([constraints[pos[k]] for k in owners], [tags[pos[k]] for k in owners], verts)


def assemble(owner_cons, owner_tags, verts) -> ConvexArcRegion:
    """Build the region from per-vertex edge owners (constraint objects and tags)."""
    if len(verts) == 0:
        return ConvexArcRegion((owner_cons[0],), (Arc(0, math.pi, TWO_PI),), np.zeros((0, 2)), (owner_tags[0],))
    used: dict[int, int] = {}
    sup, stags = [], []
    for c, t in zip(owner_cons, owner_tags):
        if id(c) not in used:
            used[id(c)] = len(sup)
            sup.append(c)
            stags.append(t)
    edges = []
    m = len(verts)
    for k in range(m):
        c = owner_cons[k]
        p0, p1 = verts[k], verts[(k + 1) % m]
        if isinstance(c, Disk):
            a0 = math.atan2(p0[1] - c.center[1], p0[0] - c.center[0])
            a1 = math.atan2(p1[1] - c.center[1], p1[0] - c.center[0])
            sweep = (a1 - a0) % TWO_PI
            if sweep == 0.0:
                sweep = TWO_PI
            edges.append(Arc(used[id(c)], canon_angle(a0), sweep))
        else:
            edges.append(Segment(used[id(c)], (float(p0[0]), float(p0[1])), (float(p1[0]), float(p1[1]))))
    return ConvexArcRegion(tuple(sup), tuple(edges), np.array(verts, dtype=float), tuple(stags))


def intersect_disks(disks: Sequence[Disk]) -> ConvexArcRegion:
    """Exact intersection of open disks; returns an empty region if it has no interior."""
    disks = list(disks)
    if not disks:
        raise GeometryError("need at least one disk")
    if len(disks) == 1:
        return convex_region(disks, disks[0].center)
    pk, _ = Packed.of(disks)
    C, R = pk.C, pk.R
    cands = [C, pk.candidates()]
    i, j = np.triu_indices(len(disks), 1)
    dv = C[j] - C[i]
    dd = np.hypot(dv[:, 0], dv[:, 1])
    nz = dd > 0
    ev = dv[nz] / dd[nz, None]
    lo = np.maximum(-R[i[nz]], dd[nz] - R[j[nz]])
    hi = np.minimum(R[i[nz]], dd[nz] + R[j[nz]])
    cands.append(C[i[nz]] + (0.5 * (lo + hi))[:, None] * ev)
    cand = np.vstack(cands)
    feas = cand[pk.margins(cand).min(axis=0) > -MERGE_TOL * R.max()]
    if not len(feas):
        return ConvexArcRegion.make_empty()
    o = feas.mean(axis=0)
    if not pk.margins(o[None, :]).min() > 1e-12 * R.max():
        return ConvexArcRegion.make_empty()
    return convex_region(disks, o)


# ---------------------------------------------------------------------------
# Apollonius sets and the Moebius characterisation


def apollonius(x, x_prime, rho: float) -> Union[Disk, HalfPlane, ExclusionDisk]:
    """Locations whose distance ratio |y - x'| / |y - x| exceeds rho."""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(x_prime, dtype=float)
    v = xp - x
    b = math.hypot(*v)
    if b == 0.0:
        raise GeometryError("transmitter and interferer coincide")
    if not rho > 0:
        raise GeometryError(f"rho must be positive, got {rho}")
    if rho == 1.0:
        return HalfPlane(tuple(x + 0.5 * v), math.atan2(-v[1], -v[0]))
    c = b / (1.0 - rho * rho)
    center = tuple(float(t) for t in x + (c / b) * v)
    disk = Disk(center, rho * abs(c))
    return disk if rho > 1.0 else ExclusionDisk(disk)


def mobius_image(x, x_prime, rho: float, z: complex) -> complex:
    """Image of z under the map sending the left half-plane onto the Apollonius set of (x, x').

    The result is placed in the plane: translated to x and rotated toward x'.
    """
    x = complex(*x)
    xp = complex(*x_prime)
    b = abs(xp - x)
    if b == 0:
        raise GeometryError("transmitter and interferer coincide")
    rot = (xp - x) / b
    if rho == 1.0:
        w = z + b / 2
    else:
        c = b / (1.0 - rho * rho)
        if z == -rho * c:
            raise GeometryError("pole of the Moebius map")
        w = c + rho * abs(c) * (z - rho * c) / (z + rho * c)
    return x + w * rot
