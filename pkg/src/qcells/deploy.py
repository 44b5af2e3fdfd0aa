"""Transmitter deployments: lattices, perturbed lattices, PPP, and explicit point lists."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from . import rng

KINDS = ("square", "triangular", "perturbed", "ppp", "explicit")


class DeploymentError(ValueError):
    """Invalid deployment parameters or a malformed deployment file."""


@dataclass(eq=False)
class Deployment:
    points: np.ndarray
    window: tuple[float, float, float, float]
    guard: float = 0.0
    kind: str = "explicit"
    density: Optional[float] = None
    seed: Optional[int] = None
    variance: Optional[float] = field(default=None)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DeploymentError(f"points must be an (n, 2) array, got shape {pts.shape}")
        if len(pts) < 2:
            raise DeploymentError(f"a deployment needs at least 2 points, got {len(pts)}")
        x0, y0, x1, y1 = (float(v) for v in self.window)
        if not (x1 > x0 and y1 > y0):
            raise DeploymentError(f"degenerate window {self.window}")
        if self.guard < 0:
            raise DeploymentError(f"guard must be nonnegative, got {self.guard}")
        if self.kind not in KINDS:
            raise DeploymentError(f"unknown deployment kind {self.kind!r}")
        pts.setflags(write=False)
        self.points = pts
        self.window = (x0, y0, x1, y1)

    def __len__(self):
        return len(self.points)

    @property
    def expanded_window(self) -> tuple[float, float, float, float]:
        x0, y0, x1, y1 = self.window
        g = self.guard
        return (x0 - g, y0 - g, x1 + g, y1 + g)

    @property
    def window_area(self) -> float:
        x0, y0, x1, y1 = self.window
        return (x1 - x0) * (y1 - y0)

    @cached_property
    def tree(self) -> cKDTree:
        return cKDTree(self.points)

    def in_window(self, pts=None) -> np.ndarray:
        """Mask of points inside the inner (measurement) window, closed on the lower edges."""
        p = self.points if pts is None else np.asarray(pts, dtype=float)
        x0, y0, x1, y1 = self.window
        return (p[..., 0] >= x0) & (p[..., 0] < x1) & (p[..., 1] >= y0) & (p[..., 1] < y1)

    @property
    def inner_indices(self) -> np.ndarray:
        return np.flatnonzero(self.in_window())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "points": [[float(x), float(y)] for x, y in self.points],
            "window": list(self.window),
            "guard": float(self.guard),
            "density": self.density,
            "seed": self.seed,
        }


def default_guard(density: float, rho: Optional[float] = None) -> float:
    """Guard band wide enough that Q cells of window owners see all their strong interferers."""
    a = 1.0 / math.sqrt(density)
    if rho is None or rho <= 1.0:
        return 4.0 * a
    return 2.0 * a * max(1.0, 1.0 / (rho - 1.0))


def _lattice_range(lo, hi, origin, step):
    eps = 1e-9 * step
    i0 = math.ceil((lo - origin - eps) / step)
    i1 = math.floor((hi - origin + eps) / step)
    return np.arange(i0, i1 + 1)


def _square(window, guard, density):
    a = 1.0 / math.sqrt(density)
    x0, y0, x1, y1 = window
    ix = _lattice_range(x0 - guard, x1 + guard, x0, a)
    iy = _lattice_range(y0 - guard, y1 + guard, y0, a)
    gx, gy = np.meshgrid(x0 + ix * a, y0 + iy * a)
    return np.column_stack([gx.ravel(), gy.ravel()])


def _triangular(window, guard, density):
    a = math.sqrt(2.0 / (math.sqrt(3.0) * density))
    h = a * math.sqrt(3.0) / 2.0
    x0, y0, x1, y1 = window
    pts = []
    for j in _lattice_range(y0 - guard, y1 + guard, y0, h):
        off = 0.5 * a * (j % 2)
        xs = x0 + off + _lattice_range(x0 - guard, x1 + guard, x0 + off, a) * a
        pts.append(np.column_stack([xs, np.full(len(xs), y0 + j * h)]))
    return np.vstack(pts)


def generate(
    kind: str,
    density: float = 1.0,
    window=(0.0, 0.0, 10.0, 10.0),
    guard: Optional[float] = None,
    seed: int = 0,
    variance: float = 1.0 / 16,
) -> Deployment:
    """Generate a deployment on ``window`` expanded by ``guard``.

    For ``perturbed`` the Gaussian offsets have variance ``variance * a**2``
    per coordinate, ``a`` the lattice spacing, so ``variance`` is in units of
    the squared spacing (identical to absolute units at density 1).
    """
    if not density > 0:
        raise DeploymentError(f"density must be positive, got {density}")
    x0, y0, x1, y1 = (float(v) for v in window)
    if not (x1 > x0 and y1 > y0):
        raise DeploymentError(f"degenerate window {window}")
    if guard is None:
        guard = default_guard(density)
    if guard < 0:
        raise DeploymentError(f"guard must be nonnegative, got {guard}")
    win = (x0, y0, x1, y1)
    area = (x1 - x0 + 2 * guard) * (y1 - y0 + 2 * guard)
    if density * area < 2:
        raise DeploymentError("fewer than 2 points expected in the expanded window")
    gen = rng.stream(seed, rng.DEPLOY)
    extra = None
    if kind == "square":
        pts = _square(win, guard, density)
    elif kind == "triangular":
        pts = _triangular(win, guard, density)
    elif kind == "perturbed":
        if variance < 0:
            raise DeploymentError(f"variance must be nonnegative, got {variance}")
        pts = _square(win, guard, density)
        sd = math.sqrt(variance / density)
        pts = pts + gen.normal(0.0, sd, size=pts.shape)
        extra = variance
    elif kind == "ppp":
        n = gen.poisson(density * area)
        lo = np.array([x0 - guard, y0 - guard])
        hi = np.array([x1 + guard, y1 + guard])
        pts = lo + gen.random((n, 2)) * (hi - lo)
    else:
        raise DeploymentError(f"cannot generate deployment kind {kind!r}")
    return Deployment(pts, win, guard, kind, density, seed, extra)


def explicit(points, window=None, guard: float = 0.0) -> Deployment:
    """Deployment from a point list; the window defaults to the points' bounding box."""
    pts = np.asarray(points, dtype=float)
    if window is None:
        if pts.ndim != 2 or len(pts) < 2:
            raise DeploymentError("a deployment needs at least 2 points")
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        pad = 0.5 * max(float((hi - lo).max()), 1.0)
        window = (lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad)
    return Deployment(pts, tuple(window), guard, "explicit")


def save(dep: Deployment, path) -> None:
    """Write the JSON deployment file; floats keep 17 significant digits."""
    Path(path).write_text(_dumps(dep.to_dict()) + "\n", encoding="utf-8")


def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def _dumps(d: dict) -> str:
    pts = ",".join(f"[{_fmt(x)},{_fmt(y)}]" for x, y in d["points"])
    win = ",".join(_fmt(v) for v in d["window"])
    return (
        f'{{"kind": {json.dumps(d["kind"])}, "points": [{pts}], "window": [{win}], '
        f'"guard": {_fmt(d["guard"])}, "density": {_fmt(d["density"])}, "seed": {_fmt(d["seed"])}}}'
    )


def load(path) -> Deployment:
    text = Path(path).read_text(encoding="utf-8")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DeploymentError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return from_dict(d, source=str(path))


def from_dict(d: dict, source: str = "<dict>") -> Deployment:
    if not isinstance(d, dict):
        raise DeploymentError(f"{source}: top level must be an object")
    for key in ("kind", "points", "window"):
        if key not in d:
            raise DeploymentError(f"{source}: missing field {key!r}")
    pts = d["points"]
    if not isinstance(pts, list):
        raise DeploymentError(f"{source}: field 'points' must be a list")
    for k, p in enumerate(pts):
        if not (isinstance(p, list) and len(p) == 2 and all(isinstance(v, (int, float)) for v in p)):
            raise DeploymentError(f"{source}: points[{k}] must be a pair of numbers, got {p!r}")
    win = d["window"]
    if not (isinstance(win, list) and len(win) == 4):
        raise DeploymentError(f"{source}: field 'window' must be [x0, y0, x1, y1]")
    try:
        return Deployment(
            np.array(pts, dtype=float).reshape(-1, 2),
            tuple(win),
            float(d.get("guard") or 0.0),
            d["kind"],
            d.get("density"),
            d.get("seed"),
        )
    except DeploymentError as exc:
        raise DeploymentError(f"{source}: {exc}") from exc
