"""SVG output: exact arcs for cells, polylines for traced boundaries, a grayscale reliability heatmap."""

from __future__ import annotations

import datetime as _dt
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .cells import QCell
from .geom import Arc, ConvexArcRegion, Disk, Segment

VIEW = 1000.0
LAYERS = ("heatmap", "voronoi", "qcells", "refined", "scaled", "coverage")


@dataclass
class Style:
    stroke_width: float = 1.5
    colors: dict = field(default_factory=lambda: {
        "voronoi": "#999999",
        "qcells": "#1f4e9c",
        "refined": "#c0392b",
        "scaled": "#2e8b57",
        "coverage": "#000000",
        "points": "#000000",
    })
    point_radius: float = 3.0


class Viewport:
    """Maps the window onto a viewBox 1000 units wide, y pointing up."""

    def __init__(self, window):
        self.x0, self.y0, self.x1, self.y1 = window
        self.s = VIEW / (self.x1 - self.x0)
        self.height = (self.y1 - self.y0) * self.s

    def xy(self, p) -> tuple[float, float]:
        return (p[0] - self.x0) * self.s, (self.y1 - p[1]) * self.s

    def fmt(self, p) -> str:
        x, y = self.xy(p)
        return f"{x:.4f} {y:.4f}"


def _arc_cmd(vp: Viewport, r: float, sweep: float, end) -> str:
    # ccw in the plane turns into sweep-flag 0 once y is flipped
    large = 1 if sweep > math.pi else 0
    rr = r * vp.s
    return f"A {rr:.4f} {rr:.4f} 0 {large} 0 {vp.fmt(end)}"


def region_path(region: ConvexArcRegion, vp: Viewport) -> str:
    if region.empty:
        return ""
    parts = []
    for k, e in enumerate(region.edges):
        a, b = region.edge_endpoints(e)
        if k == 0:
            parts.append(f"M {vp.fmt(a)}")
        if isinstance(e, Segment):
            parts.append(f"L {vp.fmt(b)}")
            continue
        d = region.supports[e.support]
        if e.sweep >= 2 * math.pi - 1e-12:
            # full circle: two half arcs
            c = np.asarray(d.center)
            opp = c + d.radius * np.array([math.cos(e.a0 + math.pi), math.sin(e.a0 + math.pi)])
            parts.append(_arc_cmd(vp, d.radius, math.pi, opp))
            parts.append(_arc_cmd(vp, d.radius, math.pi, b))
        else:
            parts.append(_arc_cmd(vp, d.radius, e.sweep, b))
    parts.append("Z")
    return " ".join(parts)


def _is_box(tag) -> bool:
    return isinstance(tag, str) and tag.startswith("box")


def _boundary_strokes(cells: Iterable[QCell], vp: Viewport, seen: set) -> list[str]:
    """Edge-by-edge strokes, skipping clip-box edges and edges already drawn by a neighbor."""
    out = []
    for c in cells:
        reg = c.region
        if reg is None or reg.empty:
            continue
        for e in reg.edges:
            if _is_box(reg.tags[e.support] if reg.tags else None):
                continue
            a, b = reg.edge_endpoints(e)
            if isinstance(e, Segment):
                key = tuple(sorted([tuple(np.round(a, 9)), tuple(np.round(b, 9))]))
                if key in seen:
                    continue
                seen.add(key)
                out.append(f'<line x1="{vp.xy(a)[0]:.4f}" y1="{vp.xy(a)[1]:.4f}" '
                           f'x2="{vp.xy(b)[0]:.4f}" y2="{vp.xy(b)[1]:.4f}"/>')
            else:
                d = reg.supports[e.support]
                if e.sweep >= 2 * math.pi - 1e-12:
                    cx, cy = vp.xy(d.center)
                    out.append(f'<circle cx="{cx:.4f}" cy="{cy:.4f}" r="{d.radius * vp.s:.4f}"/>')
                else:
                    out.append(f'<path d="M {vp.fmt(a)} {_arc_cmd(vp, d.radius, e.sweep, b)}"/>')
    return out


def _exclusion_strokes(cell: QCell, vp: Viewport) -> list[str]:
    out = []
    for e in cell.exclusions:
        d: Disk = e.disk
        cx, cy = vp.xy(d.center)
        out.append(f'<circle cx="{cx:.4f}" cy="{cy:.4f}" r="{d.radius * vp.s:.4f}"/>')
    return out


def _heatmap(grid: np.ndarray, vp: Viewport, levels: int = 64) -> list[str]:
    """Row-run rectangles of quantized gray; white is reliability 1."""
    n_rows, n_cols = grid.shape
    w = VIEW / n_cols
    h = vp.height / n_rows
    q = np.clip(np.round(np.asarray(grid) * (levels - 1)), 0, levels - 1).astype(int)
    out = []
    for i in range(n_rows):
        y = vp.height - (i + 1) * h
        j = 0
        while j < n_cols:
            k = j
            while k + 1 < n_cols and q[i, k + 1] == q[i, j]:
                k += 1
            g = int(round(255 * q[i, j] / (levels - 1)))
            out.append(f'<rect x="{j * w:.4f}" y="{y:.4f}" width="{(k - j + 1) * w + 0.05:.4f}" '
                       f'height="{h + 0.05:.4f}" fill="rgb({g},{g},{g})"/>')
            j = k + 1
    return out


def svg(
    window,
    points: Optional[np.ndarray] = None,
    layers: Optional[dict] = None,
    style: Style = Style(),
    timestamp: bool = True,
) -> str:
    """Render named layers onto one SVG document.

    ``layers`` maps a layer name to its content: lists of QCell for the cell
    layers, a list of (n, 2) polylines for ``coverage``, a 2-d array for
    ``heatmap``.  Layers are drawn in the fixed order of ``LAYERS``.
    """
    layers = layers or {}
    unknown = set(layers) - set(LAYERS)
    if unknown:
        raise ValueError(f"unknown layers {sorted(unknown)}; choose from {LAYERS}")
    vp = Viewport(window)
    head = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {VIEW:.0f} {vp.height:.4f}">']
    if timestamp:
        head.append(f"<!-- generated {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')} -->")
    body = [f'<clipPath id="win"><rect x="0" y="0" width="{VIEW:.0f}" height="{vp.height:.4f}"/></clipPath>',
            '<g clip-path="url(#win)">']
    for name in LAYERS:
        if name not in layers:
            continue
        content = layers[name]
        if name == "heatmap":
            body.append('<g id="heatmap" shape-rendering="crispEdges">')
            body += _heatmap(np.asarray(content), vp)
            body.append("</g>")
            continue
        color = style.colors.get(name, "#000000")
        body.append(f'<g id="{name}" fill="none" stroke="{color}" stroke-width="{style.stroke_width}">')
        if name == "coverage":
            for poly in content:
                pts = " ".join(vp.fmt(p).replace(" ", ",") for p in poly)
                body.append(f'<polygon points="{pts}"/>')
        else:
            seen: set = set()
            bounded = [c for c in content if c.region is not None]
            body += _boundary_strokes(bounded, vp, seen)
            for c in content:
                if c.region is None:
                    body += _exclusion_strokes(c, vp)
        body.append("</g>")
    if points is not None:
        body.append(f'<g id="points" fill="{style.colors["points"]}">')
        for p in np.asarray(points):
            cx, cy = vp.xy(p)
            body.append(f'<circle cx="{cx:.4f}" cy="{cy:.4f}" r="{style.point_radius}"/>')
        body.append("</g>")
    body.append("</g>")
    return "\n".join(head + body + ["</svg>"]) + "\n"
