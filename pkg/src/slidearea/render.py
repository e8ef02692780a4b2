"""Deterministic SVG figures."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from .curves import Curve, vec

INDEX_COLORS = {0: "blue", 1: "green", 2: "orange", 3: "red"}
DEGENERATE_COLOR = "black"
SAMPLES = 512


def index_color(index: Optional[int], degenerate: bool = False) -> str:
    if degenerate or index is None:
        return DEGENERATE_COLOR
    return INDEX_COLORS.get(index, DEGENERATE_COLOR)


@dataclass
class Path:
    points: np.ndarray
    closed: bool = False
    stroke: str = "black"
    fill: str = "none"
    width: float = 1.0          # in units of the base stroke width


@dataclass
class Marker:
    point: np.ndarray
    color: str = "black"
    size: float = 1.0


@dataclass
class InfiniteLine:
    """Line through ``point`` along ``direction``; clipped to the scene box."""

    point: np.ndarray
    direction: np.ndarray
    stroke: str = "gray"
    width: float = 0.5


@dataclass
class Label:
    point: np.ndarray
    text: str
    color: str = "black"


@dataclass
class Scene:
    items: list = field(default_factory=list)
    viewbox: Optional[tuple] = None     # (xmin, ymin, xmax, ymax); auto-fit when None
    style: dict = field(default_factory=dict)

    # -- builders -------------------------------------------------------------
    def add_curve(self, curve: Curve, stroke: str = "black", width: float = 1.0):
        if curve.is_point:
            self.items.append(Marker(curve.eval(0.0), stroke, 0.8))
        elif curve.period is None and curve.domain is None and curve.kind == "line":
            self.items.append(InfiniteLine(curve.eval(0.0), curve.derivative(0.0, 1), stroke, width))
        else:
            self.items.append(Path(curve.sample(SAMPLES), curve.period is not None, stroke, "none", width))
        return self

    def add_polygon(self, points, stroke: str = "black", fill: str = "none", width: float = 1.0):
        self.items.append(Path(np.asarray(points, float), True, stroke, fill, width))
        return self

    def add_polyline(self, points, stroke: str = "black", width: float = 1.0):
        self.items.append(Path(np.asarray(points, float), False, stroke, "none", width))
        return self

    def add_marker(self, point, color: str = "black", size: float = 1.0):
        self.items.append(Marker(vec(point), color, size))
        return self

    def add_line(self, point, direction, stroke: str = "gray", width: float = 0.5):
        self.items.append(InfiniteLine(vec(point), vec(direction), stroke, width))
        return self

    def add_label(self, point, text: str, color: str = "black"):
        self.items.append(Label(vec(point), str(text), color))
        return self

    def add_critical(self, critical, tangents: bool = False):
        """Polygon and vertex markers colored by Morse index."""
        cfg = critical.config
        P = cfg.points()
        color = index_color(critical.index, bool(critical.morse.nullity))
        self.add_polygon(P, stroke=color, width=1.2)
        for p in P:
            self.add_marker(p, color, 1.0)
        if tangents:
            for c, t, p in zip(cfg.curves, cfg.t, P):
                if not c.is_point:
                    self.add_line(p, c.derivative(t, 1), stroke=color, width=0.4)
        return self

    # -- geometry -------------------------------------------------------------
    def bounds(self) -> tuple:
        if self.viewbox is not None:
            return tuple(float(x) for x in self.viewbox)
        pts = []
        for it in self.items:
            if isinstance(it, Path):
                pts.append(it.points)
            elif isinstance(it, (Marker, Label)):
                pts.append(it.point[None, :])
        if not pts:
            pts = [it.point[None, :] for it in self.items if isinstance(it, InfiniteLine)]
        P = np.vstack(pts)
        lo, hi = P.min(axis=0), P.max(axis=0)
        span = np.maximum(hi - lo, 1e-9)
        if np.all(hi - lo == 0):
            span = np.array([1.0, 1.0])
        pad = 0.05 * span
        # keep the aspect from collapsing for nearly straight figures
        pad = np.maximum(pad, 0.05 * float(span.max()))
        return (float(lo[0] - pad[0]), float(lo[1] - pad[1]), float(hi[0] + pad[0]), float(hi[1] + pad[1]))


def clip_line(point, direction, box) -> Optional[np.ndarray]:
    """Segment of the line inside the box (Liang-Barsky), or None."""
    p, d = vec(point), vec(direction)
    x0, y0, x1, y1 = box
    lo, hi = -np.inf, np.inf
    for pk, dk, a, b in ((p[0], d[0], x0, x1), (p[1], d[1], y0, y1)):
        if dk == 0:
            if pk < a or pk > b:
                return None
            continue
        s1, s2 = (a - pk) / dk, (b - pk) / dk
        lo, hi = max(lo, min(s1, s2)), min(hi, max(s1, s2))
    if lo > hi:
        return None
    return np.array([p + lo * d, p + hi * d])


def _f(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _pts(P: np.ndarray) -> str:
    # y axis flipped so the figure reads in math orientation
    return " ".join(f"{_f(x)},{_f(-y)}" for x, y in P)


def render_svg(scene: Scene, width_px: int = 600) -> str:
    if not scene.items:
        raise ValueError("cannot render an empty scene")
    box = scene.bounds()
    x0, y0, x1, y1 = box
    w, h = x1 - x0, y1 - y0
    base = float(scene.style.get("stroke", 0.004)) * max(w, h)
    height_px = max(1, int(round(width_px * h / w)))
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width_px}" height="{height_px}" '
        f'viewBox="{_f(x0)} {_f(-y1)} {_f(w)} {_f(h)}">',
        f'<rect x="{_f(x0)}" y="{_f(-y1)}" width="{_f(w)}" height="{_f(h)}" fill="white"/>',
    ]
    for it in scene.items:
        if isinstance(it, Path):
            P = it.points
            if not np.all(np.isfinite(P)):
                raise ValueError("non-finite coordinates in scene")
            d = "M " + _pts(P[:1]) + (" L " + _pts(P[1:]) if len(P) > 1 else "") + (" Z" if it.closed else "")
            out.append(f'<path d="{d}" fill="{it.fill}" stroke="{it.stroke}" '
                       f'stroke-width="{_f(base * it.width)}"/>')
        elif isinstance(it, Marker):
            out.append(f'<circle cx="{_f(it.point[0])}" cy="{_f(-it.point[1])}" '
                       f'r="{_f(2.5 * base * it.size)}" fill="{it.color}"/>')
        elif isinstance(it, InfiniteLine):
            seg = clip_line(it.point, it.direction, box)
            if seg is None:
                continue
            out.append(f'<line x1="{_f(seg[0, 0])}" y1="{_f(-seg[0, 1])}" x2="{_f(seg[1, 0])}" '
                       f'y2="{_f(-seg[1, 1])}" stroke="{it.stroke}" stroke-width="{_f(base * it.width)}"/>')
        elif isinstance(it, Label):
            out.append(f'<text x="{_f(it.point[0])}" y="{_f(-it.point[1])}" font-size="{_f(8 * base)}" '
                       f'fill="{it.color}">{escape(it.text)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
