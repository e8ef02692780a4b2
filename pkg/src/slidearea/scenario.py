"""Scenario files: ``{"curves": [CurveDesc, ...], "settings": {...}}``."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .curves import Circle, Curve, Ellipse, Line, Point, PolarCurve, Polyline


def curve_from_dict(d: dict) -> Curve:
    kind = d.get("kind")
    try:
        if kind == "point":
            return Point(d["position"])
        if kind == "line":
            return Line(d["base"], d["direction"], tuple(d.get("range", (-10.0, 10.0))))
        if kind == "circle":
            return Circle(d.get("center", (0.0, 0.0)), d["radius"], int(d.get("orientation", 1)))
        if kind == "ellipse":
            return Ellipse(d.get("center", (0.0, 0.0)), float(d["a"]), float(d["b"]),
                           float(d.get("rotation", 0.0)), int(d.get("orientation", 1)))
        if kind == "polyline":
            return Polyline(d["vertices"], bool(d.get("closed", True)))
        if kind == "polar":
            return PolarCurve(d.get("center", (0.0, 0.0)), d.get("radius", 1.0), d.get("harmonics", ()))
    except KeyError as exc:
        raise ValueError(f"{kind} curve is missing field {exc}") from None
    raise ValueError(f"unknown curve kind {kind!r}")


@dataclass
class Scenario:
    name: str
    curves: tuple
    settings: dict = field(default_factory=dict)
    expect: dict = field(default_factory=dict)


def load_scenario(path) -> Scenario:
    path = Path(path)
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "curves" not in data:
        raise ValueError("scenario must be an object with a 'curves' list")
    curves = tuple(curve_from_dict(c) for c in data["curves"])
    if not curves:
        raise ValueError("scenario has no curves")
    return Scenario(data.get("name", path.stem), curves, dict(data.get("settings", {})),
                    dict(data.get("expect", {})))
