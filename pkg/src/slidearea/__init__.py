"""Critical polygons of the signed area for vertices sliding on plane curves."""

from .area import Configuration, gradient, hessian, signed_area
from .curves import Circle, Ellipse, Line, Point, PolarCurve, Polyline
from .solver import SolverSettings, find_critical

__all__ = [
    "Circle", "Configuration", "Ellipse", "Line", "Point", "PolarCurve", "Polyline",
    "SolverSettings", "find_critical", "gradient", "hessian", "signed_area",
]
