"""Arakelov invariants and Faltings' delta for hyperelliptic Riemann surfaces."""

__version__ = "0.1.0"

from .curve import INFINITY, CurveSpec, SurfacePoint, build_curve, load_curve, make_point  # noqa: E402
from .periods import AbelJacobi, PeriodData, period_matrix  # noqa: E402
from .theta import BACKEND, ThetaChar, ThetaConfig, theta  # noqa: E402

__all__ = [
    "__version__", "INFINITY", "CurveSpec", "SurfacePoint", "build_curve", "load_curve",
    "make_point", "AbelJacobi", "PeriodData", "period_matrix", "BACKEND", "ThetaChar",
    "ThetaConfig", "theta",
]
