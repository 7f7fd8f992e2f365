"""Curve input model for ``y^2 = f(x)`` with ``f`` monic, separable, odd degree.

Roots are ordered canonically (lexicographically by real then imaginary
part) unless the caller supplies an explicit permutation.  The ordering fixes
the branch cuts ``[a_1, a_2], [a_3, a_4], ..., [a_{2g+1}, +inf)`` and through
them the homology basis built in :mod:`hyperdelta.periods`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np


class CurveError(ValueError):
    pass


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise CurveError(f"complex numbers are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def canonical_order(roots: Sequence[complex], digits: int = 12) -> List[int]:
    """Indices sorting roots by (real, imaginary), robust to rounding noise."""
    scale = max(1.0, max(abs(r) for r in roots))
    key = lambda i: (round(roots[i].real / scale, digits), round(roots[i].imag / scale, digits))
    return sorted(range(len(roots)), key=key)


def _polish_root(coeffs: np.ndarray, r: complex, iters: int = 8) -> complex:
    dcoeffs = np.polyder(coeffs)
    for _ in range(iters):
        fr = np.polyval(coeffs, r)
        dr = np.polyval(dcoeffs, r)
        if dr == 0:
            break
        step = fr / dr
        r = r - step
        if abs(step) <= 1e-17 * max(1.0, abs(r)):
            break
    return complex(r)


@dataclass(frozen=True)
class CurveSpec:
    """Validated hyperelliptic curve ``y^2 = prod_k (x - a_k)``.

    ``coefficients`` holds ``lambda_1 .. lambda_{2g+1}`` of
    ``f = x^{2g+1} + lambda_1 x^{2g} + ... + lambda_{2g+1}``.
    """

    genus: int
    roots: Tuple[complex, ...]
    coefficients: Tuple[complex, ...]
    origin: str
    ordering: Tuple[int, ...]
    separability_eps: float
    source_roots: Tuple[complex, ...] = field(repr=False, default=())

    @property
    def degree(self) -> int:
        return 2 * self.genus + 1

    @property
    def poly(self) -> np.ndarray:
        """Full coefficient array, highest degree first (leading 1)."""
        return np.array((1.0 + 0j,) + self.coefficients, dtype=complex)

    def f(self, x):
        return np.polyval(self.poly, x)

    def df(self, x):
        return np.polyval(np.polyder(self.poly), x)

    @property
    def roots_array(self) -> np.ndarray:
        return np.array(self.roots, dtype=complex)

    @property
    def scale(self) -> float:
        return max(1.0, max(abs(a) for a in self.roots))

    def to_json(self) -> dict:
        return {
            "genus": self.genus,
            "roots": [[a.real, a.imag] for a in self.roots],
            "ordering": list(self.ordering),
            "origin": self.origin,
        }


def build_curve(
    coefficients: Optional[Sequence] = None,
    roots: Optional[Sequence] = None,
    ordering: Optional[Sequence[int]] = None,
    eps: Optional[float] = None,
    genus: Optional[int] = None,
    root_tol: float = 1e-9,
) -> CurveSpec:
    """Validate input and return a :class:`CurveSpec`.

    ``coefficients`` is the full list highest degree first, including the
    leading 1.  Exactly one of ``coefficients`` and ``roots`` must be given.
    """
    if (coefficients is None) == (roots is None):
        raise CurveError("give exactly one of coefficients or roots")
    if coefficients is not None:
        coeffs = np.array([_as_complex(c) for c in coefficients], dtype=complex)
        if coeffs.size < 2:
            raise CurveError("polynomial must have positive degree")
        deg = coeffs.size - 1
        if abs(coeffs[0] - 1) > 1e-14:
            raise CurveError(f"f must be monic, leading coefficient is {coeffs[0]}")
        if deg % 2 == 0:
            raise CurveError(f"degree {deg} is even; need an odd degree 2g+1 >= 5")
        if deg < 5:
            raise CurveError(f"degree {deg} < 5 gives genus < 2")
        raw = np.roots(coeffs)
        if raw.size != deg or not np.all(np.isfinite(raw)):
            raise CurveError("root finder did not return a full set of roots")
        found = [_polish_root(coeffs, complex(r)) for r in raw]
        scale = float(np.sum(np.abs(coeffs)))
        for r in found:
            resid = abs(np.polyval(coeffs, r))
            if resid > root_tol * scale * max(1.0, abs(r)) ** deg:
                raise CurveError(f"root finder did not converge (|f(a)| = {resid:.3e})")
        source = found
        origin = "coefficients"
    else:
        source = [_as_complex(r) for r in roots]
        deg = len(source)
        if deg % 2 == 0:
            raise CurveError(f"degree {deg} is even; need an odd degree 2g+1 >= 5")
        if deg < 5:
            raise CurveError(f"degree {deg} < 5 gives genus < 2")
        origin = "roots"
    g = (deg - 1) // 2
    if genus is not None and int(genus) != g:
        raise CurveError(f"declared genus {genus} does not match degree {deg}")

    if ordering is None:
        order = canonical_order(source)
    else:
        order = [int(i) for i in ordering]
        if sorted(order) != list(range(deg)):
            raise CurveError(f"ordering {order} is not a permutation of 0..{deg - 1}")
    ordered = tuple(source[i] for i in order)

    if eps is None:
        eps = 1e-8 * (1.0 + max(abs(a) for a in ordered))
    dmin = min(abs(a - b) for i, a in enumerate(ordered) for b in ordered[i + 1:])
    if dmin <= eps:
        raise CurveError(f"f is not separable: two roots are {dmin:.3e} apart (eps {eps:.1e})")

    full = np.poly(np.array(ordered, dtype=complex))
    if coefficients is not None:
        err = np.max(np.abs(full - coeffs)) / max(1.0, np.max(np.abs(coeffs)))
        if err > 1e-8:
            raise CurveError(f"roots do not reproduce the coefficients (error {err:.2e})")
        full = coeffs
    return CurveSpec(
        genus=g,
        roots=ordered,
        coefficients=tuple(complex(c) for c in full[1:]),
        origin=origin,
        ordering=tuple(order),
        separability_eps=float(eps),
        source_roots=tuple(source),
    )


def load_curve(path) -> CurveSpec:
    """Read the JSON curve file format used by the CLI."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise CurveError("curve file must hold a JSON object")
    unknown = set(data) - {"genus", "coefficients", "roots", "ordering", "eps", "name"}
    if unknown:
        raise CurveError(f"unknown keys in curve file: {sorted(unknown)}")
    return build_curve(
        coefficients=data.get("coefficients"),
        roots=data.get("roots"),
        ordering=data.get("ordering"),
        eps=data.get("eps"),
        genus=data.get("genus"),
    )


def discriminant(curve: CurveSpec) -> complex:
    """``D = prod_{k<l} (a_k - a_l)^2``."""
    a = curve.roots
    out = 1 + 0j
    for k in range(len(a)):
        for l in range(k + 1, len(a)):
            out *= (a[k] - a[l]) ** 2
    return out


def log_discriminant(curve: CurveSpec) -> complex:
    """Complex logarithm of the discriminant (any branch); avoids overflow."""
    a = curve.roots
    return sum(
        2 * np.log(complex(a[k] - a[l])) for k in range(len(a)) for l in range(k + 1, len(a))
    )


# Weierstrass points ----------------------------------------------------------

INFINITY = "inf"


@dataclass(frozen=True)
class WeierstrassSet:
    labels: Tuple[object, ...]
    """Root indices ``0..2g`` for finite points and ``INFINITY`` last."""
    xs: Tuple[Optional[complex], ...]
    weight: int

    @property
    def total_weight(self) -> int:
        return self.weight * len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)


def weierstrass_points(curve: CurveSpec) -> WeierstrassSet:
    g = curve.genus
    labels = tuple(range(2 * g + 1)) + (INFINITY,)
    xs = tuple(curve.roots) + (None,)
    return WeierstrassSet(labels=labels, xs=xs, weight=g * (g - 1) // 2)


# Points and sheets -------------------------------------------------------------


@dataclass(frozen=True)
class SurfacePoint:
    """A point of X: finite ``(x, y)`` with ``y^2 = f(x)``, or infinity."""

    x: Optional[complex]
    y: Optional[complex]

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    @classmethod
    def infinity(cls) -> "SurfacePoint":
        return cls(None, None)

    def conjugate(self) -> "SurfacePoint":
        if self.is_infinity:
            return self
        return SurfacePoint(self.x, -self.y)


def make_point(curve: CurveSpec, x: complex, y: Optional[complex] = None, sheet: int = 0,
               tol: float = 1e-9) -> SurfacePoint:
    """Build a validated finite point; ``y`` defaults to the given cut-plane sheet."""
    x = complex(x)
    if y is None:
        y = y_on_sheet(curve, x, sheet)
    y = complex(y)
    fx = complex(curve.f(x))
    if abs(y * y - fx) > tol * (1.0 + abs(fx)):
        raise CurveError(f"point ({x}, {y}) is not on the curve: |y^2 - f(x)| = {abs(y * y - fx):.2e}")
    return SurfacePoint(x, y)


def _seg_sqrt(x, a, b):
    """``sqrt((x-a)(x-b))`` analytic off the segment [a, b], ~ x at infinity."""
    m = 0.5 * (a + b)
    d = 0.5 * (b - a)
    u = x - m
    return u * np.sqrt(1.0 - (d / u) ** 2)


def y_on_sheet(curve: CurveSpec, x, sheet: int = 0):
    """Value of y on sheet 0/1 of the plane cut along the canonical cuts.

    Sheet 0 is ``prod_j sqrt((x-a_{2j-1})(x-a_{2j})) * sqrt(x - a_{2g+1})``
    with each factor analytic off its own cut; sheet 1 is its negative.
    """
    if sheet not in (0, 1):
        raise CurveError("sheet must be 0 or 1")
    a = curve.roots
    g = curve.genus
    x = np.asarray(x, dtype=complex)
    if np.any(np.min(np.abs(x[..., None] - np.array(a)), axis=-1) == 0):
        raise CurveError("x is a branch point; y = 0 there and the sheet is undefined")
    y = np.ones_like(x)
    for j in range(g):
        y = y * _seg_sqrt(x, a[2 * j], a[2 * j + 1])
    # cut of the last factor runs from a_{2g+1} to +infinity along the real direction
    y = y * (-1j) * np.sqrt(a[2 * g] - x)
    if sheet:
        y = -y
    return y if y.ndim else complex(y)


def cuts(curve: CurveSpec) -> List[Tuple[complex, Optional[complex]]]:
    a = curve.roots
    g = curve.genus
    out = [(a[2 * j], a[2 * j + 1]) for j in range(g)]
    out.append((a[2 * g], None))
    return out


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return np.sign(((b - a).conjugate() * (c - a)).imag)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    return o1 * o2 < 0 and o3 * o4 < 0


def count_cut_crossings(curve: CurveSpec, x0: complex, x1: complex) -> int:
    """Number of cuts crossed by the straight segment from ``x0`` to ``x1``."""
    n = 0
    far = 4.0 * (curve.scale + abs(x0) + abs(x1))
    for a, b in cuts(curve):
        if b is None:
            b = a + far
        if _segments_cross(x0, x1, a, b):
            n += 1
    return n


def continue_y(curve: CurveSpec, path: Sequence[complex], y0: complex) -> complex:
    """Analytically continue y along a polyline starting from ``y0`` at ``path[0]``."""
    a = curve.roots_array
    y = complex(y0)
    x = complex(path[0])
    for target in path[1:]:
        target = complex(target)
        while x != target:
            xn = _safe_step(x, target, a)
            y = y * complex(np.prod(np.sqrt((xn - a) / (x - a))))
            x = xn
    return y


def _safe_step(x: complex, target: complex, a: np.ndarray) -> complex:
    d = float(np.min(np.abs(x - a)))
    if d == 0:
        raise CurveError("continuation path runs through a branch point")
    rem = target - x
    if abs(rem) <= 0.4 * d:
        return target
    return x + rem * (0.4 * d / abs(rem))


def move_to_infinity(curve: CurveSpec, k: int) -> Tuple[CurveSpec, dict]:
    """Model of the same surface with the Weierstrass point ``a_k`` at infinity.

    Uses ``x' = 1/(x - a_k)``; the new roots are ``1/(a_l - a_k)`` for
    ``l != k`` together with ``0`` (the image of the old point at infinity).
    Returns the new curve (canonically ordered) and a map from old
    Weierstrass labels to new ones.
    """
    a = curve.roots
    new_roots = []
    old_labels = []
    for l in range(len(a)):
        if l == k:
            continue
        new_roots.append(1.0 / (a[l] - a[k]))
        old_labels.append(l)
    new_roots.append(0j)
    old_labels.append(INFINITY)
    new_curve = build_curve(roots=new_roots)
    label_map = {}
    for new_pos, src in enumerate(new_curve.ordering):
        label_map[old_labels[src]] = new_pos
    label_map[k] = INFINITY
    return new_curve, label_map


def translate(curve: CurveSpec, c: complex) -> CurveSpec:
    return build_curve(roots=[a + c for a in curve.roots])


def scale_curve(curve: CurveSpec, c: complex) -> CurveSpec:
    """Model ``x -> c^2 x`` (roots multiplied by ``c^2``)."""
    return build_curve(roots=[a * c * c for a in curve.roots])
