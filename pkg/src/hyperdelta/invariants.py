"""Arakelov invariants of a hyperelliptic Riemann surface.

Everything here is built from three ingredients: the period data of a model
``y^2 = f(x)``, the Abel-Jacobi map with base point infinity and the norm
``||theta||`` of the Riemann theta function with the characteristic of the
Riemann vector.  Conventions:

* ``w = g(g-1)/2`` is the weight of each Weierstrass point;
* ``r``, ``n``, ``m`` are the binomials returned by
  :func:`hyperdelta.theta.genus_constants`;
* quantities are handled as logarithms throughout, so that products of many
  theta constants cannot overflow.

Limits at a point (``||F_z||``, ``A(W)``, ``B(W)``) are obtained by Richardson
extrapolation over a geometric sequence of local-coordinate values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .curve import INFINITY, CurveSpec, SurfacePoint, make_point, move_to_infinity
from .periods import AbelJacobi, PeriodData, period_matrix
from .quadrature import ArakelovDensity, QuadConfig, SurfaceQuadrature
from .theta import (
    FaltingsNorm,
    ThetaConfig,
    genus_constants,
    log_norm_theta_w_precise,
    log_phi,
)


class InvariantError(RuntimeError):
    pass


# Richardson extrapolation ---------------------------------------------------------


@dataclass(frozen=True)
class Limit:
    """Extrapolated limit with an error estimate and the observed leading order."""

    value: float
    error: float
    order: float

    @property
    def log(self) -> float:
        return math.log(self.value)

    @property
    def log_error(self) -> float:
        return self.error / abs(self.value)


def richardson(values: Sequence[float], step: int = 1, ratio: float = 2.0, max_cols: int = 6) -> Limit:
    """Extrapolate ``v(h_j)``, ``h_j = h_0 ratio^{-j}``, assuming corrections in ``h^{step k}``.

    The entry of the tableau with the smallest difference to its
    predecessor in the same column is returned; this stops the elimination
    before rounding noise at small ``h`` takes over.
    """
    v = np.asarray(values, dtype=float)
    J = len(v)
    if J < 3:
        raise InvariantError("need at least three values to extrapolate")
    T = [[x] for x in v]
    for k in range(1, min(max_cols, J)):
        fac = ratio ** (step * k) - 1.0
        for j in range(k, J):
            T[j].append(T[j][k - 1] + (T[j][k - 1] - T[j - 1][k - 1]) / fac)
    best = None
    for k in range(0, min(max_cols, J)):
        for j in range(k + 1, J):
            d = abs(T[j][k] - T[j - 1][k])
            if best is None or d < best[0]:
                best = (d, T[j][k])
    # observed order from successive differences above the rounding floor;
    # a sequence that is converged from the start has no measurable order
    d0 = np.abs(np.diff(v))
    floor = 256 * np.finfo(float).eps * float(np.max(np.abs(v)))
    orders = [math.log(d0[j - 1] / d0[j], ratio) for j in range(1, len(d0))
              if d0[j] > floor and d0[j - 1] > floor]
    if orders:
        order = float(np.median(orders[: max(1, len(orders) // 2 + 1)]))
    elif np.any(d0 > floor):
        # the next difference already sits at the floor: report the implied lower bound
        order = math.log(float(np.max(d0)) / floor, ratio)
    else:
        order = math.inf
    return Limit(float(best[1]), float(best[0]), order)


# Power series helpers ---------------------------------------------------------------


def series_power(a: np.ndarray, alpha: float, b0: complex, n: int) -> np.ndarray:
    """Coefficients of ``a(h)^alpha`` up to ``h^{n-1}`` with constant term ``b0``.

    Uses the recurrence obtained from ``a b' = alpha a' b``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.zeros(n, dtype=complex)
    b[0] = b0
    for k in range(1, n):
        s = 0j
        for j in range(1, min(k, len(a) - 1) + 1):
            s += ((alpha + 1) * j - k) * a[j] * b[k - j]
        b[k] = s / (k * a[0])
    return b


def taylor_shift(poly_high_first: np.ndarray, x0: complex, n: int) -> np.ndarray:
    """Taylor coefficients of a polynomial at ``x0`` (lowest degree first)."""
    out = []
    p = np.asarray(poly_high_first, dtype=complex)
    fact = 1.0
    for k in range(n):
        out.append(np.polyval(p, x0) / fact if p.size else 0j)
        p = np.polyder(p) if p.size > 1 else np.zeros(0)
        fact *= k + 1
    return np.array(out, dtype=complex)


# Surface model ----------------------------------------------------------------------


class Surface:
    """A model of X together with everything needed to evaluate ``||theta||``."""

    def __init__(self, curve: CurveSpec, theta_cfg: ThetaConfig = ThetaConfig(),
                 periods: Optional[PeriodData] = None):
        self.curve = curve
        self.g = curve.genus
        self.const = genus_constants(self.g)
        self.w = self.const["w"]
        self.theta_cfg = theta_cfg
        self.periods = periods or period_matrix(curve)
        self.aj = AbelJacobi(self.periods)
        self.norm = FaltingsNorm(self.periods, theta_cfg)
        imgs = self.aj.weierstrass_images()
        self.labels: List[object] = list(range(2 * self.g + 1)) + [INFINITY]
        self.wz: Dict[object, np.ndarray] = dict(zip(self.labels, imgs))
        self._log_phi: Optional[complex] = None

    # theta norms -------------------------------------------------------------
    def log_norm(self, z) -> np.ndarray:
        return self.norm.log(z)

    def log_norm_precise(self, z, threshold: float = 1e-6) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        return log_norm_theta_w_precise(z @ self.periods.mu_inv.T, self.periods.tau,
                                        self.norm.delta, self.theta_cfg, threshold=threshold)

    def weierstrass_log_norms(self, zP: np.ndarray) -> np.ndarray:
        """``log ||theta||(gP - W)`` for every Weierstrass point W."""
        Z = np.array([self.g * zP - self.wz[L] for L in self.labels])
        return self.log_norm(Z)

    # modular quantities -----------------------------------------------------------
    @property
    def log_phi(self) -> complex:
        if self._log_phi is None:
            self._log_phi = log_phi(self.periods.tau, self.theta_cfg)
        return self._log_phi

    @property
    def log_phi_norm(self) -> float:
        """``log ||phi_g|| = 2r log det Y + log |phi_g|``."""
        return float(2 * self.const["r"] * math.log(self.periods.det_Y) + self.log_phi.real)

    @property
    def log_delta_norm(self) -> float:
        """``log ||Delta_g|| = -(4g+4) n log 2 + log ||phi_g||``."""
        return -(4 * self.g + 4) * self.const["n"] * math.log(2) + self.log_phi_norm

    def point(self, x: complex, sheet: int = 0) -> SurfacePoint:
        return make_point(self.curve, x, sheet=sheet)


def random_points(surface: Surface, count: int, seed: int) -> List[SurfacePoint]:
    """Deterministic generic points away from branch points."""
    rng = np.random.default_rng(seed)
    a = surface.curve.roots_array
    c = a.mean()
    spread = float(np.max(np.abs(a - c)))
    dmin = min(ch.dmin for ch in surface.aj.branch)
    pts: List[SurfacePoint] = []
    while len(pts) < count:
        x = c + spread * 0.9 * complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        if np.min(np.abs(x - a)) < 0.5 * dmin:
            continue
        if any(abs(x - P.x) < 0.2 * dmin for P in pts):
            continue
        pts.append(surface.point(x, sheet=int(rng.integers(0, 2))))
    return pts


# Arakelov form, S(X), Green functions -------------------------------------------------


def arakelov_mu_density(surface: Surface, P: SurfacePoint) -> float:
    """Density of the Arakelov form against ``dA_x`` at a finite non-branch point."""
    if P.is_infinity:
        raise InvariantError("the x-chart density is not defined at infinity")
    if abs(P.y) == 0:
        raise InvariantError("the x-chart density is singular at a branch point")
    return float(ArakelovDensity(surface.periods).at_x(P.x))


def log_S(surface: Surface, Q: Optional[SurfacePoint] = None, cfg: QuadConfig = QuadConfig()
          ) -> Tuple[float, float]:
    """``log S(X) = -int_X log ||theta||(gP - Q) mu(P)`` and an error estimate."""
    g = surface.g
    if Q is None or Q.is_infinity:
        zQ = np.zeros(g, complex)
        extra: List[SurfacePoint] = []
    else:
        zQ = surface.aj.point(Q)
        extra = [Q] if abs(Q.y) > 0 else []
        if not extra:
            k = int(np.argmin(np.abs(surface.curve.roots_array - Q.x)))
            zQ = surface.wz[k]
    quad = SurfaceQuadrature(surface.aj, cfg, extra=extra)
    val, err = quad.integrate(lambda z: surface.log_norm(g * z - zQ))
    return -val, err


def log_green(surface: Surface, log_s: float, P: SurfacePoint, Q: SurfacePoint) -> float:
    """``log G(P, Q)`` from the theta formula (P not a Weierstrass point)."""
    g, w = surface.g, surface.w
    if P.is_infinity or abs(P.y) == 0:
        raise InvariantError("P must not be a Weierstrass point")
    zP = surface.aj.point(P)
    zQ = surface.aj.point(Q)
    num = float(surface.log_norm(g * zP - zQ)[0])
    den = float(np.sum(surface.weierstrass_log_norms(zP)))
    return (log_s / g ** 2 + num - w * den / g ** 3) / g


def green(surface: Surface, log_s: float, P: SurfacePoint, Q: SurfacePoint) -> float:
    return math.exp(log_green(surface, log_s, P, Q))


def log_green_prime(log_g: float, log_s: float, g: int) -> float:
    """``log G'(P,Q) = log G(P,Q) - log S / g^3``."""
    return log_g - log_s / g ** 3


def green_normalization(surface: Surface, log_s: float, P: SurfacePoint,
                        cfg: QuadConfig = QuadConfig()) -> Tuple[float, float]:
    """``int_X log G(P, Q) mu(Q)``; zero for the Arakelov-Green function."""
    g, w = surface.g, surface.w
    zP = surface.aj.point(P)
    quad = SurfaceQuadrature(surface.aj, cfg, extra=[P])
    integral, err = quad.integrate(lambda z: surface.log_norm(g * zP - z))
    den = float(np.sum(surface.weierstrass_log_norms(zP)))
    return (log_s / g ** 2 + integral - w * den / g ** 3) / g, err / g


# Local limits -----------------------------------------------------------------------


@dataclass(frozen=True)
class LimitConfig:
    """Geometric sequence ``h_j = h0 2^{-j}``, ``j < levels``."""

    h0: float = 0.1
    levels: int = 9
    direction: float = 0.3


def F_norm(surface: Surface, P: SurfacePoint, scale: complex = 1.0,
           cfg: LimitConfig = LimitConfig()) -> Limit:
    """``||F_z||(P)`` for the coordinate ``z = scale * x``."""
    g = surface.g
    if P.is_infinity or abs(P.y) == 0:
        raise InvariantError("P must not be a Weierstrass point")
    chart = surface.aj.local_chart(P)
    if chart.d0 < 1e-3:
        raise InvariantError("P is too close to a branch point for a stable limit")
    h0 = min(cfg.h0, 0.25 * chart.d0)
    hs = h0 * 2.0 ** -np.arange(cfg.levels)
    xs = P.x + hs * np.exp(1j * cfg.direction)
    zQ = chart.z(xs)
    vals = np.exp(surface.log_norm(g * chart.z0 - zQ)) / (abs(scale) * hs) ** g
    return richardson(vals, step=1)


def wronskian_x(surface: Surface, P: SurfacePoint) -> complex:
    """``W_x(mu)(P)``: determinant of Taylor coefficients of ``x^{l-1}/(2y)`` at P."""
    g = surface.g
    if P.is_infinity or abs(P.y) == 0:
        raise InvariantError("P must be a finite non-branch point")
    fser = taylor_shift(surface.curve.poly, P.x, g + 1)
    inv_y = series_power(fser, -0.5, 1.0 / P.y, g)
    M = np.zeros((g, g), dtype=complex)
    for l in range(g):
        xl = np.zeros(g, dtype=complex)
        for k in range(min(l, g - 1) + 1):
            xl[k] = math.comb(l, k) * P.x ** (l - k)
        M[:, l] = np.convolve(xl, inv_y)[:g] / 2
    return complex(np.linalg.det(M))


def log_abs_orthonormal_factor(periods: PeriodData) -> float:
    """``log ((det Y)^{-1/2} |det mu|^{-1})``, the Wronskian change to an orthonormal basis."""
    return -0.5 * math.log(periods.det_Y) - periods.log_abs_det_mu


def log_T(surface: Surface, P: SurfacePoint, cfg: LimitConfig = LimitConfig()) -> Tuple[float, float]:
    """``log T(X)`` from its definition at P in the coordinate x; returns (value, error)."""
    g, w = surface.g, surface.w
    F = F_norm(surface, P, cfg=cfg)
    zP = surface.aj.point(P)
    wn = float(np.sum(surface.weierstrass_log_norms(zP)))
    Wx = wronskian_x(surface, P)
    lw = math.log(abs(Wx)) + log_abs_orthonormal_factor(surface.periods)
    val = -(g + 1) * F.log + w * (g - 1) * wn / g ** 3 + 2 * lw
    return val, (g + 1) * F.log_error


def log_T_closed(log_phi_norm: float, g: int) -> float:
    """``log T = -2g log 2pi - (3g-1)/(8ng) log ||Delta_g||``."""
    n = genus_constants(g)["n"]
    log_delta = -(4 * g + 4) * n * math.log(2) + log_phi_norm
    return -2 * g * math.log(2 * math.pi) - (3 * g - 1) / (8 * n * g) * log_delta


def delta_norm_log(log_phi_norm: float, g: int) -> float:
    return -(4 * g + 4) * genus_constants(g)["n"] * math.log(2) + log_phi_norm


def delta_faltings(log_s: float, log_delta_norm: float, g: int) -> float:
    """Faltings delta from ``S`` and ``||Delta_g||``."""
    n = genus_constants(g)["n"]
    return 4 * (-2 * g * math.log(2 * math.pi) - (g - 1) / g ** 2 * log_s
                - (3 * g - 1) / (8 * n * g) * log_delta_norm)


def delta_from_T(log_s: float, log_t: float, g: int) -> float:
    """Faltings delta from ``S`` and ``T``: ``exp(delta/4) = S^{-(g-1)/g^2} T``."""
    return 4 * (log_t - (g - 1) / g ** 2 * log_s)


# Limits at a Weierstrass point placed at infinity -------------------------------------------


def _t_for_zg(surface: Surface, zg: np.ndarray) -> np.ndarray:
    """Solve ``z_g(t) = zg`` near ``t = 0`` by Newton's method."""
    g = surface.g
    t = np.array(zg, dtype=complex)
    for _ in range(30):
        r = surface.aj.infinity_z(t)[..., g - 1] - zg
        t = t - r / surface.aj.infinity_phi(t)[..., g - 1]
        if np.max(np.abs(r)) < 1e-17 * np.max(np.abs(zg)):
            break
    return t


_MIN_LEVELS = 4
_FLOOR_MARGIN = math.log(1e5)


def leading_A(surface: Surface, label, cfg: LimitConfig = LimitConfig()) -> Limit:
    """``A(W')`` for the Weierstrass point at infinity W of this model.

    ``label`` is a root index or ``INFINITY``.  The exponent of ``|z_g|`` is
    ``w + g`` for ``W' = W`` and ``w`` otherwise.
    """
    g, w = surface.g, surface.w
    expo = w + g if label == INFINITY else w
    hs = cfg.h0 * 2.0 ** -np.arange(cfg.levels)
    zg = hs * np.exp(1j * cfg.direction)
    t = _t_for_zg(surface, zg)
    z = surface.aj.infinity_z(t)
    logs = surface.log_norm_precise(g * z - surface.wz[label])
    if label == INFINITY:
        # the computed norm at the origin is roundoff from the periods and
        # bounds how far the sequence can be followed
        floor = float(surface.log_norm_precise(np.zeros((1, g), dtype=complex))[0])
        keep = max(_MIN_LEVELS, int(np.sum(logs > floor + _FLOOR_MARGIN)))
        logs, hs = logs[:keep], hs[:keep]
    return richardson(np.exp(logs) / hs ** expo, step=2)


def _inf_series(surface: Surface, nterms: Optional[int] = None) -> np.ndarray:
    """Coefficients (in t, lowest first) of ``mu_l = phi_l(t) dt``; shape ``(g, N)``."""
    g = surface.g
    F = surface.aj.inf.F
    N = 2 * len(F) + 2 * g
    out = np.zeros((g, N), dtype=complex)
    for l in range(1, g + 1):
        e = 2 * (g - l)
        out[l - 1, e:e + 2 * len(F):2] = F
    return out


def wronskian_t(surface: Surface, t0: complex) -> complex:
    """``W_t(mu)`` at parameter ``t0`` of the chart at infinity."""
    g = surface.g
    A = _inf_series(surface)
    N = A.shape[1]
    n = np.arange(N)
    M = np.zeros((g, g), dtype=complex)
    for m in range(g):
        binom = np.array([math.comb(int(k), m) if k >= m else 0 for k in n], dtype=float)
        pw = np.where(n >= m, t0 ** np.maximum(n - m, 0), 0)
        M[m, :] = (A * (binom * pw)[None, :]).sum(axis=1)
    return complex(np.linalg.det(M))


def leading_B(surface: Surface, cfg: LimitConfig = LimitConfig()) -> Limit:
    """``B(W) = lim |W_{z_g}(omega)| / |z_g|^w`` at the point at infinity."""
    g, w = surface.g, surface.w
    hs = cfg.h0 * 2.0 ** -np.arange(cfg.levels)
    zg = hs * np.exp(1j * cfg.direction)
    t = _t_for_zg(surface, zg)
    fac = math.exp(log_abs_orthonormal_factor(surface.periods))
    vals = []
    for tj, hj in zip(t, hs):
        Wt = wronskian_t(surface, tj)
        dzg = surface.aj.infinity_phi(tj)[g - 1]
        vals.append(abs(Wt) * abs(dzg) ** (-g * (g + 1) / 2) * fac / hj ** w)
    return richardson(vals, step=2)


def log_A_closed(surface: Surface) -> float:
    g, w = surface.g, surface.w
    r, n = surface.const["r"], surface.const["n"]
    P = surface.periods
    return (w * math.log(2) + g * (r - n) / (2 * n) * math.log(math.pi) + 0.25 * math.log(P.det_Y)
            - (r - n) / (2 * n) * P.log_abs_det_mu + surface.log_phi.real / (8 * n))


def log_B_closed(surface: Surface) -> float:
    return surface.w * math.log(2) + log_abs_orthonormal_factor(surface.periods)


# Theorem checks --------------------------------------------------------------------


@dataclass
class WeierstrassModel:
    """The model with W at infinity, its A-limits and the map of labels."""

    W: object
    surface: Surface
    label_map: Dict[object, object]
    A: Dict[object, Limit]

    def log_G_prime(self, Wp) -> float:
        """``log G'(W, W')`` (labels in the original model)."""
        g, w = self.surface.g, self.surface.w
        tot = sum(L.log for L in self.A.values())
        return (self.A[self.label_map[Wp]].log - w * tot / g ** 3) / g

    def log_G_prime_error(self, Wp) -> float:
        g, w = self.surface.g, self.surface.w
        tot = sum(L.log_error for L in self.A.values())
        return (self.A[self.label_map[Wp]].log_error + w * tot / g ** 3) / g


def weierstrass_model(surface: Surface, W, cfg: LimitConfig = LimitConfig()) -> WeierstrassModel:
    if W == INFINITY:
        model, label_map = surface, {L: L for L in surface.labels}
    else:
        new_curve, label_map = move_to_infinity(surface.curve, W)
        model = Surface(new_curve, surface.theta_cfg)
    A = {L: leading_A(model, L, cfg) for L in model.labels}
    return WeierstrassModel(W, model, label_map, A)


def rel_residual(d: float) -> float:
    """``|exp(d) - 1|`` for a log difference ``d``."""
    return abs(math.expm1(d))


def thm_main_lhs(model: WeierstrassModel, labels: Sequence) -> float:
    g = model.surface.g
    return (g - 1) ** 2 * sum(model.log_G_prime(Wp) for Wp in labels if Wp != model.W)


def thm_main_rhs(g: int, log_t: float, log_phi_norm: float) -> float:
    n = genus_constants(g)["n"]
    return ((g - 1) ** 2 * math.log(2) + (2 * g + 2) * math.log(math.pi)
            + (g + 1) / g * log_t + log_phi_norm / (2 * n))


def thm_second_lhs(models: Dict[object, WeierstrassModel], labels: Sequence) -> float:
    g = next(iter(models.values())).surface.g
    n = genus_constants(g)["n"]
    return n * (g - 1) * sum(models[W].log_G_prime(Wp) for W in labels for Wp in labels if Wp != W)


def thm_second_rhs(g: int, log_t: float, log_phi_norm: float) -> float:
    m = genus_constants(g)["m"]
    return (-2 * g * (g + 2) * m * math.log(math.pi) - (g + 2) * m * log_t
            - 1.5 * (g + 1) * log_phi_norm)


def g2_remark_sides(surface: Surface, model: WeierstrassModel, Wp) -> Tuple[float, float]:
    """Both sides (logs) of the genus-two formula for ``G'(W, W')^2``."""
    if surface.g != 2:
        raise InvariantError("the remark formula is specific to genus 2")
    W = model.W
    lhs = 2 * model.log_G_prime(Wp)
    others = [L for L in surface.labels if L not in (W, Wp)]
    Z = np.array([surface.wz[W] - surface.wz[Wp] + surface.wz[L] for L in others])
    rhs = 0.25 * math.log(2) - 3 / 64 * surface.log_phi_norm + float(np.sum(surface.log_norm(Z)))
    return lhs, rhs


def conjecture_log_ratio(surface: Surface, model: WeierstrassModel, Wp) -> float:
    """``g log G'(W,W') - sum log ||theta||(W - W' + W_1 + .. + W_{g-1})`` (exploratory)."""
    g = surface.g
    W = model.W
    others = [L for L in surface.labels if L not in (W, Wp)]
    Z = [surface.wz[W] - surface.wz[Wp] + sum((surface.wz[L] for L in c), np.zeros(g, complex))
         for c in itertools.combinations(others, g - 1)]
    return g * model.log_G_prime(Wp) - float(np.sum(surface.log_norm(np.array(Z))))


def wronskian_mu(surface: Surface, P: SurfacePoint, coordinate: str = "x") -> complex:
    """Wronskian of ``(mu_1, .., mu_g)`` at P in the coordinate ``x`` or ``t``.

    For ``coordinate="t"`` P must be a point of the chart at infinity and the
    value is taken at its parameter ``t``; ``W_{z_g}`` follows from the chain
    rule ``W_{z_g} = W_t (dz_g/dt)^{-g(g+1)/2}``.
    """
    if coordinate == "x":
        return wronskian_x(surface, P)
    if coordinate == "t":
        if P.is_infinity:
            return wronskian_t(surface, 0j)
        return wronskian_t(surface, surface.aj.inf.t_of(P.x, P.y))
    raise InvariantError(f"unknown coordinate {coordinate!r}")


# Report -----------------------------------------------------------------------------

REPORT_SCHEMA = "hyperdelta.report/1"

# declared tolerances of the residual table
TOLERANCES = {
    "thomae": 1e-6,
    "disc": 1e-6,
    "leading_A": 1e-4,
    "leading_B": 1e-4,
    "extrapolation_order": 0.8,
    "T_closed": 1e-3,
    "T_P_spread": 1e-3,
    "S_Q_spread": 2e-3,
    "green_symmetry": 1e-2,
    "green_normalization": 1e-2,
    "thm_main": 1e-2,
    "thm_main_W_spread": 1e-2,
    "thm_second": 1e-2,
    "delta_routes": 1e-2,
    "g2_remark": 1e-2,
}


@dataclass
class Residual:
    name: str
    value: float
    tolerance: float
    estimate: float = 0.0
    kind: str = "max"  # "max": value <= tolerance; "min": value >= tolerance

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        return self.value <= self.tolerance if self.kind == "max" else self.value >= self.tolerance

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "estimate": self.estimate, "kind": self.kind, "passed": self.passed}


@dataclass
class InvariantReport:
    """All computed invariants, the residual table and the configuration used."""

    genus: int
    curve: dict
    config: dict
    values: Dict[str, dict] = field(default_factory=dict)
    residuals: List[Residual] = field(default_factory=list)
    exploratory: Dict[str, float] = field(default_factory=dict)

    def add_value(self, name: str, log_value: float, error: float, positive: bool = True) -> None:
        entry = {"log": log_value, "error": error}
        if positive:
            entry["value"] = math.exp(log_value)
            if not entry["value"] > 0:
                raise InvariantError(f"{name} must be positive")
        self.values[name] = entry

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.residuals)

    def failures(self) -> List[str]:
        return [r.name for r in self.residuals if not r.passed]

    def to_json(self) -> dict:
        return {"schema": REPORT_SCHEMA, "genus": self.genus, "curve": self.curve,
                "config": self.config, "values": self.values,
                "residuals": [r.to_json() for r in self.residuals],
                "exploratory": self.exploratory, "passed": self.passed}


def _spread(logs: Sequence[float]) -> float:
    return rel_residual(max(logs) - min(logs))


def compute_invariants(curve: CurveSpec, theta_cfg: ThetaConfig = ThetaConfig(),
                       quad_cfg: QuadConfig = QuadConfig(tol=1e-3),
                       limit_cfg: LimitConfig = LimitConfig(), seed: int = 0,
                       checks: str = "all", periods: Optional[PeriodData] = None,
                       log=None, sections: Optional[Sequence[str]] = None) -> InvariantReport:
    """Run the full pipeline on ``curve``.

    ``checks="fast"`` skips everything that needs the surface quadrature or
    the remodelled curves (S, Green functions, the theorems, delta).
    ``sections`` restricts an ``"all"`` run to a subset of
    ``("S", "green", "delta", "theorems")``.
    """
    from .theta import disc_identity_residual, thomae_residual

    if checks not in ("all", "fast"):
        raise InvariantError(f"checks must be 'all' or 'fast', got {checks!r}")
    sections = set(SECTIONS if sections is None else sections)
    if not sections <= set(SECTIONS):
        raise InvariantError(f"unknown sections {sorted(sections - set(SECTIONS))}")
    if "green" in sections or "delta" in sections:
        sections.add("S")
    say = log or (lambda *a, **k: None)
    surf = Surface(curve, theta_cfg, periods=periods)
    g = surf.g
    rep = InvariantReport(g, curve.to_json(), {
        "theta_tol": theta_cfg.tol, "quad_tol": quad_cfg.tol, "quad_method": quad_cfg.method,
        "quad_budget": quad_cfg.budget, "seed": seed, "checks": checks,
        "limit_h0": limit_cfg.h0, "limit_levels": limit_cfg.levels,
        "precision_bits": theta_cfg.precision_bits, "sections": sorted(sections)})
    tol = TOLERANCES
    res = rep.residuals.append

    res(Residual("thomae", thomae_residual(surf.periods, theta_cfg), tol["thomae"]))
    res(Residual("disc", disc_identity_residual(surf.periods, theta_cfg), tol["disc"]))
    say("stage=identities done")

    rep.add_value("phi_norm", surf.log_phi_norm, 0.0)
    rep.add_value("delta_norm", surf.log_delta_norm, 0.0)
    lt_closed = log_T_closed(surf.log_phi_norm, g)
    rep.add_value("T_closed", lt_closed, 0.0)

    # leading coefficients at infinity
    A = leading_A(surf, INFINITY, limit_cfg)
    B = leading_B(surf, limit_cfg)
    res(Residual("leading_A", rel_residual(A.log - log_A_closed(surf)), tol["leading_A"], A.log_error))
    res(Residual("leading_B", rel_residual(B.log - log_B_closed(surf)), tol["leading_B"], B.log_error))
    res(Residual("leading_A_order", A.order, tol["extrapolation_order"], kind="min"))
    res(Residual("leading_B_order", B.order, tol["extrapolation_order"], kind="min"))
    rep.add_value("A_inf", A.log, A.log_error)
    rep.add_value("B_inf", B.log, B.log_error)
    say("stage=leading done")

    # T by definition at three generic points
    pts = random_points(surf, 3, seed)
    ts = [log_T(surf, P, limit_cfg) for P in pts]
    lt = float(np.mean([t for t, _ in ts]))
    lt_err = max(e for _, e in ts) + (max(t for t, _ in ts) - min(t for t, _ in ts))
    rep.add_value("T_definition", lt, lt_err)
    res(Residual("T_P_spread", _spread([t for t, _ in ts]), tol["T_P_spread"], lt_err))
    res(Residual("T_closed", rel_residual(lt - lt_closed), tol["T_closed"], lt_err))
    say("stage=T done")

    if checks == "fast":
        return rep

    if "S" in sections:
        ls, ls_err = _S_section(rep, surf, quad_cfg, seed, say)
        if "green" in sections:
            _green_section(rep, surf, ls, ls_err, pts, quad_cfg, say)
        if "delta" in sections:
            _delta_section(rep, surf, ls, ls_err, lt, lt_err)
    if "theorems" in sections:
        _theorem_section(rep, surf, lt, lt_err, limit_cfg, say)
    return rep


SECTIONS = ("S", "green", "delta", "theorems")


def _S_section(rep, surf, quad_cfg, seed, say):
    tol = TOLERANCES
    res = rep.residuals.append
    # S(X) with Q at infinity and at a generic point
    ls1, e1 = log_S(surf, None, quad_cfg)
    Q = random_points(surf, 4, seed + 1)[-1]
    ls2, e2 = log_S(surf, Q, quad_cfg)
    ls, ls_err = 0.5 * (ls1 + ls2), max(e1, e2) + 0.5 * abs(ls1 - ls2)
    rep.add_value("S", ls, ls_err)
    res(Residual("S_Q_spread", rel_residual(ls1 - ls2), tol["S_Q_spread"], e1 + e2))
    say("stage=S done")
    return ls, ls_err


def _green_section(rep, surf, ls, ls_err, pts, quad_cfg, say):
    g = surf.g
    tol = TOLERANCES
    res = rep.residuals.append
    P1, P2 = pts[0], pts[1]
    sym = abs(log_green(surf, ls, P1, P2) - log_green(surf, ls, P2, P1))
    res(Residual("green_symmetry", sym, tol["green_symmetry"]))
    gn, gn_err = green_normalization(surf, ls, P1, quad_cfg)
    res(Residual("green_normalization", abs(gn), tol["green_normalization"], gn_err + ls_err / g ** 3))
    say("stage=green done")


def _delta_section(rep, surf, ls, ls_err, lt, lt_err):
    g = surf.g
    tol = TOLERANCES
    res = rep.residuals.append
    d_cor = delta_faltings(ls, surf.log_delta_norm, g)
    d_thm = delta_from_T(ls, lt, g)
    rep.values["delta"] = {"value": d_cor, "error": 4 * (g - 1) / g ** 2 * ls_err}
    rep.values["delta_via_T"] = {"value": d_thm, "error": 4 * (lt_err + (g - 1) / g ** 2 * ls_err)}
    res(Residual("delta_routes", abs(d_cor - d_thm), tol["delta_routes"], 4 * lt_err))


def _theorem_section(rep, surf, lt, lt_err, limit_cfg, say):
    g = surf.g
    tol = TOLERANCES
    res = rep.residuals.append
    # theorems, with each Weierstrass point moved to infinity in turn
    models = {W: weierstrass_model(surf, W, limit_cfg) for W in surf.labels}
    say("stage=models done")
    rhs = thm_main_rhs(g, lt, surf.log_phi_norm)
    lhs_all = []
    for W in surf.labels:
        m = models[W]
        lhs = thm_main_lhs(m, surf.labels)
        lhs_all.append(lhs)
        est = (g - 1) ** 2 * sum(m.log_G_prime_error(Wp) for Wp in surf.labels if Wp != W)
        res(Residual(f"thm_main[{W}]", rel_residual(lhs - rhs), tol["thm_main"],
                     est + (g + 1) / g * lt_err))
        orders = min(L.order for L in m.A.values())
        res(Residual(f"leading_A_order[{W}]", orders, tol["extrapolation_order"], kind="min"))
    res(Residual("thm_main_W_spread", _spread(lhs_all), tol["thm_main_W_spread"]))
    lhs2 = thm_second_lhs(models, surf.labels)
    res(Residual("thm_second", rel_residual(lhs2 - thm_second_rhs(g, lt, surf.log_phi_norm)),
                 tol["thm_second"], (g + 2) * genus_constants(g)["m"] * lt_err))
    if g == 2:
        worst = 0.0
        for W in surf.labels:
            for Wp in surf.labels:
                if Wp != W:
                    a, b = g2_remark_sides(surf, models[W], Wp)
                    worst = max(worst, rel_residual(a - b))
        res(Residual("g2_remark", worst, tol["g2_remark"]))
    ratios = [conjecture_log_ratio(surf, models[W], Wp)
              for W in surf.labels for Wp in surf.labels if Wp != W]
    rep.exploratory = {"conjecture_log_ratio_mean": float(np.mean(ratios)),
                       "conjecture_log_ratio_spread": float(max(ratios) - min(ratios))}
    say("stage=theorems done")
