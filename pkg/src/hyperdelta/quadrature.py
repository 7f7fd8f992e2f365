"""Integration of functions of the Abel-Jacobi image against the Arakelov form.

The surface is covered by a smooth partition of unity:

* a disk around every finite branch point in the local parameter
  ``s = sqrt(x - a)``, which covers both sheets and removes the
  ``|x - a|^{-1}`` singularity of the density;
* a disk around infinity in ``t = x^{-1/2}``;
* a disk in x (both sheets) around each extra point where the integrand has
  a logarithmic singularity;
* the remainder, a smooth compactly supported function of x, integrated by
  an adaptive quadtree of tensor Gauss-Legendre cells.

Disks use graded radial panels towards the centre, so logarithmic
singularities at the centre are integrated to high accuracy, and the
trapezoidal rule in the angle.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .curve import SurfacePoint
from .periods import AbelJacobi, PeriodData


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature settings.

    ``tol`` is the absolute target for integrals of log-scale quantities
    against the unit-mass Arakelov form.  ``method`` is ``"adaptive"`` or
    ``"montecarlo"``; the latter samples the smooth remainder with a seeded
    generator.
    """

    method: str = "adaptive"
    tol: float = 1e-6
    budget: int = 400_000
    seed: int = 0
    gl_order: int = 8
    disk_levels: int = 26
    disk_order: int = 8
    disk_angles: int = 64
    disk_outer_panels: int = 16
    max_depth: int = 14

    def __post_init__(self):
        if self.method not in ("adaptive", "montecarlo"):
            raise QuadratureError(f"unknown quadrature method {self.method!r}")
        if not (0 < self.tol < 1):
            raise QuadratureError("quadrature tolerance must lie in (0, 1)")
        if self.budget < 1000:
            raise QuadratureError("quadrature budget is too small")


@lru_cache(maxsize=None)
def _leggauss(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def smoothstep(u):
    """C-infinity step: 0 for ``u <= 0``, 1 for ``u >= 1``."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
        out = a / (a + b)
    return out


def disk_cutoff(dist, radius):
    """1 inside ``radius/2``, 0 outside ``radius``, smooth in between."""
    return 1.0 - smoothstep((np.asarray(dist) / radius - 0.5) / 0.5)


class ArakelovDensity:
    """Per-sheet density of the Arakelov form against ``dA_x`` and in the charts.

    With ``H = mu Y mu^*`` the Gram matrix of the ``mu_k`` the form is
    ``(1/g) v^* H^{-1} v`` times ``dA`` of the chart, where ``v`` holds the
    coefficients of the ``mu_k`` against the chart differential.
    """

    def __init__(self, periods: PeriodData):
        self.periods = periods
        self.g = periods.genus
        self.Hinv = np.linalg.inv(periods.hodge)
        self.a = periods.curve.roots_array

    def quad_form(self, v: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("...i,ij,...j->...", v.conj(), self.Hinv, v)) / self.g

    def at_x(self, x) -> np.ndarray:
        """Density against ``dA_x`` on one sheet (``x`` not a branch point)."""
        x = np.asarray(x, dtype=complex)
        v = x[..., None] ** np.arange(self.g)
        absf = np.prod(np.abs(x[..., None] - self.a), axis=-1)
        return self.quad_form(v) / (4.0 * absf)


def _graded_disk(sigma_max: float, cfg: QuadConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Polar nodes ``(sigma, theta)`` and weights for the rule ``int f sigma dsigma dtheta``.

    The angular weight is separated so that a half-resolution rule can be
    formed for error estimation.
    """
    xg, wg = np.polynomial.legendre.leggauss(cfg.disk_order)
    # the cutoff transition lives in [sigma_max/2, sigma_max]; resolve it finely
    outer = list(sigma_max * (0.5 + 0.5 * np.arange(1, cfg.disk_outer_panels + 1) / cfg.disk_outer_panels))
    edges = [0.0] + [sigma_max * 2.0 ** (-k) for k in range(cfg.disk_levels, 0, -1)] + outer
    sig, wsig = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sig.append(lo + (hi - lo) * 0.5 * (xg + 1))
        wsig.append((hi - lo) * 0.5 * wg)
    sig = np.concatenate(sig)
    wsig = np.concatenate(wsig) * sig
    M = cfg.disk_angles
    th = 2 * np.pi * np.arange(M) / M
    return sig, wsig, th, np.full(M, 2 * np.pi / M)


@dataclass
class DiskNodes:
    """Nodes of one disk: images ``z`` and masses, shaped ``(n_sigma, n_theta)``."""

    label: str
    z: np.ndarray
    mass: np.ndarray

    def integrate(self, F: Callable[[np.ndarray], np.ndarray]) -> Tuple[float, float]:
        g = self.z.shape[-1]
        vals = F(self.z.reshape(-1, g)).reshape(self.mass.shape)
        full = float(np.sum(vals * self.mass))
        half = float(2 * np.sum(vals[:, ::2] * self.mass[:, ::2]))
        return full, abs(full - half)


class SurfaceQuadrature:
    """Reusable node sets for ``int_X F(AJ(P)) mu(P)``.

    ``extra`` lists points where integrands will have logarithmic
    singularities besides the Weierstrass points.
    """

    def __init__(self, aj: AbelJacobi, cfg: QuadConfig = QuadConfig(),
                 extra: Sequence[SurfacePoint] = ()):
        self.aj = aj
        self.cfg = cfg
        self.g = aj.g
        self.a = aj.a
        self.density = ArakelovDensity(aj.periods)
        self.extra = [P for P in extra if not P.is_infinity]
        # branch disks shrink so that extra points keep a disk of their own
        self.branch_r = np.array([ch.r for ch in aj.branch])
        for P in self.extra:
            self.branch_r = np.minimum(self.branch_r, 0.4 * np.abs(P.x - self.a))
        reach = float(np.max(np.abs(self.a) + self.branch_r))
        for P in self.extra:
            reach = max(reach, 1.5 * abs(P.x))
        self.R_a = 1.02 * reach
        self.R_b = 2.0 * self.R_a
        self.extra_r = []
        for P in self.extra:
            gap = float(np.min(np.abs(P.x - self.a) - self.branch_r))
            # stay inside the disk where the local Taylor chart is accurate
            r = min(0.5 * gap, 0.5 * (self.R_a - abs(P.x)), 0.4 * aj.local_chart(P).d0)
            for Q, rq in zip(self.extra, self.extra_r):
                r = min(r, 0.5 * abs(P.x - Q.x))
            if r <= 0:
                raise QuadratureError(f"point x = {P.x} is too close to a branch point or another singular point")
            self.extra_r.append(r)
        # radius of the other extra disks must respect later points as well
        for i, P in enumerate(self.extra):
            for j, Q in enumerate(self.extra):
                if i != j:
                    self.extra_r[i] = min(self.extra_r[i], 0.5 * abs(P.x - Q.x))
        self.disks: List[DiskNodes] = self._build_disks()
        self._cells: Dict[Tuple[int, int, int], Tuple[np.ndarray, np.ndarray]] = {}
        side = self.R_b
        self._box = (-side, side, -side, side)

    # partition of unity ---------------------------------------------------
    def cutoffs(self, x: np.ndarray) -> np.ndarray:
        """``sum`` of all disk cutoffs at plane points ``x``."""
        x = np.asarray(x, dtype=complex)
        tot = np.zeros(x.shape)
        for k, r in enumerate(self.branch_r):
            tot += disk_cutoff(np.abs(x - self.a[k]), r)
        tot += smoothstep((np.abs(x) - self.R_a) / (self.R_b - self.R_a))
        for P, r in zip(self.extra, self.extra_r):
            tot += disk_cutoff(np.abs(x - P.x), r)
        return tot

    # disks ----------------------------------------------------------------
    def _build_disks(self) -> List[DiskNodes]:
        cfg = self.cfg
        aj = self.aj
        dens = self.density
        out = []
        for k, ch in enumerate(aj.branch):
            rk = float(self.branch_r[k])
            sig, wsig, th, wth = _graded_disk(math.sqrt(rk), cfg)
            s = sig[:, None] * np.exp(1j * th)[None, :]
            v = ((ch.ak + s * s)[..., None] ** np.arange(self.g)) / ch.h(s)[..., None]
            cut = disk_cutoff(sig * sig, rk)[:, None]
            mass = dens.quad_form(v) * cut * wsig[:, None] * wth[None, :]
            out.append(DiskNodes(f"branch{k}", ch.z(s), mass))
        # infinity
        sig, wsig, th, wth = _graded_disk(self.R_a ** -0.5, cfg)
        t = sig[:, None] * np.exp(1j * th)[None, :]
        with np.errstate(divide="ignore"):
            absx = np.where(sig > 0, sig ** -2.0, np.inf)
        cut = smoothstep((absx - self.R_a) / (self.R_b - self.R_a))[:, None]
        z = np.empty(t.shape + (self.g,), dtype=complex)
        phi = np.empty(t.shape + (self.g,), dtype=complex)
        near = (sig ** -2.0) < 1.05 * aj.inf.R
        far = ~near
        z[far] = aj.inf.z(t[far])
        phi[far] = aj.inf.phi(t[far])
        if np.any(near):
            tn = t[near]
            x = tn ** -2.0
            y_t = aj.inf.y(tn)
            yl, zl = aj.lift(x)
            flip = np.abs(yl - y_t) > np.abs(yl + y_t)
            zl[flip] = -zl[flip]
            z[near] = zl
            e = 2 * (self.g - np.arange(1, self.g + 1))
            base = 1.0 / np.prod(np.sqrt(1.0 - self.a * (tn[..., None] ** 2)), axis=-1)
            phi[near] = tn[..., None] ** e * base[..., None]
        mass = dens.quad_form(phi) * cut * wsig[:, None] * wth[None, :]
        out.append(DiskNodes("infinity", z, mass))
        # extra points: x-disks on both sheets
        for i, (P, r) in enumerate(zip(self.extra, self.extra_r)):
            sig, wsig, th, wth = _graded_disk(r, cfg)
            h = sig[:, None] * np.exp(1j * th)[None, :]
            chart = aj.local_chart(P)
            zl = chart.z(P.x + h)
            cut = disk_cutoff(sig, r)[:, None]
            mass = dens.at_x(P.x + h) * cut * wsig[:, None] * wth[None, :]
            out.append(DiskNodes(f"point{i}", zl, mass))
            out.append(DiskNodes(f"point{i}'", -zl, mass))
        return out

    # smooth remainder ----------------------------------------------------------
    def _cell_nodes(self, key: Tuple[int, int, int]) -> Tuple[np.ndarray, np.ndarray]:
        """Images (both sheets stacked) and masses for cell ``(level, i, j)``."""
        hit = self._cells.get(key)
        if hit is not None:
            return hit
        level, i, j = key
        x0, x1, y0, y1 = self._box
        hx = (x1 - x0) / 2 ** level
        hy = (y1 - y0) / 2 ** level
        xg, wg = _leggauss(self.cfg.gl_order)
        xs = x0 + hx * (i + 0.5 * (xg + 1))
        ys = y0 + hy * (j + 0.5 * (xg + 1))
        X = xs[:, None] + 1j * ys[None, :]
        W = (0.25 * hx * hy) * wg[:, None] * wg[None, :]
        X = X.ravel()
        W = W.ravel()
        weight = (1.0 - self.cutoffs(X))
        keep = weight > 1e-300
        X, W = X[keep], (W * weight)[keep]
        if X.size:
            W = W * self.density.at_x(X)
            _, z = self.aj.lift(X)
            res = (np.concatenate([z, -z]), np.concatenate([W, W]))
        else:
            res = (np.zeros((0, self.g), complex), np.zeros(0))
        self._cells[key] = res
        return res

    def _cell_value(self, key, F) -> float:
        z, w = self._cell_nodes(key)
        if w.size == 0:
            return 0.0
        return float(np.sum(w * F(z)))

    def _cell_empty(self, key) -> bool:
        """True if the cell lies inside a fully cut-off region or outside the support."""
        level, i, j = key
        x0, x1, y0, y1 = self._box
        hx = (x1 - x0) / 2 ** level
        hy = (y1 - y0) / 2 ** level
        c = complex(x0 + hx * (i + 0.5), y0 + hy * (j + 0.5))
        rad = 0.5 * math.hypot(hx, hy)
        if abs(c) - rad >= self.R_b:
            return True
        for k, r in enumerate(self.branch_r):
            if abs(c - self.a[k]) + rad <= 0.5 * r:
                return True
        for P, r in zip(self.extra, self.extra_r):
            if abs(c - P.x) + rad <= 0.5 * r:
                return True
        return False

    def _remainder_adaptive(self, F) -> Tuple[float, float]:
        cfg = self.cfg
        start = 3
        active = [(start, i, j) for i in range(2 ** start) for j in range(2 ** start)]
        active = [k for k in active if not self._cell_empty(k)]
        values = {k: self._cell_value(k, F) for k in active}
        total, err = 0.0, 0.0
        nodes = 0
        while active:
            nxt = []
            for key in active:
                level, i, j = key
                kids = [(level + 1, 2 * i + di, 2 * j + dj) for di in (0, 1) for dj in (0, 1)]
                kids = [k for k in kids if not self._cell_empty(k)]
                kv = {k: self._cell_value(k, F) for k in kids}
                nodes += 4 * cfg.gl_order ** 2
                s = sum(kv.values())
                diff = abs(s - values[key])
                allowed = 0.1 * cfg.tol * 4.0 ** (-level)
                if diff <= allowed or level + 1 >= cfg.max_depth:
                    total += s
                    err += diff
                else:
                    for k, v in kv.items():
                        values[k] = v
                        nxt.append(k)
                if nodes > cfg.budget:
                    raise QuadratureError("quadrature budget exhausted before reaching the tolerance")
            active = nxt
        return total, err

    def _remainder_mc(self, F) -> Tuple[float, float]:
        rng = np.random.default_rng(self.cfg.seed)
        n = self.cfg.budget // 4
        x0, x1, y0, y1 = self._box
        X = rng.uniform(x0, x1, n) + 1j * rng.uniform(y0, y1, n)
        area = (x1 - x0) * (y1 - y0)
        weight = (1.0 - self.cutoffs(X)) * self.density.at_x(X)
        keep = weight > 0
        X, weight = X[keep], weight[keep]
        _, z = self.aj.lift(X)
        vals = weight * (F(z) + F(-z)) * area
        vals_full = np.zeros(n)
        vals_full[: vals.size] = vals
        return float(vals_full.sum() / n), float(vals_full.std() / math.sqrt(n))

    def integrate(self, F: Callable[[np.ndarray], np.ndarray]) -> Tuple[float, float]:
        """``int_X F(AJ(P)) mu(P)`` and an error estimate.

        ``F`` maps an array of images (rows) to real values; it is evaluated
        on both lifts of every point, so it need not be even.
        """
        total, err = 0.0, 0.0
        for d in self.disks:
            v, e = d.integrate(F)
            total += v
            err += e
        if self.cfg.method == "adaptive":
            v, e = self._remainder_adaptive(F)
        else:
            v, e = self._remainder_mc(F)
        return total + v, err + e

    def mass(self) -> Tuple[float, float]:
        return self.integrate(lambda z: np.ones(len(z)))
