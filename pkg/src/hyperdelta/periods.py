"""Period matrices and the Abel-Jacobi map for odd-degree hyperelliptic curves.

The differentials are ``mu_k = x^{k-1} dx / (2y)`` for ``k = 1..g``.

Homology basis
--------------
With the roots ordered so that the polygon ``a_1 -> a_2 -> ... -> a_{2g+1}``
is simple, let ``c_j`` be the cycle running along ``[a_j, a_{j+1}]`` on one
sheet and back on the other.  Its period is ``2 I_j`` with ``I_j`` the
integral along the segment for a branch of y that is continued from segment
to segment around each vertex on the same side of the polygon.  Then
``A_k = c_{2k-1}`` and ``B_k = c_{2k} + c_{2k+2} + ... + c_{2g}`` is a
symplectic basis (up to an overall orientation of the B-cycles, which is
fixed by requiring ``Im tau > 0``).

Segment integrals use Gauss-Chebyshev quadrature, which absorbs the square
root end-point singularities exactly; the node count doubles until the
result stabilises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .curve import CurveSpec, SurfacePoint


class PeriodError(RuntimeError):
    pass


# Gauss-Chebyshev segment integrals --------------------------------------------


def _segment_data(a: np.ndarray, j: int):
    """Geometry of segment ``[a_j, a_{j+1}]`` (0-based ``j``)."""
    lo, hi = a[j], a[j + 1]
    m = 0.5 * (lo + hi)
    d = 0.5 * (hi - lo)
    others = np.delete(a, [j, j + 1])
    qm = np.prod(np.sqrt(m - others))
    return m, d, others, qm


def _q(x, m, others, qm):
    """Continuous branch of ``sqrt(prod (x - a_l))`` along the segment."""
    x = np.asarray(x, dtype=complex)
    return qm * np.prod(np.sqrt((x[..., None] - others) / (m - others)), axis=-1)


def _segment_integral(a: np.ndarray, g: int, j: int, rtol: float = 1e-12,
                      n0: int = 64, nmax: int = 1 << 14) -> Tuple[np.ndarray, int]:
    """``int_{a_j}^{a_{j+1}} x^{k-1} / (i d sqrt(1-t^2) q(x)) dx/2`` for ``k = 1..g``.

    The branch of y on the segment is ``i d sqrt(1-t^2) q(x)`` with
    ``x = m + d t``; the sign factor is applied by the caller.
    """
    m, d, others, qm = _segment_data(a, j)
    prev = None
    n = n0
    powers = np.arange(g)
    while True:
        t = np.cos((2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n))
        x = m + d * t
        vals = (x[:, None] ** powers[None, :]) / _q(x, m, others, qm)[:, None]
        cur = (np.pi / n) * vals.sum(axis=0) / (2j)
        if prev is not None:
            err = np.max(np.abs(cur - prev)) / max(np.max(np.abs(cur)), 1e-300)
            if err < rtol:
                return cur, n
        if n >= nmax:
            raise PeriodError(f"segment integral {j} did not converge (rel change {err:.2e})")
        prev = cur
        n *= 2


def _chain_signs(a: np.ndarray) -> List[int]:
    """Signs making ``sigma_j i d_j sqrt(1-t^2) q_j`` one branch of y along the chain.

    Continuation past each vertex goes clockwise (the same side every time).
    """
    n = len(a)
    signs = [1]
    for j in range(n - 2):
        b = a[j + 1]
        m0, d0, oth0, qm0 = _segment_data(a, j)
        m1, d1, oth1, qm1 = _segment_data(a, j + 1)
        phi_in = np.angle(-d0)
        phi_out = np.angle(d1)
        delta = -((phi_in - phi_out) % (2 * np.pi))
        qb0 = _q(b, m0, oth0, qm0)
        qb1 = _q(b, m1, oth1, qm1)
        h = signs[-1] * 1j * d0 * np.sqrt(2.0 / abs(d0)) * qb0 * np.exp(-0.5j * phi_in)
        sigma = np.exp(0.5j * (phi_in + delta)) * h / (1j * d1 * np.sqrt(2.0 / abs(d1)) * qb1)
        s = int(round(sigma.real))
        if abs(sigma - s) > 1e-6:
            raise PeriodError(f"branch continuation at vertex {j + 1} failed (sigma = {sigma})")
        signs.append(s)
    return signs


def cycle_periods(curve: CurveSpec, rtol: float = 1e-12) -> Tuple[np.ndarray, int]:
    """Periods of the chain cycles ``c_1 .. c_{2g}`` as a ``g x 2g`` array."""
    a = curve.roots_array
    g = curve.genus
    signs = _chain_signs(a)
    cols = []
    nodes = 0
    for j in range(2 * g):
        val, n = _segment_integral(a, g, j, rtol=rtol)
        nodes = max(nodes, n)
        cols.append(2.0 * val / signs[j])
    return np.array(cols).T, nodes


@dataclass
class PeriodData:
    """Period matrix ``(mu | mu')`` of the ``mu_k`` and derived quantities."""

    curve: CurveSpec
    mu: np.ndarray
    mu_prime: np.ndarray
    tau: np.ndarray
    b_flipped: bool
    symmetry_error: float
    quad_nodes: int

    @property
    def genus(self) -> int:
        return self.curve.genus

    @property
    def Y(self) -> np.ndarray:
        return self.tau.imag

    @property
    def mu_inv(self) -> np.ndarray:
        return np.linalg.inv(self.mu)

    @property
    def det_mu(self) -> complex:
        return complex(np.linalg.det(self.mu))

    @property
    def log_abs_det_mu(self) -> float:
        return float(np.linalg.slogdet(self.mu)[1])

    @property
    def det_Y(self) -> float:
        return float(np.linalg.det(self.Y))

    @property
    def hodge(self) -> np.ndarray:
        """Gram matrix ``H_{kl} = (i/2) int mu_k ^ conj(mu_l)`` (Hermitian, > 0)."""
        return self.mu @ self.Y @ self.mu.conj().T

    def reduce(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Write ``z = mu (m1 + tau m2)`` and reduce the real vector modulo 1.

        Returns ``(w, lattice)`` where ``w = mu^{-1} z`` reduced so that
        ``Y^{-1} Im w`` and ``Re w - tau_R Y^{-1} Im w`` lie in ``[-1/2, 1/2)``
        componentwise, and the removed integer coordinates ``(m1, m2)``.
        """
        w = np.asarray(z, dtype=complex) @ self.mu_inv.T
        return reduce_normalized(w, self.tau)

    def lattice_coords(self, z: np.ndarray) -> np.ndarray:
        """Real coordinates ``(m1, m2)`` with ``z = mu m1 + mu' m2``."""
        w = np.asarray(z, dtype=complex) @ self.mu_inv.T
        m2 = w.imag @ np.linalg.inv(self.Y).T
        m1 = w.real - m2 @ self.tau.real.T
        return np.concatenate([m1, m2], axis=-1)

    def to_json(self) -> dict:
        def cm(a):
            return [[[v.real, v.imag] for v in row] for row in a]

        return {
            "genus": self.genus,
            "mu": cm(self.mu),
            "mu_prime": cm(self.mu_prime),
            "tau": cm(self.tau),
            "b_flipped": self.b_flipped,
            "symmetry_error": self.symmetry_error,
        }

    @classmethod
    def from_json(cls, curve: CurveSpec, data: dict) -> "PeriodData":
        def cm(a):
            return np.array([[complex(v[0], v[1]) for v in row] for row in a])

        return cls(curve, cm(data["mu"]), cm(data["mu_prime"]), cm(data["tau"]),
                   bool(data["b_flipped"]), float(data["symmetry_error"]), 0)


def reduce_normalized(w: np.ndarray, tau: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    w = np.asarray(w, dtype=complex)
    Yinv = np.linalg.inv(tau.imag)
    c = w.imag @ Yinv.T
    m2 = np.floor(c + 0.5)
    w = w - m2 @ tau.T
    r = w.real - (w.imag @ Yinv.T) @ tau.real.T
    m1 = np.floor(r + 0.5)
    w = w - m1
    return w, np.concatenate([m1, m2], axis=-1)


def canonical_homology(curve: CurveSpec, rtol: float = 1e-12) -> Tuple[np.ndarray, np.ndarray, bool, int]:
    """Return ``(mu, mu', b_flipped, nodes)`` for the symplectic basis described above."""
    g = curve.genus
    c, nodes = cycle_periods(curve, rtol=rtol)
    mu = c[:, 0::2][:, :g].copy()
    even = c[:, 1::2]
    mu_p = np.zeros((g, g), dtype=complex)
    for k in range(g):
        mu_p[:, k] = even[:, k:].sum(axis=1)
    tau = np.linalg.solve(mu, mu_p)
    eig = np.linalg.eigvalsh(0.5 * (tau.imag + tau.imag.T))
    flipped = False
    if np.all(eig < 0):
        mu_p = -mu_p
        flipped = True
    elif not np.all(eig > 0):
        raise PeriodError(f"Im tau is indefinite (eigenvalues {eig}); root ordering gives a non-simple chain")
    return mu, mu_p, flipped, nodes


def period_matrix(curve: CurveSpec, rtol: float = 1e-12, sym_tol: float = 1e-8) -> PeriodData:
    """Compute periods and ``tau = mu^{-1} mu'``; checks symmetry and ``Im tau > 0``."""
    mu, mu_p, flipped, nodes = canonical_homology(curve, rtol=rtol)
    tau = np.linalg.solve(mu, mu_p)
    sym = float(np.max(np.abs(tau - tau.T)))
    if sym > sym_tol:
        raise PeriodError(f"tau is not symmetric (max |tau - tau^T| = {sym:.2e})")
    tau = 0.5 * (tau + tau.T)
    if np.min(np.linalg.eigvalsh(tau.imag)) <= 0:
        raise PeriodError("Im tau is not positive definite")
    return PeriodData(curve, mu, mu_p, tau, flipped, sym, nodes)


def hodge_norm(periods: PeriodData, v: np.ndarray) -> float:
    """``v^* H^{-1} v``: squared norm of the evaluation functional ``mu -> v``."""
    v = np.asarray(v, dtype=complex)
    return float(np.real(v.conj() @ np.linalg.solve(periods.hodge.T, v)))


# Local charts ----------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _fft_coeffs(func, radius: float, n: int) -> np.ndarray:
    """Taylor coefficients of ``func`` at 0 from ``n`` samples on ``|h| = radius``."""
    h = radius * np.exp(2j * np.pi * np.arange(n) / n)
    vals = func(h)
    coeffs = np.fft.fft(vals, axis=0) / n
    scale = radius ** -np.arange(n, dtype=float)
    return coeffs * (scale[:, None] if coeffs.ndim == 2 else scale)


def _trim(coeffs: np.ndarray, radius: float, rel: float = 1e-19) -> np.ndarray:
    """Drop trailing coefficients negligible on ``|h| <= radius``."""
    mag = np.abs(coeffs).reshape(coeffs.shape[0], -1).max(axis=1) * radius ** np.arange(coeffs.shape[0])
    keep = np.nonzero(mag > rel * mag.max())[0]
    n = int(keep[-1]) + 1 if keep.size else 1
    return coeffs[:n].copy()


def _horner(coeffs: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_n coeffs[n] h^n`` (coeffs shape ``(N, ...)``) at array ``h``."""
    h = np.asarray(h, dtype=complex)
    out = np.zeros(h.shape + coeffs.shape[1:], dtype=complex)
    hh = h.reshape(h.shape + (1,) * (coeffs.ndim - 1))
    for c in coeffs[::-1]:
        out = out * hh + c
    return out


class _RegularChart:
    """``z(x) = z0 + int_{x0}^x mu`` on a disk with the branch fixed by ``y0``."""

    N = 96

    def __init__(self, a: np.ndarray, g: int, x0: complex, y0: complex, z0: np.ndarray):
        self.x0, self.y0, self.z0 = x0, y0, np.asarray(z0, dtype=complex)
        self.d0 = float(np.min(np.abs(x0 - a)))
        self.a = a
        pw = np.arange(g)

        def integrand(h):
            x = x0 + h
            y = y0 * np.prod(np.sqrt((x[:, None] - a) / (x0 - a)), axis=1)
            return (x[:, None] ** pw) / (2 * y[:, None])

        c = _fft_coeffs(integrand, 0.55 * self.d0, self.N)
        n = np.arange(1, self.N + 1, dtype=float)
        self.int_coeffs = _trim(np.vstack([np.zeros((1, g), complex), c / n[:, None]]), 0.45 * self.d0)

    def y(self, x):
        x = np.asarray(x, dtype=complex)
        return self.y0 * np.prod(np.sqrt((x[..., None] - self.a) / (self.x0 - self.a)), axis=-1)

    def z(self, x):
        return self.z0 + _horner(self.int_coeffs, np.asarray(x, dtype=complex) - self.x0)


class _InfinityChart:
    """Local parameter ``t`` with ``x = t^{-2}``, ``y = -t^{-(2g+1)} prod sqrt(1 - a_l t^2)``.

    ``mu_k = t^{2(g-k)} / prod sqrt(1 - a_l t^2) dt`` and ``z(inf) = 0``.
    """

    N = 192

    def __init__(self, a: np.ndarray, g: int):
        self.a, self.g = a, g
        amax = float(np.max(np.abs(a)))
        self.u_radius = 0.7 / amax
        self.R = 2.0 * amax  # chart used for |x| >= R
        F = _fft_coeffs(lambda u: 1.0 / np.prod(np.sqrt(1.0 - a * u[:, None]), axis=1),
                        self.u_radius, self.N)
        F = _trim(F, 1.0 / self.R)
        self.F = F
        # z_k(t) = sum_n F_n t^{2n + 2(g-k) + 1} / (2n + 2(g-k) + 1)
        self.zc = []
        for k in range(1, g + 1):
            e = 2 * np.arange(len(F)) + 2 * (g - k) + 1
            self.zc.append((F / e, e))

    def t_of(self, x: complex, y: complex) -> complex:
        t = 1.0 / np.sqrt(complex(x))
        yt = self.y(t)
        return t if abs(yt - y) <= abs(yt + y) else -t

    def y(self, t):
        t = np.asarray(t, dtype=complex)
        return -t ** (-(2 * self.g + 1)) * np.prod(np.sqrt(1.0 - self.a * (t[..., None] ** 2)), axis=-1)

    def z(self, t):
        t = np.asarray(t, dtype=complex)
        u = t * t
        out = []
        for k in range(1, self.g + 1):
            c, e = self.zc[k - 1]
            out.append(t ** (2 * (self.g - k) + 1) * _horner(c, u))
        return np.stack(out, axis=-1)

    def phi(self, t):
        """Coefficients of ``mu_k`` against ``dt``."""
        t = np.asarray(t, dtype=complex)
        base = _horner(self.F, t * t)
        return np.stack([t ** (2 * (self.g - k)) * base for k in range(1, self.g + 1)], axis=-1)


class _BranchChart:
    """Local parameter ``s`` with ``x = a_k + s^2``, ``y = s h(s)``."""

    N = 128

    def __init__(self, a: np.ndarray, g: int, k: int):
        self.k, self.g = k, g
        self.ak = a[k]
        others = np.delete(a, k)
        self.others = others
        self.dmin = float(np.min(np.abs(self.ak - others)))
        self.r = 0.4 * self.dmin  # chart used for |x - a_k| <= r
        self.h0 = np.prod(np.sqrt(self.ak - others))
        pw = np.arange(g)

        def integrand(v):
            hv = self.h0 * np.prod(np.sqrt(1.0 + v[:, None] / (self.ak - others)), axis=1)
            return ((self.ak + v[:, None]) ** pw) / hv[:, None]

        c = _fft_coeffs(integrand, 0.6 * self.dmin, self.N)
        self.int_coeffs = _trim(c / (2 * np.arange(self.N) + 1.0)[:, None], self.r)
        self.center = None

    def h(self, s):
        s = np.asarray(s, dtype=complex)
        return self.h0 * np.prod(np.sqrt(1.0 + (s[..., None] ** 2) / (self.ak - self.others)), axis=-1)

    def y(self, s):
        return np.asarray(s) * self.h(s)

    def s_of(self, x: complex, y: complex) -> complex:
        s = np.sqrt(complex(x) - self.ak)
        return s if abs(self.y(s) - y) <= abs(self.y(-s) - y) else -s

    def local_z(self, s):
        s = np.asarray(s, dtype=complex)
        return s[..., None] * _horner(self.int_coeffs, s * s)

    def z(self, s):
        return self.center + self.local_z(s)


class AbelJacobi:
    """Abel-Jacobi map ``P -> int_inf^P (mu_1, .., mu_g)`` modulo periods.

    Values are produced for one lift of x (sheet chosen by the chart);
    the other lift has the negated image.  Call :meth:`lift` for arrays of x
    and :meth:`point` for a specific :class:`SurfacePoint`.
    """

    def __init__(self, periods: PeriodData):
        self.periods = periods
        curve = periods.curve
        self.curve = curve
        self.g = curve.genus
        self.a = curve.roots_array
        self.inf = _InfinityChart(self.a, self.g)
        self.branch = [_BranchChart(self.a, self.g, k) for k in range(len(self.a))]
        self._anchors: Dict[Tuple[int, int, int], _RegularChart] = {}
        self._dmin = min(ch.dmin for ch in self.branch)
        for ch in self.branch:
            self._init_branch_center(ch)

    # path integration -----------------------------------------------------
    def _start(self, direction: complex) -> Tuple[complex, complex, np.ndarray]:
        """Point on the infinity chart boundary in the given direction."""
        direction = direction / abs(direction)
        x = 1.05 * self.inf.R * direction
        t = 1.0 / np.sqrt(x)
        return x, complex(self.inf.y(t)), self.inf.z(t)

    def integrate_path(self, x0: complex, y0: complex, z0: np.ndarray, x1: complex
                       ) -> Tuple[complex, np.ndarray]:
        """Integrate ``mu`` along the segment ``x0 -> x1``; returns ``(y1, z1)``."""
        a = self.a
        x, y, z = complex(x0), complex(y0), np.array(z0, dtype=complex)
        pw = np.arange(self.g)
        while x != x1:
            d = float(np.min(np.abs(x - a)))
            if d == 0:
                raise PeriodError("integration path hits a branch point")
            rem = x1 - x
            xn = x1 if abs(rem) <= 0.5 * d else x + rem * (0.5 * d / abs(rem))
            half = 0.5 * (xn - x)
            xs = x + half * (1.0 + _GL_NODES)
            ys = y * np.prod(np.sqrt((xs[:, None] - a) / (x - a)), axis=1)
            vals = (xs[:, None] ** pw) / (2 * ys[:, None])
            z = z + half * (_GL_WEIGHTS @ vals)
            y = y * complex(np.prod(np.sqrt((xn - a) / (x - a))))
            x = xn
        return y, z

    def _clearance(self, x0: complex, x1: complex) -> float:
        """Distance from the segment ``x0 -> x1`` to the nearest root."""
        d = x1 - x0
        s = np.clip(np.real((self.a - x0) * np.conj(d)) / abs(d) ** 2, 0.0, 1.0)
        return float(np.min(np.abs(x0 + s * d - self.a)))

    def _from_infinity(self, x1: complex) -> Tuple[complex, np.ndarray]:
        x1 = complex(x1)
        if abs(x1) >= 1.05 * self.inf.R:
            t = 1.0 / np.sqrt(x1)
            return complex(self.inf.y(t)), self.inf.z(t)
        base = x1 if abs(x1) > 0 else 1.0
        need = min(0.5 * float(np.min(np.abs(x1 - self.a))), 0.1 * self._dmin)
        best = None
        for k in range(24):
            direction = base * np.exp(1j * (0.37 * k * (-1) ** k))
            xs, ys, zs = self._start(direction)
            c = self._clearance(xs, x1)
            if c >= need:
                return self.integrate_path(xs, ys, zs, x1)
            if best is None or c > best[0]:
                best = (c, xs, ys, zs)
        _, xs, ys, zs = best
        return self.integrate_path(xs, ys, zs, x1)

    def _init_branch_center(self, ch: _BranchChart) -> None:
        others = ch.others
        # boundary point pointing away from the nearest other root
        near = others[np.argmin(np.abs(others - ch.ak))]
        direction = (ch.ak - near) / abs(ch.ak - near)
        xb = ch.ak + ch.r * direction
        yb, zb = self._from_infinity(xb)
        sb = ch.s_of(xb, yb)
        ch.center = zb - ch.local_z(sb)

    def _anchor_key(self, key: Tuple[int, int, int]) -> _RegularChart:
        ch = self._anchors.get(key)
        if ch is None:
            level, i, j = key
            h = 2.0 ** level
            x0 = complex(i * h, j * h)
            y0, z0 = self._from_infinity(x0)
            ch = _RegularChart(self.a, self.g, x0, y0, z0)
            self._anchors[key] = ch
        return ch

    def _anchor(self, x: complex) -> _RegularChart:
        d = float(np.min(np.abs(x - self.a)))
        level = math.floor(math.log2(d / 3.0))
        h = 2.0 ** level
        return self._anchor_key((level, round(x.real / h), round(x.imag / h)))

    # public ---------------------------------------------------------------
    def chart_for(self, x: complex):
        """``(kind, chart)`` used for the lift at ``x``."""
        dists = np.abs(x - self.a)
        k = int(np.argmin(dists))
        if dists[k] <= self.branch[k].r:
            return "branch", self.branch[k]
        if abs(x) >= self.inf.R:
            return "inf", self.inf
        return "regular", self._anchor(x)

    def lift(self, xs) -> Tuple[np.ndarray, np.ndarray]:
        """For each x return ``(y, z)`` for one of its two lifts."""
        xs = np.asarray(xs, dtype=complex)
        shape = xs.shape
        flat = xs.ravel()
        yf = np.empty(flat.shape, dtype=complex)
        zf = np.empty(flat.shape + (self.g,), dtype=complex)
        dists = np.abs(flat[:, None] - self.a[None, :])
        nearest = np.argmin(dists, axis=1)
        dnear = dists[np.arange(flat.size), nearest]
        radii = np.array([ch.r for ch in self.branch])
        in_branch = dnear <= radii[nearest]
        in_inf = ~in_branch & (np.abs(flat) >= self.inf.R)
        regular = ~in_branch & ~in_inf
        for k, ch in enumerate(self.branch):
            idx = np.nonzero(in_branch & (nearest == k))[0]
            if idx.size:
                s = np.sqrt(flat[idx] - ch.ak)
                yf[idx] = ch.y(s)
                zf[idx] = ch.z(s)
        idx = np.nonzero(in_inf)[0]
        if idx.size:
            t = 1.0 / np.sqrt(flat[idx])
            yf[idx] = self.inf.y(t)
            zf[idx] = self.inf.z(t)
        idx = np.nonzero(regular)[0]
        if idx.size:
            xr = flat[idx]
            level = np.floor(np.log2(dnear[idx] / 3.0)).astype(int)
            h = 2.0 ** level
            ii = np.round(xr.real / h).astype(np.int64)
            jj = np.round(xr.imag / h).astype(np.int64)
            keys = np.stack([level, ii, jj], axis=1)
            uniq, inv = np.unique(keys, axis=0, return_inverse=True)
            inv = inv.ravel()
            for u, key in enumerate(uniq):
                sel = idx[inv == u]
                ch = self._anchor_key(tuple(int(v) for v in key))
                yf[sel] = ch.y(flat[sel])
                zf[sel] = ch.z(flat[sel])
        return yf.reshape(shape), zf.reshape(shape + (self.g,))

    def point(self, P: SurfacePoint) -> np.ndarray:
        """Image of a point (not reduced modulo periods)."""
        if P.is_infinity:
            return np.zeros(self.g, dtype=complex)
        y, z = self.lift([P.x])
        y, z = complex(y[0]), z[0]
        if abs(P.y) == 0 or abs(y - P.y) <= abs(y + P.y):
            return z
        return -z

    def weierstrass_images(self) -> List[np.ndarray]:
        """Images of ``a_1 .. a_{2g+1}`` and of infinity (last), unreduced."""
        return [ch.center.copy() for ch in self.branch] + [np.zeros(self.g, dtype=complex)]

    def local_chart(self, P: SurfacePoint) -> _RegularChart:
        """A chart centred at a finite non-Weierstrass point on its own sheet."""
        z = self.point(P)
        return _RegularChart(self.a, self.g, complex(P.x), complex(P.y), z)

    def infinity_z(self, t):
        return self.inf.z(t)

    def infinity_phi(self, t):
        return self.inf.phi(t)


def local_coordinate_residual(aj: AbelJacobi, t: complex) -> np.ndarray:
    """``z_k - z_g^{2(g-k)+1}/(2(g-k)+1)`` at parameter ``t`` near infinity."""
    z = aj.infinity_z(t)
    g = aj.g
    zg = z[..., g - 1]
    out = []
    for k in range(1, g + 1):
        e = 2 * (g - k) + 1
        out.append(z[..., k - 1] - zg ** e / e)
    return np.stack(out, axis=-1)


def is_in_lattice(periods: PeriodData, z: np.ndarray, tol: float = 1e-8) -> bool:
    m = periods.lattice_coords(z)
    return bool(np.max(np.abs(m - np.round(m))) < tol)


def half_period_characteristic(periods: PeriodData, z: np.ndarray, tol: float = 1e-7
                               ) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """For a 2-torsion point ``z = mu(eta'' + tau eta')`` return ``2 eta'`` and ``2 eta''`` mod 2."""
    m = periods.lattice_coords(z)
    g = periods.genus
    twice = 2 * m
    if np.max(np.abs(twice - np.round(twice))) > tol:
        raise PeriodError(f"point is not 2-torsion (coords {m})")
    r = np.mod(np.round(twice).astype(int), 2)
    return tuple(int(v) for v in r[g:]), tuple(int(v) for v in r[:g])
