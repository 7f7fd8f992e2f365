"""Theta functions with half-integer characteristics and the Faltings norm.

``theta[eta](z; tau) = sum_n exp(pi i (n+eta')^T tau (n+eta') + 2 pi i (n+eta')^T (z+eta''))``

Truncation uses an ellipsoid in the lattice whose radius is chosen from the
tail bound of Deconinck, Heil, Bobenko, van Hoeij and Schmies so that the
absolute error of the normalised sum (the sum times ``exp(-pi c^T Y c)``,
``c = Y^{-1} Im z``) stays below the requested tolerance.

The lattice sum runs in a compiled kernel when it is available and in numpy
otherwise; set ``HYPERDELTA_PURE_PYTHON=1`` to force the numpy path.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaincc, gammaln

from .periods import PeriodData, reduce_normalized

try:  # pragma: no cover - depends on the build
    if os.environ.get("HYPERDELTA_PURE_PYTHON") == "1":
        raise ImportError
    from ._theta_kernel import lattice_sum as _compiled_sum

    BACKEND = "compiled"
except ImportError:  # pragma: no cover
    _compiled_sum = None
    BACKEND = "python"


class ThetaError(ValueError):
    pass


# Characteristics ----------------------------------------------------------------


@dataclass(frozen=True)
class ThetaChar:
    """Half-integer characteristic ``[eta'; eta'']`` stored as 0/1 vectors (twice eta)."""

    top: Tuple[int, ...]
    bottom: Tuple[int, ...]

    def __post_init__(self):
        if len(self.top) != len(self.bottom):
            raise ThetaError("characteristic rows have different lengths")
        if any(v not in (0, 1) for v in self.top + self.bottom):
            raise ThetaError("characteristic entries must be 0 or 1 (halves)")

    @classmethod
    def zero(cls, g: int) -> "ThetaChar":
        return cls((0,) * g, (0,) * g)

    @property
    def genus(self) -> int:
        return len(self.top)

    @property
    def eta1(self) -> np.ndarray:
        return 0.5 * np.array(self.top, dtype=float)

    @property
    def eta2(self) -> np.ndarray:
        return 0.5 * np.array(self.bottom, dtype=float)

    @property
    def parity(self) -> int:
        """``+1`` for even, ``-1`` for odd characteristics."""
        return -1 if sum(a * b for a, b in zip(self.top, self.bottom)) % 2 else 1

    def __add__(self, other: "ThetaChar") -> "ThetaChar":
        return ThetaChar(tuple((a + b) % 2 for a, b in zip(self.top, other.top)),
                         tuple((a + b) % 2 for a, b in zip(self.bottom, other.bottom)))

    def __str__(self) -> str:
        return "[" + "".join(map(str, self.top)) + ";" + "".join(map(str, self.bottom)) + "]/2"

    @classmethod
    def parse(cls, text: str) -> "ThetaChar":
        """Parse ``"10;11"`` style strings (entries are twice the characteristic)."""
        t = text.strip().removesuffix("/2").strip("[]")
        top, bottom = t.split(";")
        return cls(tuple(int(c) for c in top.strip()), tuple(int(c) for c in bottom.strip()))


class CharTable:
    """Characteristics ``eta_1 .. eta_{2g+2}`` attached to the Weierstrass points.

    ``eta_{2k-1}`` has top row ``e_k/2`` and bottom row ``(e_1+..+e_{k-1})/2``;
    ``eta_{2k}`` has top row ``e_k/2`` and bottom row ``(e_1+..+e_k)/2``;
    ``eta_{2g+2} = 0`` belongs to the point at infinity.
    """

    def __init__(self, g: int):
        if g < 1:
            raise ThetaError("genus must be positive")
        self.g = g
        self.eta: Dict[int, ThetaChar] = {}
        for k in range(1, g + 2):
            top = tuple(1 if i == k - 1 else 0 for i in range(g))
            self.eta[2 * k - 1] = ThetaChar(top, tuple(1 if i < k - 1 else 0 for i in range(g)))
            if k <= g:
                self.eta[2 * k] = ThetaChar(top, tuple(1 if i < k else 0 for i in range(g)))
        self.eta[2 * g + 2] = ThetaChar.zero(g)
        self.U = frozenset(range(1, 2 * g + 2, 2))

    @property
    def branch_indices(self) -> range:
        return range(1, 2 * self.g + 2)

    def eta_S(self, S: Iterable[int]) -> ThetaChar:
        out = ThetaChar.zero(self.g)
        for i in S:
            out = out + self.eta[i]
        return out

    def T_sets(self) -> List[frozenset]:
        """Subsets of ``{1..2g+1}`` of size ``g+1`` (there are ``r`` of them)."""
        return [frozenset(c) for c in itertools.combinations(self.branch_indices, self.g + 1)]

    def even_from_T(self) -> List[ThetaChar]:
        return [self.eta_S(T ^ self.U) for T in self.T_sets()]

    def delta(self) -> ThetaChar:
        """``eta_U``: the characteristic of the Riemann vector with base point infinity."""
        return self.eta_S(self.U)

    def all_chars(self) -> List[ThetaChar]:
        g = self.g
        return [ThetaChar(t, b) for t in itertools.product((0, 1), repeat=g)
                for b in itertools.product((0, 1), repeat=g)]


def genus_constants(g: int) -> Dict[str, int]:
    """``r = C(2g+1, g+1)``, ``n = C(2g, g+1)``, ``m = C(2g+2, g)``, ``w = g(g-1)/2``."""
    return {
        "r": math.comb(2 * g + 1, g + 1),
        "n": math.comb(2 * g, g + 1),
        "m": math.comb(2 * g + 2, g),
        "w": g * (g - 1) // 2,
    }


# Truncation ------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaConfig:
    """Absolute tolerance on the normalised theta sum.

    ``precision_bits`` is the working precision of the extended-precision
    pass used for values close to the theta divisor.
    """

    tol: float = 1e-14
    precision_bits: int = 128

    def __post_init__(self):
        if not (0 < self.tol < 1):
            raise ThetaError("theta tolerance must lie in (0, 1)")
        if self.precision_bits < 53:
            raise ThetaError("precision must be at least 53 bits")

    @property
    def dps(self) -> int:
        return max(16, int(math.ceil(self.precision_bits * math.log10(2))) + 2)


def _enumerate(T: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """Integer points n with ``||T (n - center)|| <= radius`` (T upper triangular)."""
    g = T.shape[0]
    out: List[Tuple[int, ...]] = []
    n = [0] * g

    def rec(i: int, partial: float):
        # coordinates i+1..g-1 are fixed; shift from them on row i
        s = sum(T[i, j] * (n[j] - center[j]) for j in range(i + 1, g))
        rem = radius * radius - partial
        if rem < 0:
            return
        half = math.sqrt(rem) / T[i, i]
        mid = center[i] - s / T[i, i]
        for v in range(math.ceil(mid - half), math.floor(mid + half) + 1):
            n[i] = v
            val = T[i, i] * (v - center[i]) + s
            if i == 0:
                out.append(tuple(n))
            else:
                rec(i - 1, partial + val * val)

    rec(g - 1, 0.0)
    return np.array(out, dtype=float).reshape(-1, g)


def _shortest(T: np.ndarray) -> float:
    r0 = float(np.min(np.linalg.norm(T, axis=0)))
    pts = _enumerate(T, np.zeros(T.shape[0]), r0 * (1 + 1e-12))
    lens = np.linalg.norm(pts @ T.T, axis=1)
    lens = lens[lens > 1e-12]
    return float(lens.min())


def truncation_radius(T: np.ndarray, tol: float) -> float:
    """Smallest R (on a fine grid) with ``(g/2)(2/rho)^g Gamma(g/2, (R - rho/2)^2) <= tol``."""
    g = T.shape[0]
    rho = _shortest(T)
    R = max(0.5 * (math.sqrt(g) + rho), 1.0)
    logc = math.log(g / 2) + g * math.log(2 / rho) + gammaln(g / 2)

    def bound(R):
        x = (R - rho / 2) ** 2
        q = gammaincc(g / 2, x)
        return -math.inf if q == 0 else logc + math.log(q)

    lt = math.log(tol)
    while bound(R) > lt:
        R += 0.05
    return R


class ThetaEvaluator:
    """Lattice point sets and sums for one ``tau``, cached per characteristic."""

    def __init__(self, tau: np.ndarray, config: ThetaConfig = ThetaConfig()):
        tau = np.asarray(tau, dtype=complex)
        g = tau.shape[0]
        if tau.shape != (g, g):
            raise ThetaError("tau must be square")
        if np.max(np.abs(tau - tau.T)) > 1e-8:
            raise ThetaError("tau must be symmetric")
        Y = tau.imag
        try:
            L = np.linalg.cholesky(math.pi * Y)
        except np.linalg.LinAlgError as exc:
            raise ThetaError("Im tau must be positive definite") from exc
        self.tau = tau
        self.g = g
        self.Y = Y
        self.Yinv = np.linalg.inv(Y)
        self.T = L.T
        self.config = config
        self.radius = truncation_radius(self.T, config.tol)
        self.log_det_Y = float(np.linalg.slogdet(Y)[1])
        corners = np.array(list(itertools.product((-0.5, 0.5), repeat=g)))
        self._box = float(np.max(np.linalg.norm(corners @ self.T.T, axis=1)))
        self._points: Dict[Tuple[Tuple[int, ...], bool], Tuple[np.ndarray, np.ndarray]] = {}

    def points(self, char: ThetaChar, reduced: bool) -> Tuple[np.ndarray, np.ndarray]:
        """``(V, Q)`` with ``V = n + eta'`` and ``Q = pi i V^T tau V``."""
        key = (char.top, reduced)
        if key not in self._points:
            R = self.radius + (self._box if reduced else 0.0)
            n = _enumerate(self.T, -char.eta1, R)
            V = n + char.eta1
            Q = 1j * math.pi * np.einsum("mi,ij,mj->m", V, self.tau, V)
            self._points[key] = (np.ascontiguousarray(V), Q)
        return self._points[key]

    def normalized_sum(self, w: np.ndarray, char: ThetaChar, reduced: bool,
                       backend: Optional[str] = None) -> np.ndarray:
        """``theta[char](w) exp(-pi c^T Y c)`` for rows ``w`` (``c = Y^{-1} Im w``)."""
        w = np.atleast_2d(np.asarray(w, dtype=complex))
        V, Q = self.points(char, reduced)
        if not reduced:
            # exact sum needs points around every individual centre
            out = np.empty(len(w), dtype=complex)
            for i, row in enumerate(w):
                c = self.Yinv @ row.imag
                n = _enumerate(self.T, -char.eta1 - c, self.radius)
                Vi = n + char.eta1
                Qi = 1j * math.pi * np.einsum("mi,ij,mj->m", Vi, self.tau, Vi)
                out[i] = _sum(np.ascontiguousarray(Vi), Qi, (row + char.eta2)[None, :],
                              np.array([-math.pi * c @ self.Y @ c]), backend)[0]
            return out
        c = w.imag @ self.Yinv.T
        off = -math.pi * np.einsum("ki,ij,kj->k", c, self.Y, c)
        return _sum(V, Q, w + char.eta2, off, backend)


def _sum(V, Q, W, off, backend=None) -> np.ndarray:
    backend = backend or BACKEND
    if backend == "compiled":
        if _compiled_sum is None:
            raise ThetaError("compiled backend is not available")
        return _compiled_sum(V, np.ascontiguousarray(Q.real), np.ascontiguousarray(Q.imag),
                             np.ascontiguousarray(W.real), np.ascontiguousarray(W.imag),
                             np.ascontiguousarray(off, dtype=float))
    out = np.empty(len(W), dtype=complex)
    chunk = max(1, 200000 // max(1, len(V)))
    for s in range(0, len(W), chunk):
        E = Q[None, :] + 2j * math.pi * (W[s:s + chunk] @ V.T) + off[s:s + chunk, None]
        out[s:s + chunk] = np.exp(E).sum(axis=1)
    return out


@lru_cache(maxsize=32)
def _evaluator_cached(tau_bytes: bytes, g: int, tol: float) -> ThetaEvaluator:
    tau = np.frombuffer(tau_bytes, dtype=complex).reshape(g, g)
    return ThetaEvaluator(tau, ThetaConfig(tol))


def evaluator(tau: np.ndarray, config: ThetaConfig = ThetaConfig()) -> ThetaEvaluator:
    tau = np.ascontiguousarray(tau, dtype=complex)
    return _evaluator_cached(tau.tobytes(), tau.shape[0], config.tol)


def theta(z, tau, char: Optional[ThetaChar] = None, config: ThetaConfig = ThetaConfig(),
          backend: Optional[str] = None) -> np.ndarray:
    """Values of ``theta[char](z; tau)`` for a vector or rows of vectors ``z``."""
    tau = np.asarray(tau, dtype=complex)
    g = tau.shape[0]
    char = char or ThetaChar.zero(g)
    if char.genus != g:
        raise ThetaError("characteristic and tau have different genus")
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    z = np.atleast_2d(z)
    ev = evaluator(tau, config)
    wr, m = reduce_normalized(z, tau)
    m1, m2 = m[:, :g], m[:, g:]
    N = ev.normalized_sum(wr, char, reduced=True, backend=backend)
    c = wr.imag @ ev.Yinv.T
    logf = (math.pi * np.einsum("ki,ij,kj->k", c, ev.Y, c)
            + 2j * math.pi * (m1 @ char.eta1 - m2 @ char.eta2)
            - 1j * math.pi * np.einsum("ki,ij,kj->k", m2, tau, m2)
            - 2j * math.pi * np.einsum("ki,ki->k", m2, wr))
    out = N * np.exp(logf)
    return out[0] if single else out


def log_theta_constant(tau, char: ThetaChar, config: ThetaConfig = ThetaConfig()) -> complex:
    """``log theta[char](0; tau)`` (principal branch)."""
    ev = evaluator(tau, config)
    val = ev.normalized_sum(np.zeros((1, ev.g)), char, reduced=True)[0]
    if val == 0:
        return complex(-math.inf)
    return complex(np.log(val))


def log_norm_theta_w(w, tau, char: ThetaChar, config: ThetaConfig = ThetaConfig(),
                     backend: Optional[str] = None) -> np.ndarray:
    """``log ||theta[char]||(w)`` for normalised coordinates ``w`` (rows)."""
    ev = evaluator(tau, config)
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    wr, _ = reduce_normalized(w, ev.tau)
    N = ev.normalized_sum(wr, char, reduced=True, backend=backend)
    with np.errstate(divide="ignore"):
        return 0.25 * ev.log_det_Y + np.log(np.abs(N))


def riemann_characteristic(periods: PeriodData) -> ThetaChar:
    """The characteristic ``delta`` of the Riemann vector (base point infinity)."""
    return CharTable(periods.genus).delta()


class FaltingsNorm:
    """``||theta||(z) = (det Y)^{1/4} exp(-pi Im w^T Y^{-1} Im w) |theta[delta](w)|``, ``w = mu^{-1} z``."""

    def __init__(self, periods: PeriodData, config: ThetaConfig = ThetaConfig(),
                 delta: Optional[ThetaChar] = None):
        self.periods = periods
        self.delta = delta or riemann_characteristic(periods)
        self.config = config
        self.mu_inv = periods.mu_inv
        self.tau = periods.tau

    def log(self, z, backend: Optional[str] = None) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        return log_norm_theta_w(z @ self.mu_inv.T, self.tau, self.delta, self.config, backend)

    def __call__(self, z) -> np.ndarray:
        return np.exp(self.log(z))


def faltings_norm(periods: PeriodData, z, config: ThetaConfig = ThetaConfig()) -> np.ndarray:
    return FaltingsNorm(periods, config)(z)


def scan_riemann_characteristic(periods: PeriodData, weierstrass_z: Sequence[np.ndarray],
                                config: ThetaConfig = ThetaConfig(), tol: float = 1e-8
                                ) -> List[ThetaChar]:
    """Characteristics whose theta vanishes at every sum of ``g-1`` distinct Weierstrass points."""
    g = periods.genus
    pts = [np.asarray(z) for z in weierstrass_z]
    divisors = [sum(c, np.zeros(g, complex)) for c in itertools.combinations(pts, g - 1)]
    W = np.array(divisors) @ periods.mu_inv.T
    table = CharTable(g)
    found = []
    for ch in table.all_chars():
        vals = np.exp(log_norm_theta_w(W, periods.tau, ch, config))
        if np.all(vals < tol):
            found.append(ch)
    return found


# Modular forms and identities ---------------------------------------------------


def log_phi(tau, config: ThetaConfig = ThetaConfig()) -> complex:
    """``log phi_g = 8 sum_T log theta[eta_{T o U}](0)`` (a log of the complex value)."""
    g = np.asarray(tau).shape[0]
    return 8 * sum(log_theta_constant(tau, ch, config) for ch in CharTable(g).even_from_T())


def log_petersson_phi(tau, config: ThetaConfig = ThetaConfig()) -> float:
    """``log ||phi_g|| = 2 r log det Y + log |phi_g|``."""
    tau = np.asarray(tau)
    g = tau.shape[0]
    r = genus_constants(g)["r"]
    return float(2 * r * np.linalg.slogdet(tau.imag)[1] + log_phi(tau, config).real)


def _wrap(d: complex) -> complex:
    """Reduce the imaginary part of a log difference to ``(-pi, pi]``."""
    return complex(d.real, (d.imag + math.pi) % (2 * math.pi) - math.pi)


def rel_from_log(d: complex) -> float:
    """``|exp(d) - 1|`` computed stably."""
    d = _wrap(d)
    return float(abs(np.expm1(d)))


def thomae_residual(periods: PeriodData, config: ThetaConfig = ThetaConfig()) -> float:
    """Relative residual of the Thomae identity for ``theta[0](0)^8``."""
    g = periods.genus
    a = periods.curve.roots
    U = CharTable(g).U
    lhs = 8 * log_theta_constant(periods.tau, ThetaChar.zero(g), config)
    rhs = 4 * complex(np.log(periods.det_mu)) - 4 * g * math.log(math.pi)
    for k in range(1, 2 * g + 2):
        for l in range(k + 1, 2 * g + 2):
            if (k in U) == (l in U):
                rhs += 2 * complex(np.log(a[k - 1] - a[l - 1]))
    return rel_from_log(lhs - rhs)


def disc_identity_residual(periods: PeriodData, config: ThetaConfig = ThetaConfig()) -> float:
    """Relative residual of ``D^n = pi^{4gr} (det mu)^{-4r} phi_g``."""
    from .curve import log_discriminant

    g = periods.genus
    c = genus_constants(g)
    lhs = c["n"] * log_discriminant(periods.curve)
    rhs = (4 * g * c["r"] * math.log(math.pi) - 4 * c["r"] * complex(np.log(periods.det_mu))
           + log_phi(periods.tau, config))
    return rel_from_log(lhs - rhs)


def log_abs_gamma(periods: PeriodData, config: ThetaConfig = ThetaConfig()) -> Tuple[float, float]:
    """``log |gamma|`` from the discriminant route and from the ``phi_g`` route."""
    from .curve import log_discriminant

    g = periods.genus
    c = genus_constants(g)
    ld = log_discriminant(periods.curve).real
    ldet = periods.log_abs_det_mu
    via_disc = (ld - 4 * g * math.log(math.pi) + 4 * ldet) / 8
    via_phi = (4 * g * (c["r"] - c["n"]) * math.log(math.pi) - 4 * (c["r"] - c["n"]) * ldet
               + log_phi(periods.tau, config).real) / (8 * c["n"])
    return via_disc, via_phi


def normalized_sum_mp(w: np.ndarray, tau: np.ndarray, char: ThetaChar, dps: int = 40,
                      config: ThetaConfig = ThetaConfig()) -> List[complex]:
    """Extended-precision normalised sums at reduced points ``w`` (rows).

    Used where the double-precision lattice sum cancels catastrophically,
    i.e. close to the theta divisor.  Returns mpmath complex numbers.
    """
    import mpmath

    ev = evaluator(tau, config)
    V, _ = ev.points(char, reduced=True)
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    out = []
    with mpmath.workdps(dps):
        pi = mpmath.pi
        T = mpmath.matrix([[mpmath.mpc(v.real, v.imag) for v in row] for row in ev.tau])
        Y = mpmath.matrix([[mpmath.mpf(float(v)) for v in row] for row in ev.Y])
        Vm = [[mpmath.mpf(float(x)) for x in row] for row in V]
        g = ev.g
        Q = []
        for v in Vm:
            s = mpmath.mpc(0)
            for i in range(g):
                for j in range(g):
                    s += v[i] * T[i, j] * v[j]
            Q.append(1j * pi * s)
        Yinv = Y ** -1
        for row in w:
            wm = [mpmath.mpc(z.real, z.imag) + mpmath.mpf(float(e)) for z, e in zip(row, char.eta2)]
            im = [mpmath.im(z) for z in wm]
            c = [sum(Yinv[i, j] * im[j] for j in range(g)) for i in range(g)]
            off = -pi * sum(c[i] * Y[i, j] * c[j] for i in range(g) for j in range(g))
            s = mpmath.mpc(0)
            for v, q in zip(Vm, Q):
                s += mpmath.exp(q + 2j * pi * sum(v[i] * wm[i] for i in range(g)) + off)
            out.append(s)
    return out


def log_norm_theta_w_precise(w, tau, char: ThetaChar, config: ThetaConfig = ThetaConfig(),
                             threshold: float = 1e-6, dps: Optional[int] = None) -> np.ndarray:
    """Like :func:`log_norm_theta_w` but recomputes small values in extended precision."""
    import mpmath

    dps = dps or config.dps
    ev = evaluator(tau, config)
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    wr, _ = reduce_normalized(w, ev.tau)
    N = ev.normalized_sum(wr, char, reduced=True)
    out = np.empty(len(wr))
    small = np.abs(N) < threshold
    with np.errstate(divide="ignore"):
        out[~small] = np.log(np.abs(N[~small]))
    if np.any(small):
        vals = normalized_sum_mp(wr[small], ev.tau, char, dps=dps, config=config)
        out[small] = [float(mpmath.log(abs(v))) if v != 0 else -math.inf for v in vals]
    return 0.25 * ev.log_det_Y + out
