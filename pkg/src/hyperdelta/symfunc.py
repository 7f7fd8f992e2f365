"""Exact symmetric-function algebra.

Sparse multivariate polynomials over the rationals, Schur polynomials of
partitions, their expansion on products of power sums, and the staircase
polynomials ``S_g``, ``s_g`` and ``sigma_g`` whose leading terms drive the
local expansions used in :mod:`hyperdelta.invariants`.

Everything here is exact: coefficients are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple

Exponent = Tuple[int, ...]


class SymfuncError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """A partition stored as a non-increasing tuple of positive parts."""

    parts: Tuple[int, ...]

    def __init__(self, parts: Iterable[int]):
        parts = tuple(int(p) for p in parts)
        if any(p <= 0 for p in parts):
            raise SymfuncError(f"partition parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise SymfuncError(f"partition parts must be non-increasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def staircase(cls, g: int) -> "Partition":
        return cls(range(g, 0, -1))

    @property
    def size(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    @cached_property
    def conjugate(self) -> "Partition":
        if not self.parts:
            return Partition(())
        return Partition(
            sum(1 for p in self.parts if p >= k) for k in range(1, self.parts[0] + 1)
        )

    def __repr__(self) -> str:
        return f"Partition({list(self.parts)})"


def partitions(d: int, max_part: int | None = None) -> Iterator[Partition]:
    """All partitions of ``d`` in reverse lexicographic order."""
    if max_part is None:
        max_part = d
    if d == 0:
        yield Partition(())
        return
    for first in range(min(d, max_part), 0, -1):
        for rest in partitions(d - first, first):
            yield Partition((first,) + rest.parts)


class SymPoly:
    """Sparse polynomial in ``arity`` variables with rational coefficients.

    Terms are kept in a dict keyed by exponent tuples; zero coefficients are
    never stored, so equality of polynomials is equality of the dicts.
    """

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: Mapping[Exponent, object] | None = None):
        if arity < 0:
            raise SymfuncError("arity must be non-negative")
        self.arity = arity
        self.terms: Dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != arity or any(e < 0 for e in exp):
                raise SymfuncError(f"bad exponent {exp} for arity {arity}")
            c = Fraction(c)
            if c:
                self.terms[exp] = self.terms.get(exp, Fraction(0)) + c
                if not self.terms[exp]:
                    del self.terms[exp]

    # construction helpers
    @classmethod
    def constant(cls, arity: int, c) -> "SymPoly":
        return cls(arity, {(0,) * arity: c})

    @classmethod
    def variable(cls, arity: int, i: int) -> "SymPoly":
        exp = [0] * arity
        exp[i] = 1
        return cls(arity, {tuple(exp): 1})

    @classmethod
    def _raw(cls, arity: int, terms: Dict[Exponent, Fraction]) -> "SymPoly":
        p = cls.__new__(cls)
        p.arity = arity
        p.terms = {e: c for e, c in terms.items() if c}
        return p

    def _coerce(self, other) -> "SymPoly":
        if isinstance(other, SymPoly):
            if other.arity != self.arity:
                raise SymfuncError("arity mismatch")
            return other
        return SymPoly.constant(self.arity, other)

    # arithmetic
    def __add__(self, other) -> "SymPoly":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return SymPoly._raw(self.arity, out)

    __radd__ = __add__

    def __neg__(self) -> "SymPoly":
        return SymPoly._raw(self.arity, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "SymPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "SymPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "SymPoly":
        if not isinstance(other, SymPoly):
            c = Fraction(other)
            return SymPoly._raw(self.arity, {e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        out: Dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return SymPoly._raw(self.arity, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "SymPoly":
        if n < 0:
            raise SymfuncError("negative power")
        result = SymPoly.constant(self.arity, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, SymPoly):
            return self.arity == other.arity and self.terms == other.terms
        try:
            return self == SymPoly.constant(self.arity, other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    # structure
    @property
    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def homogeneous_part(self, degree: int) -> "SymPoly":
        return SymPoly._raw(
            self.arity, {e: c for e, c in self.terms.items() if sum(e) == degree}
        )

    def least_degree_part(self) -> "SymPoly":
        if not self.terms:
            return self
        return self.homogeneous_part(min(sum(e) for e in self.terms))

    def weighted_degrees(self, weights: Sequence[int]) -> set:
        return {sum(w * a for w, a in zip(weights, e)) for e in self.terms}

    def is_symmetric(self) -> bool:
        for i in range(self.arity - 1):
            swapped = {}
            for e, c in self.terms.items():
                e = list(e)
                e[i], e[i + 1] = e[i + 1], e[i]
                swapped[tuple(e)] = c
            if swapped != self.terms:
                return False
        return True

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exp), Fraction(0))

    # evaluation
    def __call__(self, *values):
        if len(values) == 1 and isinstance(values[0], (list, tuple)):
            values = tuple(values[0])
        if len(values) != self.arity:
            raise SymfuncError(f"expected {self.arity} values, got {len(values)}")
        total = 0
        for e, c in self.terms.items():
            term = c
            for v, k in zip(values, e):
                if k:
                    term = term * v**k
            total = total + term
        return total

    def substitute(self, polys: Sequence["SymPoly"]) -> "SymPoly":
        """Compose: replace variable ``i`` by ``polys[i]``."""
        if len(polys) != self.arity:
            raise SymfuncError("substitution needs one polynomial per variable")
        arity = polys[0].arity if polys else 0
        powers: Dict[Tuple[int, int], SymPoly] = {}

        def power(i: int, k: int) -> SymPoly:
            if (i, k) not in powers:
                powers[(i, k)] = polys[i] ** k
            return powers[(i, k)]

        out = SymPoly(arity)
        for e, c in self.terms.items():
            term = SymPoly.constant(arity, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    # serialisation
    def to_json(self) -> Dict[str, str]:
        """Canonical mapping ``"e1,e2,..." -> "num/den"`` with sorted keys."""
        return {
            ",".join(map(str, e)): f"{c.numerator}/{c.denominator}"
            for e, c in sorted(self.terms.items())
        }

    @classmethod
    def from_json(cls, arity: int, data: Mapping[str, str]) -> "SymPoly":
        terms = {}
        for key, value in data.items():
            exp = tuple(int(k) for k in key.split(",")) if key else ()
            terms[exp] = Fraction(value)
        return cls(arity, terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for e, c in sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0])):
            mono = "*".join(
                f"z{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k
            )
            pieces.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(pieces)


def elementary_symmetric(r: int, arity: int) -> SymPoly:
    if r < 0 or arity < 1:
        raise SymfuncError("need r >= 0 and arity >= 1")
    if r > arity:
        return SymPoly(arity)
    terms = {}
    for combo in itertools.combinations(range(arity), r):
        exp = [0] * arity
        for i in combo:
            exp[i] = 1
        terms[tuple(exp)] = Fraction(1)
    return SymPoly(arity, terms)


def power_sum(r: int, arity: int) -> SymPoly:
    if r < 1:
        raise SymfuncError("power sums start at r = 1")
    terms = {}
    for i in range(arity):
        exp = [0] * arity
        exp[i] = r
        terms[tuple(exp)] = Fraction(1)
    return SymPoly(arity, terms)


def _det(matrix: List[List]):
    """Determinant by cofactor expansion along the first row.

    Works for any ring elements supporting ``+``, ``-`` and ``*`` (SymPoly,
    Fraction, int).  Only used on small matrices.
    """
    n = len(matrix)
    if n == 0:
        return 1
    if n == 1:
        return matrix[0][0]
    total = None
    for j in range(n):
        entry = matrix[0][j]
        if isinstance(entry, SymPoly) and not entry:
            continue
        if not isinstance(entry, SymPoly) and entry == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = entry * _det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return matrix[0][0] * 0
    return total


def exact_int_det(matrix: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant of an integer matrix."""
    m = [list(map(int, row)) for row in matrix]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def schur(pi: Partition, arity: int) -> SymPoly:
    """Schur polynomial via the dual Jacobi-Trudi determinant in the ``e_r``.

    The determinant has size ``len(pi.conjugate)`` (= ``pi.parts[0]``); for
    self-conjugate partitions such as the staircase this is ``len(pi)``.
    """
    if arity < len(pi):
        raise SymfuncError(f"arity {arity} too small for partition of length {len(pi)}")
    conj = pi.conjugate.parts
    h = len(conj)
    if h == 0:
        return SymPoly.constant(arity, 1)
    e = {}

    def e_r(r: int) -> SymPoly:
        if r < 0:
            return SymPoly(arity)
        if r not in e:
            e[r] = elementary_symmetric(r, arity)
        return e[r]

    matrix = [[e_r(conj[k] - k + l) for l in range(h)] for k in range(h)]
    return _det(matrix)


def schur_at_ones(pi: Partition) -> Fraction:
    """Value of ``S_pi(1, ..., 1)`` in ``len(pi)`` variables (hook-content product)."""
    parts = pi.parts
    out = Fraction(1)
    for k, l in itertools.combinations(range(len(parts)), 2):
        out *= Fraction(parts[k] - parts[l] + l - k, l - k)
    return out


def z_factor(cycle_type: Sequence[int]) -> int:
    """``z(i) = prod_alpha i_alpha! * alpha^{i_alpha}`` for multiplicity tuple ``i``."""
    out = 1
    for alpha, mult in enumerate(cycle_type, start=1):
        out *= math.factorial(mult) * alpha**mult
    return out


def multiplicities(rho: Partition, d: int) -> Tuple[int, ...]:
    mult = [0] * d
    for part in rho.parts:
        mult[part - 1] += 1
    return tuple(mult)


@lru_cache(maxsize=None)
def _mn_character(beta: Tuple[int, ...], rho: Tuple[int, ...]) -> int:
    # Murnaghan-Nakayama on beta-sets: removing a rim hook of length r moves
    # one bead r places down; the sign counts the beads jumped over.
    if not rho:
        return 1
    r, rest = rho[0], rho[1:]
    beads = set(beta)
    total = 0
    for b in beta:
        target = b - r
        if target < 0 or target in beads:
            continue
        jumped = sum(1 for c in beta if target < c < b)
        new_beta = tuple(sorted((beads - {b}) | {target}, reverse=True))
        total += (-1) ** jumped * _mn_character(new_beta, rest)
    return total


def character(pi: Partition, rho: Partition) -> int:
    """Irreducible symmetric-group character ``chi^pi`` at cycle type ``rho``."""
    if pi.size != rho.size:
        raise SymfuncError("partition sizes differ")
    n = len(pi.parts)
    beta = tuple(p + n - 1 - i for i, p in enumerate(pi.parts))
    return _mn_character(beta, rho.parts)


@dataclass(frozen=True)
class NewtonExpansion:
    """Coefficients of ``S_pi`` on the basis ``p^(i) = p_1^{i_1} ... p_d^{i_d}``."""

    degree: int
    coefficients: Dict[Tuple[int, ...], Fraction]

    def to_polynomial(self, arity: int) -> SymPoly:
        """Substitute actual power sums in ``arity`` variables."""
        p = [power_sum(r, arity) for r in range(1, self.degree + 1)]
        out = SymPoly(arity)
        for mult, c in self.coefficients.items():
            term = SymPoly.constant(arity, c)
            for r, k in enumerate(mult):
                if k:
                    term = term * p[r] ** k
            out = out + term
        return out

    def evaluate(self, power_sums: Sequence) -> Fraction:
        """Evaluate given numeric ``p_1, ..., p_d``."""
        total = Fraction(0)
        for mult, c in self.coefficients.items():
            term = c
            for r, k in enumerate(mult):
                if k:
                    term *= Fraction(power_sums[r]) ** k
            total += term
        return total


def newton_expansion(pi: Partition) -> NewtonExpansion:
    """Expand ``S_pi`` on generalised Newton functions.

    The coefficient of ``p^(i)`` is ``omega_pi(i) / z(i)`` where
    ``omega_pi(i)`` is the coefficient of ``x^(pi + delta)`` in
    ``Vandermonde(x) * p^(i)``, i.e. the symmetric-group character.
    """
    d = pi.size
    coeffs = {}
    for rho in partitions(d):
        chi = character(pi, rho)
        if chi:
            mult = multiplicities(rho, d)
            coeffs[mult] = Fraction(chi, z_factor(mult))
    return NewtonExpansion(d, coeffs)


def s_g(g: int) -> SymPoly:
    """``S_g`` written in the odd power sums ``p_1, p_3, ..., p_{2g-1}``.

    Variable ``j`` (0-based) stands for ``p_{2j+1}``.  Raises if the Newton
    expansion of the staircase carries an even-index power sum, which would
    mean the expansion itself is wrong.
    """
    if g < 1:
        raise SymfuncError("g must be >= 1")
    expansion = newton_expansion(Partition.staircase(g))
    terms = {}
    for mult, c in expansion.coefficients.items():
        if any(mult[r] for r in range(1, len(mult), 2)):
            raise SymfuncError(
                f"staircase expansion has an even power sum term {mult} -> {c}"
            )
        exp = [0] * g
        for r in range(0, len(mult), 2):
            if mult[r]:
                j = r // 2
                if j >= g:
                    raise SymfuncError(f"power sum p_{r + 1} outside p_1..p_{2 * g - 1}")
                exp[j] = mult[r]
        terms[tuple(exp)] = c
    return SymPoly(g, terms)


def sigma_g(g: int) -> SymPoly:
    """``sigma_g(z_1..z_g) = s_g(z_g, 3 z_{g-1}, ..., (2g-1) z_1)``."""
    sg = s_g(g)
    subs = [SymPoly.variable(g, g - 1 - j) * (2 * j + 1) for j in range(g)]
    return sg.substitute(subs)


def sigma_weights(g: int) -> List[int]:
    """Weight ``2(g-k)+1`` of ``z_k``, k = 1..g."""
    return [2 * (g - k) + 1 for k in range(1, g + 1)]


def hankel_leading(g: int) -> SymPoly:
    """Hankel determinant ``det(z_{i+j-1})`` of size ``ceil(g/2)`` or ``g/2``."""
    if g < 1:
        raise SymfuncError("g must be >= 1")
    size = (g + 1) // 2 if g % 2 else g // 2
    z = [SymPoly.variable(g, k) for k in range(g)]
    matrix = [[z[i + j] for j in range(size)] for i in range(size)]
    return _det(matrix)


def compare_least_degree_to_hankel(g: int) -> int:
    """Return +1 or -1 according to which sign makes the match exact.

    Raises :class:`SymfuncError` if neither sign matches.
    """
    low = sigma_g(g).least_degree_part()
    hank = hankel_leading(g)
    if low == hank:
        return 1
    if low == -hank:
        return -1
    raise SymfuncError(f"least degree part of sigma_{g} is not +-Hankel")


def sigma_leading_scalar(g: int) -> Fraction:
    """``sigma_g(g/(2g-1), ..., g/3, g)``, which equals ``s_g(g, ..., g)``."""
    sig = sigma_g(g)
    args = [Fraction(g, 2 * (g - k) + 1) for k in range(1, g + 1)]
    via_sigma = sig(args)
    via_s = s_g(g)([Fraction(g)] * g)
    if via_sigma != via_s:
        raise SymfuncError("sigma_g and s_g disagree at the leading point")
    return Fraction(via_sigma)


def binomial_wronskian_matrix(g: int) -> List[List[int]]:
    return [[math.comb(2 * g - 2 * k, g - l) for l in range(1, g)] for k in range(1, g)]


def binomial_wronskian_det(g: int) -> int:
    """``det(C(2g-2k, g-l))_{1<=k,l<=g-1}``; its modulus is ``2^{g(g-1)/2}``."""
    if g < 2:
        raise SymfuncError("g must be >= 2")
    return exact_int_det(binomial_wronskian_matrix(g))


def sigma_tables(g: int) -> Dict[str, object]:
    """The JSON payload emitted by the ``sigma-poly`` subcommand."""
    sign = compare_least_degree_to_hankel(g)
    return {
        "genus": g,
        "sigma_g": sigma_g(g).to_json(),
        "s_g": s_g(g).to_json(),
        "s_g_variables": [f"p{2 * j + 1}" for j in range(g)],
        "hankel": hankel_leading(g).to_json(),
        "hankel_sign": sign,
        "leading_scalar": str(sigma_leading_scalar(g)),
    }
