import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import example, given
from hypothesis import strategies as st

from hyperdelta.curve import build_curve
from hyperdelta.periods import period_matrix
from hyperdelta.theta import (
    BACKEND,
    CharTable,
    FaltingsNorm,
    ThetaChar,
    ThetaConfig,
    ThetaError,
    disc_identity_residual,
    genus_constants,
    log_abs_gamma,
    log_norm_theta_w,
    log_norm_theta_w_precise,
    log_petersson_phi,
    riemann_characteristic,
    scan_riemann_characteristic,
    theta,
    thomae_residual,
)

TAU2 = np.array([[0.31 + 1.12j, -0.27 + 0.41j], [-0.27 + 0.41j, 0.55 + 0.93j]])


def brute_theta(z, tau, char, N=9):
    g = tau.shape[0]
    tot = 0j
    for n in itertools.product(range(-N, N + 1), repeat=g):
        v = np.array(n) + char.eta1
        tot += np.exp(1j * np.pi * v @ tau @ v + 2j * np.pi * v @ (z + char.eta2))
    return tot


def test_genus_one_value_at_i():
    oracle = mpmath.nsum(lambda n: mpmath.exp(-mpmath.pi * n * n), [-mpmath.inf, mpmath.inf])
    val = theta(np.array([0j]), np.array([[1j]]))
    assert abs(val - complex(oracle)) < 1e-14
    assert abs(val - 1.08643481121331) < 1e-13


@pytest.mark.parametrize("backend", ["python", BACKEND])
@pytest.mark.parametrize("chars", ["00;00", "11;01", "10;11"])
def test_matches_brute_force_sum(backend, chars):
    ch = ThetaChar.parse(chars)
    rng = np.random.default_rng(1)
    for _ in range(4):
        z = rng.normal(size=2) + 0.5j * rng.normal(size=2)
        assert abs(theta(z, TAU2, ch, backend=backend) - brute_theta(z, TAU2, ch)) < 1e-12


def test_odd_characteristic_vanishes_at_zero():
    for ch in CharTable(2).all_chars():
        val = theta(np.zeros(2), TAU2, ch)
        if ch.parity == -1:
            assert abs(val) < 1e-14
        else:
            assert abs(val) > 1e-3


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_quasi_periodicity(zs):
    z = np.array([complex(zs[0], zs[1]), complex(zs[2], zs[3])])
    lhs = theta(z + TAU2[:, 0], TAU2)
    rhs = np.exp(-1j * np.pi * TAU2[0, 0] - 2j * np.pi * z[0]) * theta(z, TAU2)
    assert abs(lhs - rhs) < 1e-11 * max(1.0, abs(rhs))


def test_backends_agree_on_many_points():
    rng = np.random.default_rng(2)
    z = rng.normal(size=(50, 2)) + 1j * rng.normal(size=(50, 2))
    a = theta(z, TAU2, backend="python")
    b = theta(z, TAU2, backend=BACKEND)
    assert np.allclose(a, b, rtol=1e-13, atol=0)


def test_tolerance_controls_truncation():
    z = np.array([0.3 + 0.2j, -0.1 + 0.4j])
    coarse = theta(z, TAU2, config=ThetaConfig(tol=1e-6))
    fine = theta(z, TAU2, config=ThetaConfig(tol=1e-15))
    scale = math.exp(math.pi * np.linalg.solve(TAU2.imag, z.imag) @ z.imag)
    assert abs(coarse - fine) < 1e-6 * scale


def test_config_validation():
    with pytest.raises(ThetaError):
        ThetaConfig(tol=0)
    with pytest.raises(ThetaError):
        ThetaConfig(precision_bits=32)
    with pytest.raises(ThetaError, match="positive definite"):
        theta(np.zeros(2), np.array([[1j, 0], [0, -1j]]))
    with pytest.raises(ThetaError, match="symmetric"):
        theta(np.zeros(2), np.array([[1j, 0.5], [0, 1j]]))


@pytest.mark.parametrize("g", [2, 3, 4])
def test_char_table(g):
    t = CharTable(g)
    c = genus_constants(g)
    assert len(t.T_sets()) == c["r"]
    assert all(ch.parity == 1 for ch in t.even_from_T())
    assert len(set(t.even_from_T())) == c["r"]
    assert t.U == frozenset(range(1, 2 * g + 2, 2))
    assert t.eta_S([]) == ThetaChar.zero(g)


def test_genus_three_constants():
    assert genus_constants(3) == {"r": 35, "n": 15, "m": 56, "w": 3}


@given(st.sets(st.integers(1, 7)), st.sets(st.integers(1, 7)))
def test_eta_of_symmetric_difference(S1, S2):
    t = CharTable(3)
    assert t.eta_S(S1 ^ S2) == t.eta_S(S1) + t.eta_S(S2)


@pytest.mark.parametrize("name", ["quintic", "quintic_x", "septic"])
def test_riemann_characteristic_scan(name, request):
    s = request.getfixturevalue(name)
    found = scan_riemann_characteristic(s.periods, [s.wz[L] for L in s.labels])
    assert found == [riemann_characteristic(s.periods)]


@pytest.mark.parametrize("name", ["quintic", "quintic_x", "septic"])
def test_thomae_and_discriminant(name, request):
    per = request.getfixturevalue(name).periods
    assert thomae_residual(per) < 1e-10
    assert disc_identity_residual(per) < 1e-10
    a, b = log_abs_gamma(per)
    assert abs(a - b) < 1e-10


def test_petersson_norm_under_even_shift():
    B = np.array([[2, 2], [2, 4]])
    assert abs(log_petersson_phi(TAU2 + B) - log_petersson_phi(TAU2)) < 1e-9


@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4), st.lists(st.integers(-2, 2), min_size=4,
                                                                    max_size=4))
@example(zs=[0.0, 0.0, 0.0, 0.0], m=[0, 0, 0, 1])
def test_norm_is_lattice_invariant_and_even(quintic, zs, m):
    per = quintic.periods
    norm = FaltingsNorm(per)
    z = np.array([complex(zs[0], zs[1]), complex(zs[2], zs[3])])
    lat = per.mu @ np.array(m[:2]) + per.mu_prime @ np.array(m[2:])
    a, b, c = np.exp(norm.log(np.array([z, z + lat, -z])))
    # compared as values: on the divisor (z = 0 here) the logs are roundoff
    tol = 1e-9 * max(a, b, c) + 1e-13
    assert abs(a - b) < tol and abs(a - c) < tol


def test_precise_norm_near_the_divisor(quintic):
    per = quintic.periods
    delta = riemann_characteristic(per)
    w0 = quintic.wz[0] @ per.mu_inv.T
    w = np.array([w0 + 1e-3, w0 + 1e-9])
    ref = log_norm_theta_w(w[:1], per.tau, delta)[0]
    prec = log_norm_theta_w_precise(w, per.tau, delta, threshold=1e-6)
    assert abs(prec[0] - ref) < 1e-9
    # first-order zero: the norm scales linearly with the offset
    assert abs((prec[0] - prec[1]) - math.log(1e6)) < 1e-3


def test_double_roots_rejected_upstream():
    with pytest.raises(Exception):
        period_matrix(build_curve(roots=[0, 0, 1, 2, 3]))
