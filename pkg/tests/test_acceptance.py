"""Acceptance criteria 1 to 10, each at its stated tolerance.

Every test records one line through the ``criterion`` fixture; the lines are
printed in the terminal summary as ``criterion N: PASS/FAIL detail``.
"""
import json
import time
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from hyperdelta.cli import run
from hyperdelta.curve import INFINITY, build_curve, discriminant, translate
from hyperdelta.invariants import (
    Surface,
    compute_invariants,
    delta_faltings,
    leading_A,
    leading_B,
    log_A_closed,
    log_B_closed,
    log_green,
    log_S,
    random_points,
    rel_residual,
)
from hyperdelta.periods import period_matrix
from hyperdelta.quadrature import QuadConfig
from hyperdelta.symfunc import (
    Partition,
    SymPoly,
    binomial_wronskian_det,
    compare_least_degree_to_hankel,
    s_g,
    schur_at_ones,
    sigma_g,
    sigma_weights,
)
from hyperdelta.theta import disc_identity_residual, thomae_residual
from tests.conftest import X5M1, X5MX, X7MX

QUAD = QuadConfig(tol=1e-3)


def perturbations(coeffs, count, seed, size=0.1, min_sep=0.05):
    """Random separable perturbations of the lower coefficients."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        c = np.array(coeffs, dtype=complex)
        c[1:] += size * (rng.standard_normal(len(c) - 1) + 1j * rng.standard_normal(len(c) - 1))
        roots = np.roots(c)
        sep = min(abs(a - b) for a, b in combinations(roots, 2))
        if sep > min_sep:
            out.append([complex(v) for v in c])
    return out


G2_GENERIC = perturbations(X5M1, 1, seed=11, size=0.3)[0]
G3_GENERIC = perturbations(X7MX, 1, seed=12, size=0.2)[0]
G2_CURVES = {"x5-1": X5M1, "x5-x": X5MX, "g2-generic": G2_GENERIC}


# 1 ---------------------------------------------------------------------------------------

# the printed table, written as {exponents of z1..zg: coefficient}
PRINTED_SIGMA = {
    1: {(1,): 1},
    2: {(1, 0): -1, (0, 3): Fraction(1, 3)},
    3: {(1, 0, 1): 1, (0, 2, 0): -1, (0, 1, 3): Fraction(-1, 3), (0, 0, 6): Fraction(1, 45)},
    4: {(1, 0, 1, 0): 1, (0, 2, 0, 0): -1, (0, 0, 2, 1): -1, (0, 1, 1, 2): 1,
        (1, 0, 0, 3): Fraction(-1, 3), (0, 1, 0, 5): Fraction(1, 15),
        (0, 0, 1, 7): Fraction(-1, 105), (0, 0, 0, 10): Fraction(1, 4725)},
}


def _sigma_from_cli(g, capsys):
    assert run(["sigma-poly", "--genus", str(g)]) == 0
    data = json.loads(capsys.readouterr().out)
    return {tuple(int(e) for e in k.split(",")): Fraction(v) for k, v in data["sigma_g"].items()}


@pytest.mark.xfail(strict=True, reason="the printed g = 4 entry -z3^2 z4 is not weighted "
                                       "homogeneous; the computed term is -z3^3 z4")
def test_criterion_1_sigma_tables(capsys, criterion):
    start = time.perf_counter()
    bad = [g for g in range(1, 5)
           if _sigma_from_cli(g, capsys) != {k: Fraction(v) for k, v in PRINTED_SIGMA[g].items()}]
    elapsed = time.perf_counter() - start
    detail = f"mismatch at g={bad}" if bad else "g=1..4 equal"
    if 4 in bad:
        sig4 = sigma_g(4)
        detail += (f" (printed -z3^2 z4 has weight {SymPoly(4, {(0, 0, 2, 1): 1}).weighted_degrees(sigma_weights(4))}"
                   f", computed -z3^3 z4 has {sig4.weighted_degrees(sigma_weights(4))})")
    criterion(1, not bad and elapsed < 1.0, f"{detail}, {elapsed:.2f}s")
    assert not bad and elapsed < 1.0


# 2 ---------------------------------------------------------------------------------------


def test_criterion_2_combinatorics(criterion):
    start = time.perf_counter()
    fails = []
    for g in range(1, 7):
        w = g * (g - 1) // 2
        if schur_at_ones(Partition.staircase(g)) != 2 ** w:
            fails.append(f"S_{g}(1..1)")
        if g >= 2 and abs(binomial_wronskian_det(g)) != 2 ** w:
            fails.append(f"wronskian det g={g}")
        try:
            compare_least_degree_to_hankel(g)
            s_g(g)
        except ValueError as exc:
            fails.append(str(exc))
        if sigma_g(g).weighted_degrees(sigma_weights(g)) != {g * (g + 1) // 2}:
            fails.append(f"weight g={g}")
    elapsed = time.perf_counter() - start
    ok = not fails and elapsed < 30
    criterion(2, ok, f"g<=6 {'all identities hold' if not fails else fails}, {elapsed:.1f}s")
    assert ok


# 3, 4 ------------------------------------------------------------------------------------


def _identity_curves():
    out = []
    for name, base, seed in (("x5-1", X5M1, 1), ("x5-x", X5MX, 2), ("x7-x", X7MX, 3)):
        out.append((name, base))
        out += [(f"{name}~{i}", c) for i, c in enumerate(perturbations(base, 5, seed))]
    return out


@pytest.fixture(scope="module")
def identity_periods():
    start = time.perf_counter()
    per = {name: period_matrix(build_curve(coefficients=c)) for name, c in _identity_curves()}
    return per, time.perf_counter() - start


def test_criterion_3_thomae(identity_periods, criterion):
    per, t_per = identity_periods
    start = time.perf_counter()
    res = {name: thomae_residual(p) for name, p in per.items()}
    elapsed = t_per + time.perf_counter() - start
    worst = max(res, key=res.get)
    ok = res[worst] < 1e-6 and elapsed < 120
    criterion(3, ok, f"{len(res)} curves, max residual {res[worst]:.1e} ({worst}), {elapsed:.0f}s")
    assert ok


def test_criterion_4_discriminant(identity_periods, criterion):
    per, _ = identity_periods
    res = {name: disc_identity_residual(p) for name, p in per.items()}
    worst = max(res, key=res.get)
    # root-product oracle for x^5 - x
    roots = np.roots(X5MX)
    brute = np.prod([(a - b) ** 2 for a, b in combinations(roots, 2)])
    d = discriminant(build_curve(coefficients=X5MX))
    oracle = abs(brute + 256) < 1e-9 and abs(d + 256) < 1e-9
    ok = res[worst] < 1e-6 and oracle
    criterion(4, ok, f"max residual {res[worst]:.1e} ({worst}), D(x5-x)={d.real:.6g}")
    assert ok


# 5 ---------------------------------------------------------------------------------------


@pytest.mark.parametrize("name,coeffs", [
    ("x5-1", X5M1), ("x5-x", X5MX), ("g2-generic", G2_GENERIC),
    ("x7-x", X7MX), ("g3-generic", G3_GENERIC)])
def test_criterion_5_leading_coefficients(name, coeffs, criterion):
    start = time.perf_counter()
    s = Surface(build_curve(coefficients=coeffs))
    A, B = leading_A(s, INFINITY), leading_B(s)
    ra, rb = rel_residual(A.log - log_A_closed(s)), rel_residual(B.log - log_B_closed(s))
    order = min(A.order, B.order)
    elapsed = time.perf_counter() - start
    ok = ra < 1e-4 and rb < 1e-4 and order >= 1
    criterion(5, ok, f"{name} A {ra:.1e} B {rb:.1e} order {order:.2f} ({elapsed:.0f}s)")
    assert ok


# full reports on genus 2 curves (6, 7, 8, 9) ---------------------------------------------


@pytest.fixture(scope="module")
def g2_reports():
    return {name: compute_invariants(build_curve(coefficients=c), quad_cfg=QUAD, seed=0)
            for name, c in G2_CURVES.items()}


def _res(report, name):
    return next(r for r in report.residuals if r.name == name)


def test_criterion_6_green(g2_reports, criterion):
    worst_sym, worst_norm = 0.0, 0.0
    for name, rep in g2_reports.items():
        s = Surface(build_curve(coefficients=G2_CURVES[name]))
        ls = rep.values["S"]["log"]
        pts = random_points(s, 8, seed=21)
        sym = max(abs(log_green(s, ls, P, Q) - log_green(s, ls, Q, P))
                  for P, Q in zip(pts[::2], pts[1::2]))
        worst_sym = max(worst_sym, sym, _res(rep, "green_symmetry").value)
        worst_norm = max(worst_norm, _res(rep, "green_normalization").value)
    ok = worst_sym < 1e-2 and worst_norm < 1e-2
    criterion(6, ok, f"quad tol 1e-3, symmetry {worst_sym:.1e}, normalization {worst_norm:.1e}")
    assert ok


def _delta_at(coeffs, ordering=None, shift=0.0):
    curve = build_curve(coefficients=coeffs, ordering=ordering)
    if shift:
        curve = translate(curve, shift)
    s = Surface(curve)
    return delta_faltings(log_S(s, None, QUAD)[0], s.log_delta_norm, s.g)


@pytest.mark.parametrize("name", ["x5-1", "x5-x"])
def test_criterion_7_invariance(name, g2_reports, criterion):
    rep = g2_reports[name]
    t_spread = _res(rep, "T_P_spread").value
    s_spread = _res(rep, "S_Q_spread").value
    coeffs = G2_CURVES[name]
    ds = [_delta_at(coeffs), _delta_at(coeffs, ordering=[2, 0, 4, 1, 3]),
          _delta_at(coeffs, shift=0.25 - 0.4j)]
    d_spread = max(ds) - min(ds)
    ok = t_spread < 1e-3 and s_spread < 2e-3 and d_spread < 1e-2
    criterion(7, ok, f"{name} T {t_spread:.1e} S {s_spread:.1e} delta {d_spread:.1e}")
    assert ok


def test_criterion_8_theorems(g2_reports, criterion):
    worst = {}
    for rep in g2_reports.values():
        for r in rep.residuals:
            key = "thm_main" if r.name.startswith("thm_main[") else r.name
            if key in ("thm_main", "thm_main_W_spread", "thm_second", "delta_routes"):
                worst[key] = max(worst.get(key, 0.0), r.value)
    ok = len(worst) == 4 and all(v < 1e-2 for v in worst.values())
    criterion(8, ok, f"{len(g2_reports)} curves, " + ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items())))
    assert ok


def test_criterion_9_g2_remark(g2_reports, criterion):
    r = _res(g2_reports["x5-1"], "g2_remark")
    ok = r.value < 1e-2
    criterion(9, ok, f"x5-1 worst residual {r.value:.1e}")
    assert ok


# 10 --------------------------------------------------------------------------------------


def test_criterion_10_reproducible(tmp_path, criterion):
    curve = tmp_path / "curve.json"
    curve.write_text(json.dumps({"coefficients": X5M1}))
    outs = []
    for i in range(2):
        out = tmp_path / f"report{i}.json"
        code = run(["invariants", "--curve", str(curve), "--seed", "3",
                    "--cache-dir", str(tmp_path / f"cache{i}"), "--output", str(out)])
        outs.append((code, out.read_bytes()))
    same = outs[0][1] == outs[1][1]
    ok = same and outs[0][0] == 0
    criterion(10, ok, f"two full runs, seed 3, {'byte-identical' if same else 'different'} "
                      f"({len(outs[0][1])} bytes)")
    assert ok
