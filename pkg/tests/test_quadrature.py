import numpy as np
import pytest

from hyperdelta.curve import make_point
from hyperdelta.invariants import arakelov_mu_density, log_S
from hyperdelta.quadrature import (
    QuadConfig,
    QuadratureError,
    SurfaceQuadrature,
    disk_cutoff,
    smoothstep,
)


def test_smoothstep_and_cutoff():
    u = np.linspace(-1, 2, 301)
    s = smoothstep(u)
    assert s[0] == 0 and s[-1] == 1 and np.all(np.diff(s) >= 0)
    d = np.array([0.0, 0.49, 0.5, 0.75, 1.0, 1.2])
    c = disk_cutoff(d, 1.0)
    assert c[0] == 1 and c[2] == 1 and c[-2] == 0 and c[-1] == 0 and 0 < c[3] < 1


def test_config_validation():
    with pytest.raises(QuadratureError):
        QuadConfig(method="simpson")
    with pytest.raises(QuadratureError):
        QuadConfig(budget=10)


@pytest.mark.parametrize("name", ["quintic", "quintic_x"])
def test_total_mass_is_one(name, request):
    s = request.getfixturevalue(name)
    m, err = SurfaceQuadrature(s.aj, QuadConfig(tol=1e-6)).mass()
    assert abs(m - 1) < 1e-6


def test_mass_with_extra_disks(quintic):
    P = make_point(quintic.curve, 0.3 + 0.4j)
    m, _ = SurfaceQuadrature(quintic.aj, QuadConfig(tol=1e-5), extra=[P]).mass()
    assert abs(m - 1) < 1e-5


def test_density_positive_and_involution_invariant(quintic):
    P = make_point(quintic.curve, 0.7 - 0.2j)
    d1 = arakelov_mu_density(quintic, P)
    d2 = arakelov_mu_density(quintic, P.conjugate())
    assert d1 > 0 and d1 == d2
    with pytest.raises(Exception):
        arakelov_mu_density(quintic, make_point(quintic.curve, quintic.curve.roots[0]))


def test_partition_of_unity_leaves_a_nonnegative_remainder(quintic):
    q = SurfaceQuadrature(quintic.aj, QuadConfig())
    x = np.random.default_rng(0).uniform(-4, 4, 2000) + 1j * np.random.default_rng(1).uniform(-4, 4, 2000)
    assert np.all(q.cutoffs(x) <= 1 + 1e-15)


def test_montecarlo_is_reproducible(quintic):
    cfg = QuadConfig(method="montecarlo", budget=20000, seed=7)
    a = SurfaceQuadrature(quintic.aj, cfg).mass()
    b = SurfaceQuadrature(quintic.aj, cfg).mass()
    assert a == b
    assert abs(a[0] - 1) < 5 * a[1] + 1e-3


def test_log_singularity_refinement(quintic):
    # tightening the tolerance moves log S by less than the coarse tolerance
    coarse, _ = log_S(quintic, None, QuadConfig(tol=1e-3))
    fine, _ = log_S(quintic, None, QuadConfig(tol=1e-6))
    assert abs(coarse - fine) < 1e-3
