import math
import os

import numpy as np
import pytest
from scipy import integrate, stats

from qcells import deploy, oracle
from qcells.cells import qcell, refined_qcell
from qcells.geom import HalfPlane, apollonius, convex_region
from qcells.mathfn import RAYLEIGH, FadingModel, fading_cdf
from qcells.oracle import AmbiguousServer, OracleError, OracleOptions
from qcells.qos import QosSpec, stringency

SPEC = QosSpec(1.0, 0.8, 4.0)


def test_single_interferer_at_rho_gives_u():
    rho = stringency(SPEC).rho
    # location at distance 1 from the owner and rho from the interferer
    dep = deploy.explicit([(0, 0), (1 + rho, 0)])
    assert oracle.reliability((1.0, 0.0), dep, SPEC) == pytest.approx(0.8, abs=1e-12)


def test_exact_product_and_mc():
    dep = deploy.explicit([(0, 1), (0, 3), (3, 1)])
    y = (0.0, 0.0)
    r = np.hypot(*(dep.points - y).T)
    want = np.prod(1 / (1 + (r[0] / r[1:]) ** 4))
    assert oracle.reliability(y, dep, SPEC) == pytest.approx(want, rel=1e-14)
    mc = oracle.reliability(y, dep, SPEC, OracleOptions(samples=1_000_000, estimator="monte_carlo"))
    assert abs(mc - want) < 3 * math.sqrt(want * (1 - want) / 1e6)


def test_two_ratio_example():
    dep = deploy.explicit([(0, 1), (0, 3), (0, -2)])
    y = (0.0, 0.0)
    want = (1 / (1 + 1 / 81)) * (1 / (1 + 1 / 16))
    assert want == pytest.approx(0.9299, abs=3e-4)
    assert oracle.reliability(y, dep, SPEC) == pytest.approx(want, rel=1e-13)


def test_mc_matches_exact_at_random_geometries():
    gen = np.random.default_rng(9)
    for k in range(20):
        pts = gen.random((6, 2)) * 4
        dep = deploy.explicit(pts)
        y = gen.random(2) * 4
        ex = oracle.reliability(y, dep, SPEC, on_tie="lower")
        mc = oracle.reliability(y, dep, SPEC, OracleOptions(samples=1_000_000, seed=k, estimator="monte_carlo"),
                                on_tie="lower")
        assert abs(mc - ex) <= 3 * math.sqrt(max(ex * (1 - ex), 1e-12) / 1e6) + 1e-12


def test_nakagami_single_interferer_against_quadrature():
    model = FadingModel(3, 3)
    spec = QosSpec(1.0, 0.8, 4.0, model)
    dep = deploy.explicit([(0, 1), (0, 3)])
    v = 3.0
    # P(h1 v^4 / h2 > 1) = P(H > v^-4) by integration of the gamma densities
    g = stats.gamma(3, scale=1 / 3)
    quad, _ = integrate.quad(lambda h2: g.pdf(h2) * g.sf(h2 * v ** -4), 0, np.inf)
    mc = oracle.reliability((0.0, 0.0), dep, spec, OracleOptions(samples=400_000, seed=1))
    assert abs(mc - quad) < 3e-3
    assert quad == pytest.approx(1 - fading_cdf(model, v ** -4), abs=1e-9)


def test_ambiguous_server():
    dep = deploy.explicit([(0, 0), (2, 0), (5, 5)])
    with pytest.raises(AmbiguousServer):
        oracle.reliability((1.0, 0.0), dep, SPEC)
    assert 0 < oracle.reliability((1.0, 0.0), dep, SPEC, on_tie="lower") < 1


def test_two_nearest():
    rep = stringency(QosSpec(1.0, 0.9, 4.0))
    spec = QosSpec(1.0, 0.9, 4.0)
    s = rep.rho_star
    assert (1 / (1 + s ** -4)) ** 2 == pytest.approx(0.9, abs=1e-12)
    dep = deploy.explicit([(0, 0), (s * math.cos(1.0) + 1, s * math.sin(1.0)), (s * math.cos(-1.0) + 1, s * math.sin(-1.0)),
                           (40, 40)])
    assert oracle.reliability_two_nearest((1.0, 0.0), dep, spec) == pytest.approx(0.9, abs=1e-12)
    far = deploy.explicit([(0, 0), (1e4, 0), (0, 1e4)])
    assert oracle.reliability_two_nearest((0.1, 0.0), far, spec) == pytest.approx(1.0, abs=1e-12)
    three = deploy.explicit([(0, 0), (2, 0.3), (-0.4, 3)])
    assert oracle.reliability_two_nearest((0.2, 0.1), three, spec) == oracle.reliability((0.2, 0.1), three, spec)
    with pytest.raises(OracleError):
        oracle.reliability_two_nearest((0.1, 0.0), deploy.explicit([(0, 0), (1, 1)]), spec)


@pytest.fixture(scope="module")
def wide_ppp():
    return deploy.generate("ppp", 1.0, (0, 0, 10, 10), guard=205, seed=4)


@pytest.mark.parametrize("alpha", [3.0, 4.0])
def test_cutoff_soundness(wide_ppp, alpha):
    Y = np.random.default_rng(0).random((30, 2)) * 10
    spec = QosSpec(1.0, 0.8, alpha)
    a, _ = oracle.reliabilities(Y, wide_ppp, spec, OracleOptions(interferer_cutoff=100.0))
    b, _ = oracle.reliabilities(Y, wide_ppp, spec, OracleOptions(interferer_cutoff=200.0))
    assert np.abs(a - b).max() < 1e-4


def test_alpha_warning():
    dep = deploy.explicit([(0, 0), (3, 0)])
    with pytest.warns(UserWarning):
        oracle.reliability((0.5, 0.0), dep, QosSpec(1.0, 0.8, 2.2), OracleOptions(interferer_cutoff=5.0))


def test_coverage_boundary_two_transmitters():
    dep = deploy.explicit([(0, 0), (1, 0)])
    rho = stringency(SPEC).rho
    cb = oracle.coverage_boundary(0, dep, SPEC, rays=180, tol=1e-9)
    disk = apollonius((0, 0), (1, 0), rho)
    d = np.hypot(*(cb.points - disk.center).T)
    assert np.abs(d - disk.radius).max() < 1e-6
    assert not cb.unresolved.any()


def test_boundary_stats_single_interferer():
    dep = deploy.explicit([(0, 0), (1, 0)])
    c = qcell(0, dep, stringency(SPEC).rho)
    st = oracle.boundary_stats(c, dep, SPEC)
    assert st.mean == pytest.approx(0.8, abs=1e-12)
    assert st.min <= st.mean <= st.max and st.variance >= 0
    assert st.sample_count >= 1000


def test_open_chain_rejected():
    with pytest.raises(OracleError):
        oracle.boundary_samples(np.zeros((2, 2)))


def test_grid_two_transmitters_level_set():
    dep = deploy.explicit([(0, 0), (1, 0)], window=(-2, -2, 2, 2))
    res = 200
    fld = oracle.reliability_grid(dep, SPEC, res)
    assert fld.grid.shape == (res, res)
    assert ((fld.grid >= 0) & (fld.grid <= 1)).all()
    gx, gy = np.meshgrid(fld.xs, fld.ys)
    Y = np.column_stack([gx.ravel(), gy.ravel()])
    rho = stringency(SPEC).rho
    in0 = apollonius((0, 0), (1, 0), rho).contains(Y)
    in1 = apollonius((1, 0), (0, 0), rho).contains(Y)
    covered = fld.grid.ravel() > 0.8
    wrong = Y[covered != (in0 | in1)]
    h = 4 / res
    for p in wrong:
        # mismatches only within one grid cell of a circle
        dists = [abs(np.hypot(*(p - d.center)) - d.radius)
                 for d in (apollonius((0, 0), (1, 0), rho), apollonius((1, 0), (0, 0), rho))]
        assert min(dists) < h
    frac = oracle.covered_area_fraction(fld, 0.8)
    area = 0.0
    for x, xp in (((0, 0), (1, 0)), ((1, 0), (0, 0))):
        d = apollonius(x, xp, rho)
        box = [HalfPlane((-2.0, 0.0), 0.0), HalfPlane((2.0, 0.0), math.pi),
               HalfPlane((0.0, -2.0), math.pi / 2), HalfPlane((0.0, 2.0), 3 * math.pi / 2)]
        area += convex_region([d] + box, x).area()
    assert frac == pytest.approx(area / 16, abs=0.01)


def test_grid_lattice_symmetry():
    dep = deploy.generate("square", 1.0, (0, 0, 4, 4), guard=4)
    fld = oracle.reliability_grid(dep, SPEC, 64)
    g = fld.grid
    assert np.allclose(g, g.T, atol=1e-12)
    assert np.allclose(g, g[::-1, :], atol=1e-12)


def test_field_identically_one():
    fld = oracle.ReliabilityField(np.ones((8, 8)), 8, (0, 0, 1, 1), "exact", None, 0, None, None)
    assert oracle.covered_area_fraction(fld, 0.8) == 1.0


def test_grid_resolution_error():
    with pytest.raises(OracleError):
        oracle.reliability_grid(deploy.explicit([(0, 0), (1, 0)]), SPEC, 4)


def test_thread_count_determinism(monkeypatch):
    dep = deploy.generate("ppp", 1.0, (0, 0, 6, 6), guard=3, seed=2)
    spec = QosSpec(1.0, 0.8, 4.0, FadingModel(2, 2))
    opts = OracleOptions(samples=500, seed=11)
    out = []
    for n in ("1", "4"):
        monkeypatch.setenv("QCA_THREADS", n)
        out.append(oracle.reliability_grid(dep, spec, 16, opts).grid)
    assert np.array_equal(out[0], out[1])
    assert oracle.field_to_csv(oracle.reliability_grid(dep, spec, 16, opts)).count("\n") == 17


def test_outer_bound_small_ppp():
    dep = deploy.generate("ppp", 1.0, (0, 0, 8, 8), guard=6, seed=5)
    rep = stringency(SPEC)
    fld = oracle.reliability_grid(dep, SPEC, 80)
    gx, gy = np.meshgrid(fld.xs, fld.ys)
    Y = np.column_stack([gx.ravel(), gy.ravel()])
    _, nearest = dep.tree.query(Y)
    v = fld.grid.ravel()
    for o in np.unique(nearest):
        sel = nearest == o
        inside = refined_qcell(int(o), dep, rho=rep.rho, rho_star=rep.rho_star).contains(Y[sel])
        assert np.all(v[sel][~inside] <= 0.8 + 1e-12)
