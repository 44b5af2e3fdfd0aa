import json
import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from qcells import deploy
from qcells.deploy import DeploymentError


def test_square_closed_window():
    d = deploy.generate("square", 1.0, (0, 0, 10, 10), guard=0)
    assert len(d) == 121
    assert np.array_equal(d.points, np.round(d.points))
    assert len(d.inner_indices) == 100  # half-open measurement window


@pytest.mark.parametrize("kind", ["square", "triangular"])
@pytest.mark.parametrize("density", [1.0, 2.5])
def test_lattice_spacing_and_density(kind, density):
    d = deploy.generate(kind, density, (0, 0, 20, 20), guard=2)
    dist, _ = cKDTree(d.points).query(d.points, k=2)
    a = 1 / math.sqrt(density) if kind == "square" else math.sqrt(2 / (math.sqrt(3) * density))
    assert np.allclose(dist[:, 1], a, atol=1e-12)
    assert len(d.inner_indices) / d.window_area == pytest.approx(density, rel=0.05)


def test_ppp_counts():
    counts = [len(deploy.generate("ppp", 1.0, (0, 0, 100, 100), guard=0, seed=s)) for s in range(100)]
    assert all(abs(c - 1e4) < 3 * 100 for c in counts)
    assert abs(np.mean(counts) - 1e4) < 3 * 100 / 10


def test_perturbed_variance():
    base = deploy.generate("square", 1.0, (0, 0, 100, 100), guard=0)
    pert = deploy.generate("perturbed", 1.0, (0, 0, 100, 100), guard=0, seed=3, variance=1 / 16)
    off = pert.points - base.points
    assert abs(off.var(axis=0) - 0.0625).max() < 0.002


def test_determinism():
    a = deploy.generate("ppp", 2.0, (0, 0, 10, 10), guard=1, seed=42)
    b = deploy.generate("ppp", 2.0, (0, 0, 10, 10), guard=1, seed=42)
    c = deploy.generate("ppp", 2.0, (0, 0, 10, 10), guard=1, seed=43)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points[:5], c.points[:5])


def test_points_inside_expanded_window():
    d = deploy.generate("ppp", 1.0, (0, 0, 10, 10), guard=3, seed=1)
    x0, y0, x1, y1 = d.expanded_window
    assert ((d.points >= (x0, y0)) & (d.points <= (x1, y1))).all()


@pytest.mark.parametrize("kw", [dict(density=0), dict(window=(0, 0, 0, 5)), dict(guard=-1),
                                dict(density=1e-3, window=(0, 0, 1, 1), guard=0)])
def test_generate_errors(kw):
    args = dict(kind="ppp", density=1.0, window=(0, 0, 10, 10), guard=0)
    args.update(kw)
    with pytest.raises(DeploymentError):
        deploy.generate(**args)


def test_default_guard():
    assert deploy.default_guard(4.0) == pytest.approx(2.0)
    assert deploy.default_guard(1.0, rho=1.25) == pytest.approx(8.0)
    assert deploy.default_guard(1.0, rho=3.0) == pytest.approx(2.0)


def test_save_load_round_trip(tmp_path):
    gen = np.random.default_rng(0)
    d = deploy.explicit(gen.random((25, 2)) * 7)
    p = tmp_path / "dep.json"
    deploy.save(d, p)
    e = deploy.load(p)
    assert np.array_equal(d.points, e.points)
    assert d.window == e.window and d.kind == e.kind
    deploy.save(e, tmp_path / "again.json")
    assert p.read_bytes() == (tmp_path / "again.json").read_bytes()


def test_load_diagnostics(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": "explicit", "points": [[0, 0]], "window": [0, 0, 1, 1]}')
    with pytest.raises(DeploymentError, match="at least 2"):
        deploy.load(p)
    p.write_text('{"kind": "explicit",\n "points": [[0, 0], [1, "a"]], "window": [0, 0, 1, 1]}')
    with pytest.raises(DeploymentError, match=r"points\[1\]"):
        deploy.load(p)
    p.write_text('{"kind": "explicit",\n "points": [[0, 0] [1, 1]]}')
    with pytest.raises(DeploymentError, match="line 2"):
        deploy.load(p)
    p.write_text(json.dumps({"kind": "explicit", "points": [[0, 0], [1, 1]]}))
    with pytest.raises(DeploymentError, match="window"):
        deploy.load(p)


def test_twenty_five_points_give_twenty_five_cells():
    from qcells.cells import qcell
    gen = np.random.default_rng(5)
    d = deploy.explicit(gen.random((25, 2)) * 10)
    cells = [qcell(i, d, 1.5) for i in range(25)]
    assert all(c.area() > 0 for c in cells)


def test_points_read_only():
    d = deploy.explicit([(0, 0), (1, 1)])
    with pytest.raises(ValueError):
        d.points[0, 0] = 5
