import json
import math
import re

import numpy as np
import pytest

from qcells import cli, deploy


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bounds_example(capsys):
    code, out, _ = run(capsys, "bounds", "--theta", "1", "--u", "0.8", "--alpha", "4", "--fading", "1,1")
    assert code == 0
    head, row = out.strip().split("\n")
    rec = dict(zip(head.split(","), row.split(",")))
    assert float(rec["sigma"]) == pytest.approx(4.0)
    assert float(rec["rho"]) == pytest.approx(1.41421, abs=1e-5)
    assert rec["regime"] == "stringent"


def test_fading_inf(capsys):
    code, out, _ = run(capsys, "bounds", "--fading", "1,inf", "--u", "0.5")
    assert code == 0 and ",1.0,inf," in out


def test_area_ppp(capsys):
    code, out, _ = run(capsys, "area", "--kind", "ppp", "--rho", "1.4142")
    rec = dict(zip(*[l.split(",") for l in out.strip().split("\n")]))
    assert float(rec["eta_closed"]) == pytest.approx(0.5, abs=1e-4)


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["bounds", "--fading", "1,x"])
    assert e.value.code == 2
    assert "--fading" in capsys.readouterr().err
    with pytest.raises(SystemExit) as e:
        cli.main(["area", "--kind", "ppp", "--rho", "0.5"])
    assert e.value.code == 2 and "--rho" in capsys.readouterr().err
    with pytest.raises(SystemExit) as e:
        cli.main([])
    assert e.value.code == 2


@pytest.fixture
def two(tmp_path):
    p = tmp_path / "two.json"
    deploy.save(deploy.explicit([(0, 0), (2, 0)], window=(-2, -2, 4, 2)), p)
    return p


def test_cells_bisector_svg(capsys, two, tmp_path):
    svg = tmp_path / "c.svg"
    code, out, _ = run(capsys, "cells", str(two), "--rho", "1", "--svg", str(svg), "--no-timestamp")
    assert code == 0
    text = svg.read_text()
    assert text.count("<line") == 1
    assert "viewBox=\"0 0 1000 " in text
    doc = json.loads(out)
    assert len(doc["cells"]) == 2


def test_cells_json_schema_and_arcs(capsys, two, tmp_path):
    svg = tmp_path / "c.svg"
    code, out, _ = run(capsys, "cells", str(two), "--svg", str(svg), "--no-timestamp")
    cell = json.loads(out)["cells"][0]
    assert set(cell) >= {"owner", "kind", "rho", "boundary", "area", "strong", "corners"}
    arc = cell["boundary"][0]["arc"]
    assert set(arc) == {"cx", "cy", "r", "a0", "a1"}
    assert cell["area"] == pytest.approx(math.pi * arc["r"] ** 2)
    assert re.search(r"<circle cx=", svg.read_text())


def test_lax_refined_is_validation_failure(capsys, two):
    code, _, err = run(capsys, "cells", str(two), "--u", "0.1", "--refined")
    assert code == 1 and "stringent" in err


def test_nu_flags_exclusive(two):
    with pytest.raises(SystemExit) as e:
        cli.main(["cells", str(two), "--scaled", "--nu", "0.5", "--g", "0.3"])
    assert e.value.code == 2


def test_gen_and_reproducible_outputs(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert cli.main(["gen", "--kind", "ppp", "--window", "0,0,5,5", "--seed", "9", "-o", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "cells", str(a), "--scaled", "--g", "0.3")
        outs.append(out)
    assert outs[0] == outs[1]


def test_flag_order_independent(capsys):
    _, o1, _ = run(capsys, "bounds", "--theta", "2", "--u", "0.7")
    _, o2, _ = run(capsys, "bounds", "--u", "0.7", "--theta", "2")
    assert o1 == o2


def test_validate(capsys, tmp_path):
    p = tmp_path / "d.json"
    cli.main(["gen", "--kind", "square", "--window", "0,0,4,4", "--guard", "4", "-o", str(p)])
    svg, csvp = tmp_path / "v.svg", tmp_path / "v.csv"
    code, _, err = run(capsys, "validate", str(p), "--resolution", "40", "--svg", str(svg), "--csv", str(csvp),
                       "--no-timestamp", "--layers", "heatmap,qcells,refined,scaled")
    assert code == 0, err
    head, row = csvp.read_text().strip().split("\n")
    rec = dict(zip(head.split(","), row.split(",")))
    assert rec["outer_bound_ok"] == "true" and rec["chain_ok"] == "true"
    assert float(rec["eta_qstar"]) == pytest.approx(0.594033, abs=1e-5)
    assert 'id="heatmap"' in svg.read_text()
