import json
import os

import pytest

from algebroid_engine.cli import main
from algebroid_engine.config import ConfigError, parse_config

CONFIGS = os.path.join(os.path.dirname(__file__), "..", "configs")


def cfg_path(name):
    return os.path.join(CONFIGS, name)


def run(command, config, out, extra=()):
    return main([command, "--config", cfg_path(config), "--out", str(out), *extra])


def test_validate_flat_exit_zero(tmp_path, capsys):
    code = run("validate", "flat_abelian.cfg", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["command"] == "validate"
    assert all(c["status"] == "pass" for c in doc["checks"])
    assert all(c["max_residual"] == 0.0 for c in doc["checks"])


def test_report_schema(tmp_path):
    run("frame", "nontrivial_algebroid.cfg", tmp_path)
    doc = json.loads((tmp_path / "report.json").read_text())
    for check in doc["checks"]:
        assert set(check) == {"check", "status", "max_residual", "worst_point", "anchor"}
        if check["worst_point"] is not None:
            assert set(check["worst_point"]) == {"x", "y"}


def test_identities_quadratic_config(tmp_path):
    code = run("identities", "quadratic_spray.cfg", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    names = [c["check"] for c in doc["checks"]]
    assert any("Ricci" in n for n in names)
    assert any("Bianchi" in n for n in names)
    assert any("fr6" in n for n in names)
    assert any("Cartan" in n for n in names)
    cartan = [c for c in doc["checks"] if "Cartan" in c["check"]][0]
    assert cartan["status"] == "inconclusive"
    numeric = [c for c in doc["checks"] if c["max_residual"] is not None]
    assert all(c["max_residual"] < 1e-7 for c in numeric)


def test_geodesic_csv(tmp_path):
    code = run("geodesic", "flat_abelian.cfg", tmp_path)
    assert code == 0
    lines = (tmp_path / "trajectory.csv").read_text().strip().split("\n")
    assert lines[0] == "t,x1,x2,y1,y2"
    last = [float(v) for v in lines[-1].split(",")]
    # straight line: x(1) = (1, 2) to machine precision
    assert abs(last[1] - 1.0) < 1e-12 and abs(last[2] - 2.0) < 1e-12


def test_exit_code_on_failing_config(tmp_path):
    # a spray condition violation (cubic G) must exit 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("m = 1\nr = 1\nrho[1][1] = 1\nG[1] = y1^3\n")
    code = main(["spray", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert code == 1


def test_exit_code_on_config_error(tmp_path, capsys):
    bad = tmp_path / "broken.cfg"
    bad.write_text("m = 2\nr = 2\nrho[1][1] = x9\n")
    code = main(["validate", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_exit_code_on_missing_file(tmp_path, capsys):
    code = main(["validate", "--config", str(tmp_path / "nope.cfg"),
                 "--out", str(tmp_path)])
    assert code == 2


def test_weyl_requires_factor(tmp_path, capsys):
    code = run("weyl", "flat_abelian.cfg", tmp_path)
    assert code == 2
    assert "projective factor" in capsys.readouterr().err


@pytest.mark.parametrize("command", ["validate", "frame", "curvature", "spray"])
def test_determinism_byte_identical(tmp_path, command):
    run(command, "nontrivial_algebroid.cfg", tmp_path / "a")
    run(command, "nontrivial_algebroid.cfg", tmp_path / "b")
    assert (tmp_path / "a" / "report.json").read_bytes() == \
        (tmp_path / "b" / "report.json").read_bytes()


def test_determinism_weyl_and_identities(tmp_path):
    for command in ("identities", "weyl"):
        run(command, "quadratic_spray.cfg", tmp_path / "a")
        run(command, "quadratic_spray.cfg", tmp_path / "b")
        assert (tmp_path / "a" / "report.json").read_bytes() == \
            (tmp_path / "b" / "report.json").read_bytes()


def test_dt_override_changes_trajectory_length(tmp_path):
    run("geodesic", "flat_abelian.cfg", tmp_path / "a")
    run("geodesic", "flat_abelian.cfg", tmp_path / "b", ("--dt", "0.01"))
    rows_a = (tmp_path / "a" / "trajectory.csv").read_text().count("\n")
    rows_b = (tmp_path / "b" / "trajectory.csv").read_text().count("\n")
    assert rows_a == 1002 and rows_b == 102  # header + N+1 states


def test_seed_override_changes_report(tmp_path):
    run("frame", "nontrivial_algebroid.cfg", tmp_path / "a")
    run("frame", "nontrivial_algebroid.cfg", tmp_path / "b", ("--seed", "7"))
    doc_a = json.loads((tmp_path / "a" / "report.json").read_text())
    doc_b = json.loads((tmp_path / "b" / "report.json").read_text())
    assert doc_a["seed"] == 42 and doc_b["seed"] == 7


def test_config_parser_rejections():
    with pytest.raises(ConfigError):
        parse_config("r = 2\n")                      # m missing
    with pytest.raises(ConfigError):
        parse_config("m = 2\nr = 2\nwhat = 1\n")     # unknown key
    with pytest.raises(ConfigError):
        parse_config("m = 2\nr = 2\nL[1][2][1] = 1\n")   # a < b violated
    with pytest.raises(ConfigError):
        parse_config("m = 2\nr = 2\nrho[1][1] = y1\n")   # fiber in base field
    with pytest.raises(ConfigError):
        parse_config("m = 2\nr = 2\nm = 3\n")        # duplicate
    with pytest.raises(ConfigError):
        parse_config("m = 2\nr = 2\nh.fwd[1] = x1\n")    # inverse missing
    with pytest.raises(ConfigError):
        parse_config("m = 2\nr = 2\ng[1][2] = x1\n")     # gtil missing


def test_config_defaults():
    cfg = parse_config("m = 2\nr = 2\nrho[1][1] = 1\nrho[2][2] = 1\n")
    assert cfg.samples == 100 and cfg.seed == 42
    assert cfg.symbolic_tol == 1e-9 and cfg.fd_tol == 1e-6 and cfg.dt == 1e-3
    assert cfg.box_x == (-1.0, 1.0)
    # identity defaults for g and the diffeomorphisms
    from algebroid_engine.expr import evaluate
    assert evaluate(cfg.g[0][0], (0.5, 0.5), ()) == 1.0
    assert evaluate(cfg.g[0][1], (0.5, 0.5), ()) == 0.0
    assert cfg.h.apply_fwd((0.3, 0.7)) == (0.3, 0.7)
