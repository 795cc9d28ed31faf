import dataclasses
import json

import numpy as np
import pytest

from zklab.cli import main
from zklab.errors import ParseError, ValidationError
from zklab.experiments import (
    ExperimentConfig,
    config_from_dict,
    csv_text,
    emit_config,
    fit_order,
    parse_config,
    run_dispersion,
    run_poisson,
    run_zk,
)
from zklab.grid import make_grid, save_field

SMALL = {"dim": 2, "points": [32], "lengths": [20.0]}


def test_defaults_validate():
    cfg = ExperimentConfig()
    assert cfg.eps_list == [0.2, 0.1, 0.05]
    assert cfg.grid().shape == (128, 128)


def test_parse_and_round_trip(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"experiment": "zk", "eps": 0.2, "points": [16, 32], "lengths": [5, 6]}))
    cfg = parse_config(path)
    assert cfg.eps == 0.2 and cfg.lengths == [5.0, 6.0]
    again = tmp_path / "d.json"
    again.write_text(emit_config(cfg))
    assert parse_config(again) == cfg
    assert emit_config(parse_config(again)) == emit_config(cfg)


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("")
    assert parse_config(path) == ExperimentConfig()


@pytest.mark.parametrize(
    "data, key",
    [
        ({"bogus": 1}, "bogus"),
        ({"eps_list": [0.1, 0.2]}, "eps_list"),
        ({"eps_list": [0.1, 0.1]}, "eps_list"),
        ({"eps": 0.0}, "eps"),
        ({"dim": 4}, "dim"),
        ({"alpha": -1.0}, "alpha"),
        ({"samples": 1.5}, "samples"),
        ({"eps": "small"}, "eps"),
        ({"seed": -1}, "seed"),
        ({"initial": "vortex"}, "initial"),
    ],
)
def test_validation_errors_name_the_key(data, key):
    with pytest.raises(ValidationError) as info:
        config_from_dict(data)
    assert info.value.key == key


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError):
        parse_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        parse_config(bad)
    bad.write_text("[1, 2]")
    with pytest.raises(ParseError):
        parse_config(bad)


def test_fit_order_exact():
    x = np.array([0.2, 0.1, 0.05])
    slope, r2 = fit_order(x, 3 * x**1.5)
    assert slope == pytest.approx(1.5, abs=1e-12) and r2 == pytest.approx(1.0)


def test_csv_header_line():
    text = csv_text(("a", "b"), [(1.0, 2)], ExperimentConfig())
    first, header, row = text.splitlines()
    assert first.startswith("# zklab ") and json.loads(first[8:])["config"]["eps"] == 0.1
    assert header == "a,b" and row == "1.0,2"


def test_poisson_study_small():
    cfg = config_from_dict({**SMALL, "experiment": "poisson", "samples": 3})
    res = run_poisson(cfg)
    assert res.passed, res.gates
    assert len(res.rows) == 3


def test_zk_study_small():
    cfg = config_from_dict({**SMALL, "experiment": "zk", "T1": 0.2})
    assert run_zk(cfg).passed


def test_dispersion_study():
    cfg = config_from_dict({"experiment": "dispersion", "k_count": 5})
    res = run_dispersion(cfg)
    assert res.passed and len(res.rows) == 5**3 * len(cfg.a_list)


def run_cli(tmp_path, name, *args):
    out = tmp_path / name
    return main(["--out", str(out), *args]), out


def test_cli_exit_codes(tmp_path, capsys):
    rc, out = run_cli(tmp_path, "disp", "dispersion", "--k-count", "4")
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] is True and summary["command"] == "dispersion"
    assert (out / "dispersion.csv").exists() and (out / "config.json").exists()
    assert "PASS dispersion:" in capsys.readouterr().out

    rc, _ = run_cli(tmp_path, "bad", "dispersion", "--k-max", "-1")
    assert rc == 2

    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps({"unknown_key": 1}))
    assert main(["--config", str(cfgfile), "--out", str(tmp_path / "x"), "dispersion"]) == 2


def test_cli_solver_error_exit_code(tmp_path):
    g = make_grid(2, [32, 32], [20.0, 20.0])
    path = tmp_path / "n.zkf"
    save_field(path, g, np.full(g.shape, -20.0))
    rc, out = run_cli(tmp_path, "p", "poisson", "--points", "32", "--lengths", "20", "--eps", "0.1",
                      "--input", str(path))
    assert rc == 3
    assert json.loads((out / "summary.json").read_text())["passed"] is False


def test_cli_poisson_input_output(tmp_path):
    g = make_grid(2, [32, 32], [20.0, 20.0])
    X, Y = g.coords()
    path = tmp_path / "n.zkf"
    save_field(path, g, 0.3 * np.exp(-(X**2 + Y**2) / 4))
    phi = tmp_path / "phi.zkf"
    rc, _ = run_cli(tmp_path, "p", "poisson", "--points", "32", "--lengths", "20", "--eps", "1",
                    "--input", str(path), "--output", str(phi))
    assert rc == 0 and phi.exists()


def test_cli_grid_mismatch_is_config_error(tmp_path):
    g = make_grid(2, [16, 16], [20.0, 20.0])
    path = tmp_path / "n.zkf"
    save_field(path, g, np.zeros(g.shape))
    rc, _ = run_cli(tmp_path, "m", "zk", "--points", "32", "--lengths", "20", "--input", str(path))
    assert rc == 2


def test_cli_outputs_are_deterministic(tmp_path):
    args = ["zk", "--points", "32", "--lengths", "20", "--T1", "0.1"]
    rc1, o1 = run_cli(tmp_path, "a", *args)
    rc2, o2 = run_cli(tmp_path, "b", *args)
    assert rc1 == rc2 == 0
    t1, t2 = (o / "invariants.csv" for o in (o1, o2))
    # only the output directory in the comment line may differ
    strip = lambda p: p.read_text().replace(str(p.parent), "")  # noqa: E731
    assert strip(t1) == strip(t2)
    assert (o1 / "n1_final.zkf").read_bytes() == (o2 / "n1_final.zkf").read_bytes()


def test_cli_seeded_poisson_is_reproducible(tmp_path):
    args = ["--seed", "7", "poisson", "--points", "32", "--lengths", "20", "--samples", "2"]
    _, o1 = run_cli(tmp_path, "a", *args)
    _, o2 = run_cli(tmp_path, "b", *args)
    strip = lambda p: p.read_text().replace(str(p.parent), "")  # noqa: E731
    assert strip(o1 / "poisson.csv") == strip(o2 / "poisson.csv")


def test_config_is_plain_dataclass():
    cfg = ExperimentConfig()
    assert dataclasses.replace(cfg, eps=0.5).eps == 0.5
