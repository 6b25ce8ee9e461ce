import csv
import json

import numpy as np
import pytest

from conncontract import io
from conncontract.cli import main
from conncontract.config import DEFAULTS, RunConfig
from conncontract.forksim import PcSample
from conncontract.params import reference_grid
from conncontract.profiles import build_types
from conncontract.contract import solve
from conncontract.validation import ValidationError


def write_cfg(tmp_path, **values):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(values))
    return str(path)


# ---------------------------------------------------------------- config


def test_defaults_build_parameter_objects():
    cfg = RunConfig.from_dict()
    assert cfg.network.z == 100 and cfg.network.p_l == 0.2
    assert (cfg.econ.theta, cfg.econ.epsilon, cfg.econ.gamma) == (1.5, 400.0, 1e-4)
    assert (cfg.fit.beta1, cfg.fit.beta2, cfg.fit.beta3) == (0.97575, -0.03006, 0.00411)
    assert cfg.to_dict() == DEFAULTS


def test_unknown_key_is_rejected():
    with pytest.raises(ValidationError, match="thetta"):
        RunConfig.from_dict({"thetta": 2.0})


def test_wrong_type_names_the_field():
    with pytest.raises(ValidationError, match="z"):
        RunConfig.from_dict({"z": "many"})


@pytest.mark.parametrize(
    "raw, field",
    [
        ({"theta": 1.0}, "theta"),
        ({"p_l": 0.0}, "p_l"),
        ({"z": 1}, "z"),
        ({"eps_min": 300.0, "eps_max": 200.0}, "eps_max"),
        ({"sweep_p_l": [0.2, 1.5]}, "sweep_p_l"),
        ({"trials": 0}, "trials"),
    ],
)
def test_out_of_range_values_name_the_field(raw, field):
    with pytest.raises(ValidationError) as info:
        RunConfig.from_dict(raw)
    assert field in str(info.value)


def test_integers_accepted_for_reals():
    cfg = RunConfig.from_dict({"epsilon": 500, "theta": 2})
    assert cfg["epsilon"] == 500.0 and isinstance(cfg["epsilon"], float)
    assert cfg.config_hash() == RunConfig.from_dict({"epsilon": 500.0, "theta": 2.0}).config_hash()


def test_config_hash_tracks_values():
    a = RunConfig.from_dict()
    assert a.config_hash() == RunConfig.from_dict().config_hash()
    assert a.config_hash() != RunConfig.from_dict({"seed": 1}).config_hash()
    assert len(a.config_hash()) == 64


def test_load_rejects_bad_documents(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ValidationError):
        RunConfig.load(p)
    p.write_text("[1, 2]")
    with pytest.raises(ValidationError):
        RunConfig.load(p)


# ---------------------------------------------------------------- io


def test_sample_csv_round_trip(tmp_path):
    samples = [PcSample(100, 0.2, 0.1 * k, 50, 25.0 + k, (25.0 + k) / 50) for k in range(5)]
    path = io.write_samples(tmp_path / "s.csv", samples)
    with open(path) as fh:
        assert next(csv.reader(fh)) == ["z", "p_l", "c_norm", "trials", "wins", "p_c_hat"]
    assert io.read_samples(path) == samples


def test_csv_missing_column(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("z,p_l\n100,0.2\n")
    with pytest.raises(ValidationError, match="missing columns"):
        io.read_samples(p)


def test_menu_json_round_trip(tmp_path, env):
    net, ch, fit, econ = env
    types = build_types(reference_grid(), mode="grid", net=net, channel=ch, fit=fit, econ=econ)
    menu = solve(types, econ, net.z)
    io.write_json(tmp_path / "m.json", io.menu_to_dict(menu))
    back = io.menu_from_dict(io.read_json(tmp_path / "m.json"))
    assert np.array_equal(back.bonuses, menu.bonuses)
    assert back.blockchain_utility == menu.blockchain_utility
    assert back.pools == menu.pools and back.flagged == menu.flagged
    with pytest.raises(ValidationError):
        io.menu_from_dict({"types": [{"index": 1}]})


def test_fit_json_round_trip(tmp_path):
    doc = {"beta1": 0.9, "beta2": -0.01, "beta3": 0.002, "adj_r_squared": 0.95,
           "rmse": 0.01, "z": 200, "p_l": 0.3}
    io.write_json(tmp_path / "f.json", doc)
    fit = io.read_fit(tmp_path / "f.json")
    assert (fit.beta1, fit.beta2, fit.beta3, fit.z, fit.p_l) == (0.9, -0.01, 0.002, 200, 0.3)
    io.write_json(tmp_path / "g.json", {"beta1": 0.9})
    with pytest.raises(ValidationError):
        io.read_fit(tmp_path / "g.json")


def test_same_context():
    assert io.same_context(100, 0.2, 100, 0.2)
    assert not io.same_context(100, 0.2, 200, 0.2)
    assert io.same_context(None, 0.2, 200, 0.4)


# ---------------------------------------------------------------- cli


def test_solve_contract_defaults_exit_zero(tmp_path, capsys):
    assert main(["solve-contract", "--out", str(tmp_path)]) == 0
    menu = io.read_json(tmp_path / "menu.json")
    manifest = io.read_json(tmp_path / "solve-contract.manifest.json")
    assert manifest["config_hash"] == menu["config_hash"] == RunConfig.from_dict().config_hash()
    assert manifest["outputs"] == ["menu.csv", "menu.json"]
    assert len(menu["types"]) == 48
    assert "PASS:" in capsys.readouterr().out


def test_theta_one_exits_one_naming_theta(tmp_path, capsys):
    cfg = write_cfg(tmp_path, theta=1.0)
    assert main(["solve-contract", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "theta" in capsys.readouterr().err
    assert not (tmp_path / "menu.json").exists()


def test_unknown_config_key_exits_one(tmp_path):
    assert main(["compare", "--config", write_cfg(tmp_path, colour="red"), "--out", str(tmp_path)]) == 1


def test_missing_input_exits_one(tmp_path):
    assert main(["verify", "--menu", str(tmp_path / "nope.json")]) == 1
    assert main(["fit-pc", "--samples", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 1


def test_verify_accepts_good_and_rejects_corrupted_menu(tmp_path):
    assert main(["solve-contract", "--out", str(tmp_path)]) == 0
    assert main(["verify", "--out", str(tmp_path)]) == 0
    doc = io.read_json(tmp_path / "menu.json")
    doc["types"][0]["s"] += 1e6
    io.write_json(tmp_path / "bad.json", doc)
    assert main(["verify", "--menu", str(tmp_path / "bad.json")]) == 2


def test_env_var_sets_output_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("CONNCONTRACT_OUT", str(tmp_path / "envout"))
    assert main(["compare"]) == 0
    rows = io.read_csv(tmp_path / "envout" / "compare.csv", io.MECHANISM_COLUMNS)
    assert len(rows) == 4


def test_simulate_fit_solve_pipeline(tmp_path):
    cfg = write_cfg(tmp_path, z=25, trials=60, buckets=6)
    out = str(tmp_path / "run")
    assert main(["simulate-pc", "--config", cfg, "--out", out]) == 0
    assert main(["fit-pc", "--config", cfg, "--out", out]) == 0
    report = io.read_json(tmp_path / "run" / "fit_report.json")
    assert (report["z"], report["p_l"]) == (25, 0.2)
    fit_path = str(tmp_path / "run" / "fit_report.json")
    # the default config is z=100, so the fit belongs to another network
    assert main(["solve-contract", "--fit", fit_path, "--out", out]) == 1
    code = main(["solve-contract", "--fit", fit_path, "--force", "--out", out])
    assert code in (0, 2)
    assert main(["solve-contract", "--config", cfg, "--fit", fit_path, "--out", out]) in (0, 2)


def test_fit_pc_refuses_foreign_samples(tmp_path):
    samples = [PcSample(50, 0.2, 0.1 * k, 100, 50.0 + 3 * k, (50.0 + 3 * k) / 100) for k in range(1, 8)]
    io.write_samples(tmp_path / "pc_samples.csv", samples)
    assert main(["fit-pc", "--out", str(tmp_path)]) == 1
    assert main(["fit-pc", "--out", str(tmp_path), "--force"]) == 0


def test_seed_override_changes_hash(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["compare", "--out", str(a)]) == 0
    assert main(["compare", "--out", str(b), "--seed", "9"]) == 0
    ha = io.read_json(a / "compare.manifest.json")["config_hash"]
    hb = io.read_json(b / "compare.manifest.json")["config_hash"]
    assert ha != hb
    assert (a / "compare.csv").read_bytes() == (b / "compare.csv").read_bytes()


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == 2


def test_grid_types_need_enough_peers(tmp_path, capsys):
    assert main(["solve-contract", "--config", write_cfg(tmp_path, z=10), "--out", str(tmp_path)]) == 1
    assert "connectivity" in capsys.readouterr().err
