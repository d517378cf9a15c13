import json

import pytest

from critscat.config import ConfigError, ExperimentConfig, apply_env, load_config, parse_ini, parse_json


def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.resolved_gamma() == 1.25
    assert len(cfg.probe_tuples()) == 6


def test_ini_round_trip():
    cfg = ExperimentConfig(d=4, l=1, gamma=6.5, potential="tail", k_min=1e-7,
                           probes=[[1.5, 2.0], [3.0, 5.0]], tolerances={"phase_slope": 0.01})
    back = parse_ini(cfg.to_ini())
    assert back == cfg


def test_json_round_trip(tmp_path):
    cfg = ExperimentConfig(sigma=2.0, gamma=None, output_dir="out")
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    back = load_config(path, environ={})
    assert back == cfg
    assert back.resolved_gamma() == pytest.approx(0.25 + 4.0)


def test_ini_file_with_comments(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[sector]\nd = 3 ; dimension\nsigma = 1.5\n\n[probes]\npairs = 1:2, 4:6\n")
    cfg = load_config(path, environ={})
    assert cfg.gamma is None and cfg.resolved_gamma() == pytest.approx(0.25 + 2.25)
    assert cfg.probe_tuples() == ((1.0, 2.0), (4.0, 6.0))


def test_environment_overrides():
    env = {"CRITSCAT_GAMMA": "4.25", "CRITSCAT_K_MAX": "0.001",
           "CRITSCAT_TOLERANCES": json.dumps({"c2": 0.02}), "UNRELATED": "x"}
    cfg = load_config(environ=env)
    assert cfg.gamma == 4.25 and cfg.k_max == 1e-3 and cfg.tolerances == {"c2": 0.02}
    cfg = apply_env(ExperimentConfig(), {"CRITSCAT_SIGMA": "2"})
    assert cfg.gamma is None and cfg.sigma == 2.0


def test_environment_error_names_variable():
    with pytest.raises(ConfigError, match="CRITSCAT_D"):
        load_config(environ={"CRITSCAT_D": "three"})


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="colour"):
        parse_ini("[sector]\ncolour = red\n")
    with pytest.raises(ConfigError, match="colour"):
        parse_json('{"colour": 1}')


def test_json_error_cites_line():
    with pytest.raises(ConfigError, match="line 3"):
        parse_json('{\n  "d": 3,\n  "l": ,\n}', origin="bad.json")
    with pytest.raises(ConfigError):
        parse_json("[1, 2]")


def test_bad_value_and_missing_gamma():
    with pytest.raises(ConfigError, match="k_min"):
        parse_ini("[grid]\nk_min = tiny\n")
    with pytest.raises(ConfigError):
        ExperimentConfig(gamma=None).resolved_gamma()
    with pytest.raises(ConfigError):
        parse_ini("not an ini file")
