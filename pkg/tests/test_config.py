import json

import numpy as np
import pytest

from chaoslim.coefficients import BoundedDecay, Explicit, RegVar
from chaoslim.config import ConfigError, load_experiment, load_json, parse_coefficients, parse_experiment, parse_kernel

BASE = {
    "N": 256, "R": 10, "seed": 4,
    "components": [
        {"label": "a", "block": "S1", "k": 1, "coefficients": {"family": "explicit", "values": [0.5, 0.5]}},
        {"label": "b", "block": "L", "k": 2,
         "coefficients": {"family": "regvar", "d": 0.4, "L": {"kind": "logpower", "p": 1}}},
    ],
}


def text_of(data):
    return json.dumps(data, indent=2)


def test_round_trip():
    cfg = parse_experiment(BASE, text_of(BASE))
    assert cfg.N == 256 and cfg.seed == 4 and cfg.blocks == ["S1", "L"]
    assert isinstance(cfg.specs[1].coeffs, RegVar) and cfg.specs[1].coeffs.L.kind == "logpower"
    again = parse_experiment(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()


def test_families():
    assert isinstance(parse_coefficients({"family": "explicit", "values": [1, 2]}), Explicit)
    b = parse_coefficients({"family": "bounded", "d": 0.1, "c": 2.0, "values": [1, 0.5]})
    assert isinstance(b, BoundedDecay)
    g = parse_coefficients({"family": "geometric", "ratio": 0.5})
    assert g.coefficients[:3] == (1.0, 0.5, 0.25)
    with pytest.raises(ConfigError, match="unknown coefficient family"):
        parse_coefficients({"family": "wavelet"})


def test_out_of_range_d_names_field_and_line():
    data = json.loads(json.dumps(BASE))
    data["components"][1]["coefficients"]["d"] = 0.6
    text = text_of(data)
    with pytest.raises(ConfigError) as exc:
        parse_experiment(data, text)
    err = exc.value
    assert err.field == "components[1].coefficients.d"
    assert err.line == next(i + 1 for i, l in enumerate(text.splitlines()) if '"d"' in l)
    assert "line" in str(err)


def test_block_mismatch():
    data = json.loads(json.dumps(BASE))
    data["components"][0]["block"] = "S2"
    with pytest.raises(ConfigError, match="declared S2"):
        parse_experiment(data, text_of(data))


def test_missing_block_and_fields():
    data = json.loads(json.dumps(BASE))
    del data["components"][0]["block"]
    with pytest.raises(ConfigError, match="block"):
        parse_experiment(data)
    with pytest.raises(ConfigError, match="missing required field"):
        parse_experiment({"components": [{"label": "x", "block": "S1"}]})
    with pytest.raises(ConfigError, match="expected int"):
        parse_experiment(dict(BASE, N="many"))


def test_malformed_json_has_line():
    with pytest.raises(ConfigError) as exc:
        load_json('{\n "N": 3,\n oops\n}')
    assert exc.value.line == 3


def test_bad_grid_and_noise():
    with pytest.raises(ConfigError, match="grid"):
        parse_experiment(dict(BASE, grid=[0.5]))
    with pytest.raises(ConfigError, match="noise"):
        parse_experiment(dict(BASE, noise="cauchy"))


def test_load_experiment_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_experiment(str(tmp_path / "nope.cfg"))


def test_bundled_config_parses():
    cfg = load_experiment("configs/mixed.cfg")
    assert cfg.blocks == ["S1", "S2", "L"] and cfg.N == 2**14 and cfg.R == 2000


def test_kernel_configs():
    h, k, noise, R, seed = parse_kernel({"k": 2, "noise": "uniform", "R": 50, "indices": [1, 2, 3, 5],
                                         "values": [1.0, -2.0]})
    assert k == 2 and R == 50 and h.indices.tolist() == [[1, 2], [3, 5]]
    h2, *_ = parse_kernel({"k": 3, "random": {"count": 10, "width": 6, "seed": 1}})
    assert h2.k == 3 and h2.size == 10
    assert np.all(np.diff(h2.indices, axis=1) > 0)
    with pytest.raises(ConfigError):
        parse_kernel({"k": 2, "indices": [1, 1], "values": [1.0]})
