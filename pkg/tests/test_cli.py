import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from incfilter.cli import dumps, loads, main, parse_config
from incfilter.errors import ConfigError

FILTER = {"mode": "filter", "increment": {"n": 1, "tau": 1.0}, "weight": {"kind": "exponential", "beta": 1.0},
          "f": {"kind": "rational", "num": [1], "den": [1, 2, 1]}, "g": {"kind": "rational", "num": [1], "den": [1, 1]},
          "output": {"points": 41}}
D0 = {"mode": "minimax-D0", "increment": {"n": 1, "tau": 1.0},
      "weight": {"kind": "exppoly", "terms": [[1.0, [1.0]], [2.0, [-2.0]]]},
      "f": FILTER["f"], "g": FILTER["g"], "classes": {"g": {"kind": "D0-power", "power": 0.5}},
      "saddle": {"samples": 5}}


def _run(tmp_path, cfg, *extra, name="r.json"):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / name
    code = main(["--config", str(path), "--out", str(out), *extra])
    return code, out


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), max_size=20))
def test_float_round_trip(values):
    back = loads(dumps({"x": values}))["x"]
    assert all(a == b and np.signbit(a) == np.signbit(b) and type(b) is float for a, b in zip(values, back))


def test_json_writes_17_digits():
    assert dumps(0.1).strip() == "0.10000000000000001"


@pytest.mark.parametrize("cfg, field", [
    ({**FILTER, "increment": {"n": 1, "tau": -1.0}}, "tau"),
    ({**FILTER, "increment": {"n": 1.5, "tau": 1.0}}, "n"),
    ({**FILTER, "mode": "nope"}, "mode"),
    ({k: v for k, v in FILTER.items() if k != "g"}, "g"),
    ({**FILTER, "mode": "filter-finite-T"}, "T"),
    ({**D0, "classes": {}}, "classes"),
    ({**D0, "classes": {"g": {"kind": "Deps-contamination", "power": 0.5, "eps": 0.2,
                              "nominal": FILTER["g"]}}}, "classes.g"),
    ({**FILTER, "grid": {"step": 0}}, "grid.step"),
])
def test_config_errors_name_the_field(cfg, field):
    with pytest.raises(ConfigError) as info:
        parse_config(cfg)
    assert info.value.field == field


def test_config_error_exit_code(tmp_path, capsys):
    code, out = _run(tmp_path, {**FILTER, "increment": {"n": 1, "tau": -2}})
    assert code == 2 and not out.exists()
    assert "tau" in capsys.readouterr().err


def test_filter_result_and_round_trip(tmp_path):
    code, out = _run(tmp_path, FILTER)
    assert code == 0
    text = out.read_text()
    res = json.loads(text)
    assert dumps(res) == text
    assert set(res) >= {"config", "minimality", "h", "c", "delta", "solver"}
    assert abs(res["delta"]["operator"] - res["delta"]["spectral"]) < 1e-2 * res["delta"]["operator"]
    assert len(res["h"]["re"]) == 41 and len(res["c"]["t"]) == len(res["c"]["value"])


def test_zero_noise_filter(tmp_path):
    code, out = _run(tmp_path, {**FILTER, "g": {"kind": "zero"}})
    res = json.loads(out.read_text())
    assert code == 0 and abs(res["delta"]["operator"]) < 1e-8
    assert max(map(abs, res["h"]["re"] + res["h"]["im"])) < 1e-8


def test_mode_override_and_finite_horizon(tmp_path):
    code, out = _run(tmp_path, {**FILTER, "T": 2.0}, "--mode", "filter-finite-T")
    assert code == 0 and json.loads(out.read_text())["config"]["T"] == 2.0


def test_minimax_determinism(tmp_path):
    c1, o1 = _run(tmp_path, D0, "--seed", "5", name="a.json")
    c2, o2 = _run(tmp_path, D0, "--seed", "5", name="b.json")
    assert c1 == c2 == 0
    assert o1.read_bytes() == o2.read_bytes()
    res = json.loads(o1.read_text())
    assert res["saddle"]["passed"] and res["multipliers"]["alpha2"] > 0
    assert set(res) >= {"least_favorable", "multipliers", "residuals", "saddle", "h", "delta"}


def test_non_convergence_exit_code(tmp_path):
    code, _ = _run(tmp_path, {**D0, "minimax": {"max_iters": 2}})
    assert code == 3


def test_validate_mismatch_exit_code(tmp_path):
    cfg = {"mode": "validate", "validate": {"cases": ["n1-tau1-exp"], "replicates": 500,
                                            "route_tol": 1e-12}}
    code, out = _run(tmp_path, cfg)
    res = json.loads(out.read_text())
    assert code == 4 and not res["passed"]
    cfg["validate"]["route_tol"] = 0.01
    code, out = _run(tmp_path, cfg)
    assert code == 0 and json.loads(out.read_text())["table"][0]["ok"]
