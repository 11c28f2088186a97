import json
import math

import numpy as np

from sle_lab.reporting import to_json, write_columns, write_text


def test_sorted_keys_and_precision():
    text = to_json({"b": 0.1, "a": 1 / 3, "c": [1, 2.5]})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    data = json.loads(text)
    assert data["a"] == 1 / 3 and data["b"] == 0.1
    assert "0.33333333333333331" in text
    assert text.endswith("\n")


def test_round_trip_is_exact():
    rng = np.random.default_rng(1)
    vals = rng.standard_normal(200) * 10.0 ** rng.integers(-20, 20, 200)
    back = json.loads(to_json({"v": vals}))["v"]
    assert back == vals.tolist()


def test_non_finite_and_special_values():
    data = json.loads(to_json({"a": math.inf, "b": -math.inf, "c": math.nan, "d": None, "e": True,
                               "f": np.float32(0.5), "g": np.int64(3), "h": 1 + 2j, "i": {}, "j": []}))
    assert data["a"] == "inf" and data["b"] == "-inf" and data["c"] == "nan"
    assert data["d"] is None and data["e"] is True and data["f"] == 0.5 and data["g"] == 3
    assert data["h"] == [1.0, 2.0] and data["i"] == {} and data["j"] == []


def test_nested_arrays():
    data = json.loads(to_json({"m": np.eye(2), "l": [{"x": 1}, {"x": 2}]}))
    assert data["m"] == [[1.0, 0.0], [0.0, 1.0]]
    assert data["l"][1]["x"] == 2


def test_deterministic():
    obj = {"z": np.linspace(0, 1, 7), "k": "text", "n": {"q": 1e-300}}
    assert to_json(obj) == to_json(dict(reversed(list(obj.items()))))


def test_unicode_file(tmp_path):
    write_text(tmp_path / "r.json", to_json({"name": "κ"}))
    raw = (tmp_path / "r.json").read_bytes()
    assert "κ".encode("utf-8") in raw and b"\r\n" not in raw


def test_columns(tmp_path):
    write_columns(tmp_path / "c.csv", ["x", "y"], [[0.1, 2.0], [1 / 3, -5]])
    lines = (tmp_path / "c.csv").read_text(encoding="utf-8").splitlines()
    assert lines == ["x,y", "0.10000000000000001,0.33333333333333331", "2,-5"]


def test_negative_zero_is_written_as_zero():
    assert to_json({"c": -0.0}) == '{\n  "c": 0\n}\n'
