import json
import math

import numpy as np
import pytest

from thermoshift import io, sft, treelab
from thermoshift.errors import InadmissibleWord, ValidationError


class TestDumps:
    def test_seventeen_digits(self):
        assert io.dumps(0.1) == "0.10000000000000001\n"
        assert io.dumps(math.log(2)) == "0.69314718055994529\n"

    def test_integral_floats_keep_a_point(self):
        assert io.dumps([1.0, 2, np.float64(3.0)]) == "[1.0, 2, 3.0]\n"

    def test_non_finite(self):
        assert json.loads(io.dumps([math.inf, -math.inf, math.nan])) == ["inf", "-inf", "nan"]

    def test_numpy_and_complex(self):
        out = json.loads(io.dumps({"a": np.arange(3), "b": np.bool_(True), "c": 1 + 2j}))
        assert out == {"a": [0, 1, 2], "b": True, "c": [1.0, 2.0]}

    def test_round_trip_is_exact(self):
        rng = np.random.default_rng(0)
        xs = rng.normal(size=50).tolist()
        assert json.loads(io.dumps(xs)) == xs

    def test_deterministic_and_ordered(self):
        obj = {"z": [1.5, {"y": None}], "a": "s"}
        assert io.dumps(obj) == io.dumps(obj)
        assert list(json.loads(io.dumps(obj))) == ["z", "a"]

    def test_rejects_unknown(self):
        with pytest.raises(TypeError):
            io.dumps(object())


class TestModels:
    def test_matrix_model(self):
        m = io.parse_model({"schema": 1, "kind": "sft", "matrix": [[1, 1], [1, 0]],
                            "functions": {"potential": {"depth": 2, "values": {"00": 0.1, "01": -0.3, "10": 0.0}},
                                          "weight": {"constant": 2.0},
                                          "cocycle": "uniform"}})
        assert m.A == sft.golden_mean()
        assert m.get("potential").as_dict() == {"00": 0.1, "01": -0.3, "10": 0.0}
        assert np.all(m.get("weight").values == 2.0)
        assert m.get("cocycle").as_dict() == {"00": 0.5, "01": 1.0, "10": 0.5}

    def test_edges_model(self):
        m = io.parse_model({"schema": 1, "states": 2, "edges": [[0, 1], [1, 0]], "cuntz_krieger": True})
        assert m.A.cuntz_krieger and m.A.entries.tolist() == [[0, 1], [1, 0]]

    def test_edge_matrix_function(self):
        m = io.parse_model({"schema": 1, "matrix": [[1, 1], [1, 1]],
                            "functions": {"weight": {"edges": [[1, 2], [3, [0, 1]]]}}})
        assert m.get("weight").values.tolist() == [1, 2, 3, 1j]

    def test_minus_inf_values(self):
        m = io.parse_model({"schema": 1, "matrix": [[1, 1], [1, 1]],
                            "functions": {"potential": {"values": {"0": "-inf", "1": 0.0}}}})
        assert m.get("potential").values[0] == -np.inf and m.get("potential").depth == 1

    @pytest.mark.parametrize("doc", [
        {"matrix": [[1]]},
        {"schema": 2, "matrix": [[1]]},
        {"schema": 1, "kind": "graph", "matrix": [[1]]},
        {"schema": 1},
        {"schema": 1, "matrix": [[1]], "functions": {"weight": 3}},
        {"schema": 1, "matrix": [[1]], "functions": {"weight": {"depth": 1}}},
        [],
    ])
    def test_invalid(self, doc):
        with pytest.raises(ValidationError):
            io.parse_model(doc)

    def test_inadmissible_key(self):
        with pytest.raises(InadmissibleWord):
            io.parse_model({"schema": 1, "matrix": [[1, 1], [1, 0]],
                            "functions": {"potential": {"depth": 2, "values": {"00": 0, "01": 0, "10": 0, "11": 0}}}})

    def test_tree_model(self):
        doc = treelab.build_example_contrexample().to_json()
        T = io.parse_model(doc)
        assert isinstance(T, treelab.TreeSystem) and T.to_json() == doc

    def test_load(self, tmp_path):
        p = tmp_path / "m.json"
        p.write_text(json.dumps({"schema": 1, "matrix": [[1, 1], [1, 1]]}))
        assert io.load_model(str(p)).A == sft.full_shift(2)
        p.write_text("{not json")
        with pytest.raises(ValidationError):
            io.load_model(str(p))
        assert isinstance(io.load_model("contrexample"), treelab.TreeSystem)
