import json

import numpy as np
import pytest

from rhomix.ensembles import DensityMatrix, uniform_ensemble
from rhomix.serialize import (
    SchemaError,
    density_to_json,
    dumps,
    load_json,
    outcome_to_json,
    parse_complex,
    parse_density,
    parse_ensemble,
    parse_outcome,
    parse_vector,
    write_csv,
)


def test_dumps_roundtrips_floats():
    values = [0.1, 1 / 3, 2**-52, 1e300, -0.0]
    assert json.loads(dumps(values)) == values
    assert dumps({"a": [1, 2.5], "b": True, "c": None}) == '{\n  "a": [1, 2.5],\n  "b": true,\n  "c": null\n}'
    with pytest.raises(SchemaError):
        dumps(float("nan"))


def test_parse_complex_forms():
    assert parse_complex([1, -2]) == 1 - 2j
    assert parse_complex(0.5) == 0.5
    for bad in ([1, 2, 3], "x", True):
        with pytest.raises(SchemaError):
            parse_complex(bad)


def test_density_roundtrip():
    rho = DensityMatrix([[0.75, 0.25j], [-0.25j, 0.25]])
    back = parse_density(json.loads(dumps(density_to_json(rho))))
    np.testing.assert_array_equal(back.matrix, rho.matrix)


def test_density_schema_errors():
    with pytest.raises(SchemaError):
        parse_density({"dim": 3, "matrix": [[1, 0], [0, 0]]})
    with pytest.raises(SchemaError):
        parse_density({"dim": 2, "matrix": [[1, 0], [0, 0]], "extra": 1})
    with pytest.raises(SchemaError):
        parse_density({"matrix": [[1]]})
    with pytest.raises(SchemaError):
        parse_vector([])


def test_outcome_roundtrip():
    out = uniform_ensemble(DensityMatrix.diag([0.75, 0.25]), 4)
    doc = json.loads(dumps(outcome_to_json(out, "uniform")))
    parsed = parse_outcome(doc)
    np.testing.assert_array_equal(parsed["ensemble"].states, out.ensemble.states)
    np.testing.assert_array_equal(parsed["unitary"], out.unitary_used)
    assert parsed["degenerate"] is False


def test_load_json_sources(tmp_path):
    assert load_json("[1, 2]") == [1, 2]
    f = tmp_path / "x.json"
    f.write_text('{"a": 1}')
    assert load_json(str(f)) == {"a": 1}
    with pytest.raises(SchemaError):
        load_json(str(tmp_path / "missing.json"))
    with pytest.raises(SchemaError):
        load_json("{broken")


def test_parse_ensemble_rejects_bad_norm():
    with pytest.raises(ValueError):
        parse_ensemble({"weights": [1.0], "states": [[[2, 0], [0, 0]]]})


def test_write_csv():
    text = write_csv(["a", "b"], [[1, 0.5], ["x,y", np.array([0.25, 0.75])]])
    assert text == 'a,b\n1,0.5\n"x,y","[0.25,0.75]"\n'
