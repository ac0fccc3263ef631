import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from riesz_stability.jsonio import dumps, format_float


def test_format_float():
    assert format_float(2.0) == "2.0"
    assert format_float(0.1) == "0.10000000000000001"
    assert float(format_float(1e-300)) == 1e-300
    assert format_float(float("nan")) == "NaN"
    assert format_float(-math.inf) == "-Infinity"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert float(format_float(x)) == x
    assert json.loads(dumps([x]))[0] == x


def test_nested_structures():
    doc = {"a": [1, 2.5, True, None], "b": {"c": np.float64(3.0), "d": np.int64(4)}, "e": (), "f": {}}
    text = dumps(doc)
    assert json.loads(text) == {"a": [1, 2.5, True, None], "b": {"c": 3.0, "d": 4}, "e": [], "f": {}}
    assert '"c": 3.0' in text
    assert json.loads(dumps(doc, indent=2)) == json.loads(text)


def test_numpy_arrays_and_bools():
    assert json.loads(dumps(np.array([1.5, 2.0]))) == [1.5, 2.0]
    assert dumps(np.bool_(True)) == "true"


def test_rejects_unknown():
    with pytest.raises(TypeError):
        dumps({"x": object()})
