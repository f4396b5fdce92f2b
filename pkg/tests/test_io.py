import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremal_lab import io as eio

FINITE = st.floats(allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(FINITE)
def test_float_round_trip_exact(x):
    assert float(eio._fmt_float(x)) == x


@settings(max_examples=100, deadline=None)
@given(st.recursive(st.none() | st.booleans() | st.integers(-10 ** 6, 10 ** 6) | FINITE | st.text(max_size=8),
                    lambda kids: st.lists(kids, max_size=4) | st.dictionaries(st.text(max_size=5), kids, max_size=4),
                    max_leaves=20))
def test_dumps_parse_dumps_is_identity(obj):
    text = eio.dumps(obj)
    again = eio.dumps(eio.loads(text))
    assert again == text
    assert eio.loads(text) == json.loads(text)


def test_non_finite_become_null():
    assert eio.dumps([1.0, math.nan, math.inf]) == "[1.0, null, null]"


def test_numpy_values():
    doc = {"a": np.float64(0.1), "b": np.int64(3), "c": np.arange(3.0), "d": np.bool_(True)}
    assert eio.loads(eio.dumps(doc)) == {"a": 0.1, "b": 3, "c": [0.0, 1.0, 2.0], "d": True}


def test_unserializable():
    with pytest.raises(TypeError):
        eio.dumps(object())


def test_report_schema():
    good = {"schema_version": eio.SCHEMA_VERSION, "kind": "report", "command": "x", "seed": 0,
            "passed": True, "results": []}
    eio.validate(good, eio.REPORT_SCHEMA)
    with pytest.raises(eio.SchemaError):
        eio.validate({**good, "schema_version": 99}, eio.REPORT_SCHEMA)
    with pytest.raises(eio.SchemaError):
        eio.validate({k: v for k, v in good.items() if k != "seed"}, eio.REPORT_SCHEMA)


def test_csv_table():
    text = eio.table_csv([{"a": 0.1, "b": None, "c": "x"}, {"a": 2, "c": "y,z"}], ("a", "b", "c"))
    assert text.splitlines() == ["a,b,c", "0.10000000000000001,,x", '2,,"y,z"']
