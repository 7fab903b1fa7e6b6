import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsedft.fileio import (
    FormatError,
    dumps_json,
    fmt,
    parse_index_list,
    read_index_file,
    read_signal,
    read_spectrum,
    write_signal,
    write_spectrum,
)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e300), min_size=1, max_size=20))
def test_signal_round_trip_is_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("io") / "s.csv"
    x = np.array(values, dtype=complex)
    write_signal(path, x)
    assert np.array_equal(read_signal(path), x)


def test_spectrum_round_trip(tmp_path):
    X = np.array([1 + 2j, -0.1, 3e-20j])
    write_spectrum(tmp_path / "X.csv", X)
    assert (tmp_path / "X.csv").read_text().startswith("k,re,im\n")
    assert np.array_equal(read_spectrum(tmp_path / "X.csv"), X)


@pytest.mark.parametrize(
    "text, line",
    [
        ("", "line 1"),
        ("a,b,c\n0,1,2\n", "line 1"),
        ("n,re,im\n", "line 2"),
        ("n,re,im\n0,1,2\n1,x,2\n", "line 3"),
        ("n,re,im\n0,1,inf\n", "line 2"),
    ],
)
def test_bad_signal_files(tmp_path, text, line):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(FormatError, match=line):
        read_signal(path)


def test_incomplete_signal_rejected(tmp_path):
    path = tmp_path / "gap.csv"
    path.write_text("n,re,im\n0,1,0\n2,1,0\n")
    with pytest.raises(FormatError, match="0..1"):
        read_signal(path)


def test_index_lists(tmp_path):
    assert parse_index_list("1, 2 3,4") == [1, 2, 3, 4]
    with pytest.raises(FormatError):
        parse_index_list("1,a")
    path = tmp_path / "m.txt"
    path.write_text("# header\n0 1\n5 # tail\n")
    assert read_index_file(path) == [0, 1, 5]
    path.write_text("0\nq\n")
    with pytest.raises(FormatError, match="line 2"):
        read_index_file(path)


def test_fmt_and_json():
    assert float(fmt(0.1)) == 0.1 and fmt(math.inf) == "inf" and fmt(math.nan) == "nan"
    doc = json.loads(dumps_json({"b": np.float64(-math.inf), "a": [np.int64(3)]}))
    assert doc == {"a": [3], "b": "-inf"}
