import json
import os
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photonprobe.io import RunManifest, atomic_write, json_text, read_table, table_text, write_table
from photonprobe.svg import Plot, nice_ticks

finite = st.floats(-1e300, 1e300, allow_nan=False)


def test_atomic_write_leaves_no_temporaries(tmp_path):
    p = tmp_path / "sub" / "a.txt"
    atomic_write(p, "one\ntwo\n")
    atomic_write(p, b"\x00\x01")
    assert p.read_bytes() == b"\x00\x01"
    assert os.listdir(p.parent) == ["a.txt"]


def test_atomic_write_cleans_up_on_failure(tmp_path):
    with pytest.raises(TypeError):
        atomic_write(tmp_path / "b.txt", 3.0)
    assert os.listdir(tmp_path) == []


def test_table_format():
    txt = table_text(("x", "n"), (np.array([0.1, 1 / 3]), np.array([1, 2])))
    assert txt == "x,n\n0.10000000000000001,1\n0.33333333333333331,2\n"
    assert "\r" not in txt
    with pytest.raises(ValueError):
        table_text(("x",), ([1], [2]))
    with pytest.raises(ValueError):
        table_text(("x", "y"), ([1.0], [2.0, 3.0]))


@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=30))
def test_table_round_trip_is_exact(tmp_path_factory, rows):
    a = np.array(rows)
    path = tmp_path_factory.mktemp("t") / "t.csv"
    write_table(path, ("a", "b"), (a[:, 0], a[:, 1]))
    names, data = read_table(path)
    assert names == ["a", "b"]
    np.testing.assert_array_equal(data, a)
    assert path.read_bytes().endswith(b"\n")


def test_json_is_sorted_and_handles_numpy():
    txt = json_text({"b": np.float64(1.5), "a": np.arange(3), "c": np.bool_(True), "d": np.int64(2)})
    assert list(json.loads(txt)) == ["a", "b", "c", "d"]
    assert json.loads(txt)["a"] == [0, 1, 2]
    with pytest.raises(TypeError):
        json_text({"x": object()})


def test_manifest_lists_only_existing_outputs(tmp_path):
    man = RunManifest("photonprobe x", {}, "0", {"campaign": 1}, str(tmp_path))
    man.text("kept.txt", "k")
    gone = man.text("gone.txt", "g")
    os.unlink(gone)
    man.text("kept.txt", "again")
    man.finish("numerical_failure", 3, "boom")
    doc = json.loads((tmp_path / "manifest.json").read_text())
    assert doc["outputs"] == ["kept.txt"]
    assert doc["status"] == "numerical_failure" and doc["exit_code"] == 3 and doc["error"] == "boom"
    assert doc["wall_time_s"] >= 0


@given(finite.filter(lambda v: abs(v) < 1e12), st.floats(1e-6, 1e6), st.integers(2, 10))
def test_ticks_cover_range_with_round_steps(lo, span, n):
    hi = lo + span
    t = nice_ticks(lo, hi, n)
    assert len(t) >= 1
    assert t[0] >= lo - 1e-9 * span and t[-1] <= hi + 1e-9 * span
    if len(t) > 1:
        step = (t[-1] - t[0]) / (len(t) - 1)
        # differences of large ticks are only good to a few ulp of the ticks themselves
        ulp = 4 * np.finfo(float).eps * np.max(np.abs(t))
        np.testing.assert_allclose(np.diff(t), step, rtol=1e-9, atol=ulp)
        mant = step / 10 ** np.floor(np.log10(step))
        tol = 1e-9 + ulp / step * mant
        assert min(abs(mant - m) for m in (1, 2, 2.5, 5, 10)) <= tol
        assert len(t) <= 2 * n + 2


def test_ticks_reject_nonfinite():
    with pytest.raises(ValueError):
        nice_ticks(0.0, np.inf)
    assert len(nice_ticks(3.0, 3.0)) >= 1


def _plot():
    x = np.linspace(-100, 100, 201)
    p = Plot("title <&>", "x (MHz)", "y", y2label="counts")
    p.line(x, np.cos(x / 30), "red", "model")
    p.points(x[::20], np.sin(x[::20] / 30), "black", "data", yerr=np.full(11, 0.1))
    p.line(x, 1e4 * np.cos(x / 30), "blue", "right", axis="right", dash="4 2")
    return p


def test_svg_is_well_formed_and_deterministic(tmp_path):
    a = _plot().save(tmp_path / "a.svg")
    b = _plot().save(tmp_path / "b.svg")
    assert open(a, "rb").read() == open(b, "rb").read()
    root = ET.parse(a).getroot()
    ns = "{http://www.w3.org/2000/svg}"
    assert root.tag == ns + "svg"
    assert len(root.findall(f".//{ns}polyline")) == 2
    assert len(root.findall(f".//{ns}circle")) >= 11
    texts = [t.text for t in root.iter(ns + "text")]
    assert "title <&>" in texts and "counts" in texts


def test_svg_skips_nonfinite_points():
    p = Plot()
    p.line([0, 1, 2], [0.0, np.nan, 1.0])
    ET.fromstring(p.render())
    assert "nan" not in p.render()
