import math

import numpy as np
import pytest

from mkdvlab.io import atomic_write, read_csv, write_csv, write_json, write_svg


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(3)
    a = rng.standard_normal(50)
    write_csv(tmp_path / "a.csv", ["u", "v", "tag"], [a, a**3, ["p"] * 50])
    data = read_csv(tmp_path / "a.csv")
    assert np.array_equal(data["u"], a)
    assert np.array_equal(data["v"], a**3)
    assert list(data["tag"]) == ["p"] * 50


def test_csv_length_mismatch(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "a.csv", ["u", "v"], [[1.0], [1.0, 2.0]])
    assert not (tmp_path / "a.csv").exists()


def test_atomic_write_leaves_no_temp_files(tmp_path):
    atomic_write(tmp_path / "sub" / "f.txt", "hello")
    assert (tmp_path / "sub" / "f.txt").read_text() == "hello"
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["f.txt"]


def test_json_is_sorted_and_handles_nan(tmp_path):
    write_json(tmp_path / "m.json", {"b": math.nan, "a": np.float64(1.5), "c": np.arange(2)})
    text = (tmp_path / "m.json").read_text()
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert '"b": "nan"' in text


def test_svg_deterministic(tmp_path):
    x = np.linspace(0, 1, 20)
    series = [("sin", x, np.sin(x)), ("cos", x, np.cos(x))]
    write_svg(tmp_path / "a.svg", series, title="t")
    write_svg(tmp_path / "b.svg", series, title="t")
    a = (tmp_path / "a.svg").read_bytes()
    assert a == (tmp_path / "b.svg").read_bytes()
    assert a.startswith(b"<svg") or b"<svg" in a[:200]
    write_svg(tmp_path / "c.svg", [("e", x, np.exp(-30 * x))], logy=True)
    assert b"polyline" in (tmp_path / "c.svg").read_bytes()
