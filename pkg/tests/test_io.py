import numpy as np
import pytest

from geosampling.io import (FormatError, dumps_json, parse_pgm, read_curve_csv, read_obj, read_pgm,
                            write_csv, write_obj, write_pgm)


def test_pgm_roundtrip_binary_and_ascii(tmp_path):
    h = np.linspace(0, 1, 12).reshape(3, 4)
    for binary in (True, False):
        p = tmp_path / f"img{binary}.pgm"
        write_pgm(p, h, binary=binary)
        s = read_pgm(p)
        assert s.values.shape == (3, 4)
        assert np.abs(s.values - h).max() <= 0.5 / 255 + 1e-12


def test_pgm_comments_and_16bit():
    data = b"P2\n# a comment\n2 1\n# another\n65535\n0 65535\n"
    px, maxval = parse_pgm(data)
    assert maxval == 65535 and px.tolist() == [[0, 65535]]


def test_pgm_errors_name_offsets():
    with pytest.raises(FormatError, match="offset 0"):
        parse_pgm(b"P6\n1 1\n255\n\x00")
    with pytest.raises(FormatError, match="offset"):
        parse_pgm(b"P5\n2 2\n255\n\x00")
    with pytest.raises(FormatError):
        parse_pgm(b"P2\n2 x\n255\n")


def test_row_flip(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P2\n3 3\n10\n10 10 10\n5 5 5\n0 0 0\n")
    s = read_pgm(p)
    # first file row is the top of the image, i.e. the largest y
    assert s.values[:, 0].tolist() == [0.0, 0.5, 1.0]


def test_curve_csv(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("t,f\n0,0\n1,1\n3,3\n")
    s = read_curve_csv(p, n=4)
    assert np.allclose(s.values, [0, 1, 2, 3])
    p.write_text("0,0\n1,1\n1,2\n")
    with pytest.raises(FormatError, match="increasing"):
        read_curve_csv(p)


def test_obj_roundtrip(tmp_path):
    v = np.random.default_rng(1).random((5, 3))
    f = np.array([[0, 1, 2], [2, 3, 4]])
    write_obj(tmp_path / "m.obj", v, f)
    v2, f2 = read_obj(tmp_path / "m.obj")
    assert np.array_equal(v, v2) and np.array_equal(f, f2)


def test_json_and_csv_are_deterministic(tmp_path):
    obj = {"b": np.float64(0.1), "a": [np.int64(2), np.inf, np.nan], "c": np.arange(2)}
    assert dumps_json(obj) == dumps_json(dict(reversed(list(obj.items()))))
    assert '"inf"' in dumps_json(obj)
    write_csv(tmp_path / "x.csv", ["v"], [[0.1]])
    assert (tmp_path / "x.csv").read_text() == "v\n0.1\n"
