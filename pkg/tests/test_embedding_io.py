import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from crossmatch import EmbeddingCollection, ParseError, load_points_file, load_vec_file, write_vec_file
from crossmatch.embedding_io import load_collection, sniff_format


@pytest.fixture
def write(tmp_path):
    def _write(name, text, mode="w"):
        p = tmp_path / name
        if isinstance(text, bytes):
            p.write_bytes(text)
        else:
            p.write_text(text, encoding="utf-8")
        return p

    return _write


def test_minimal_vec_with_header(write):
    c = load_vec_file(write("a.vec", "2 3\napple 1 2 3\nbanana 4 5 6"))
    assert c.words == ("apple", "banana")
    assert c.dim == 3
    np.testing.assert_array_equal(c.vectors, [[1, 2, 3], [4, 5, 6]])


def test_vec_without_header(write):
    c = load_vec_file(write("a.vec", "apple 1 2 3\nbanana 4 5 6\n"))
    assert len(c) == 2 and c.dim == 3


def test_malformed_line_strict_and_skip(write):
    p = write("a.vec", "3 3\nfoo 1 2 3\nqux 1 2\nbar 4 5 6\n")
    with pytest.raises(ParseError, match=":3"):
        load_vec_file(p)
    c = load_vec_file(p, skip_malformed=True)
    assert c.dropped == 1
    assert c.words == ("foo", "bar")


def test_non_numeric_coordinate(write):
    p = write("a.vec", "foo 1 2 x\n")
    with pytest.raises(ParseError, match="non-numeric"):
        load_vec_file(p)
    for bad in ("foo 1 nan 2\n", "foo 1 inf 2\n", "foo 1 1_0 2\n", "foo 1,5 2 3\n"):
        with pytest.raises(ParseError):
            load_vec_file(write("b.vec", bad))


def test_limit_keeps_first_valid_rows(write):
    body = "".join(f"w{i} {i} {i + 1}\n" for i in range(10))
    p = write("a.vec", "10 2\n" + "bad 1\n" + body)
    c = load_vec_file(p, skip_malformed=True, limit=4)
    assert c.words == ("w0", "w1", "w2", "w3")
    with pytest.raises(ValueError):
        load_vec_file(p, limit=0)


def test_scientific_notation_and_crlf(write):
    c = load_vec_file(write("a.vec", b"tok 1e-3 -2.5E+2\r\nb .5 7\r\n"))
    np.testing.assert_array_equal(c.vectors, [[1e-3, -250.0], [0.5, 7.0]])


def test_unicode_tokens_kept_verbatim(write):
    token = "café noir"
    c = load_vec_file(write("a.vec", f"1 2\n{token} 1 2\n漢字 3 4\n"))
    assert c.words == (token, "漢字")


def test_header_detection_rule(write):
    # two integers on the first line are a header, even in a 1-d file
    c = load_vec_file(write("a.vec", "2 1\nx 5\ny 6\n"))
    assert c.dim == 1 and c.words == ("x", "y")


def test_empty_and_missing(write, tmp_path):
    with pytest.raises(ParseError, match="empty"):
        load_vec_file(write("a.vec", "5 3\n"))
    with pytest.raises(ParseError, match="cannot read"):
        load_vec_file(tmp_path / "nope.vec")
    with pytest.raises(ParseError, match="UTF-8"):
        load_vec_file(write("bad.vec", b"\xff\xfe 1 2\n"))


def test_points_file(write):
    c = load_points_file(write("p.csv", "0,0\n1,1"))
    assert c.words == () and len(c) == 2 and c.dim == 2
    c = load_points_file(write("p.txt", "0 0.5\r\n1\t1e2\n\n"))
    np.testing.assert_array_equal(c.vectors, [[0, 0.5], [1, 100]])


def test_points_errors(write):
    with pytest.raises(ParseError, match="empty collection"):
        load_points_file(write("e.txt", ""))
    with pytest.raises(ParseError, match="ragged"):
        load_points_file(write("r.txt", "1 2\n3\n"))
    with pytest.raises(ParseError):
        load_points_file(write("n.txt", "1 two\n"))


def test_points_row_count(write, rng):
    x = rng.normal(size=(1000, 3))
    p = write("big.csv", "\n".join(",".join(repr(float(v)) for v in row) for row in x) + "\n")
    c = load_points_file(p)
    assert len(c) == 1000
    np.testing.assert_array_equal(c.vectors, x)


def test_sniffing(write):
    assert sniff_format(write("a.vec", "1 2\n")) == "vec"
    assert sniff_format(write("a.txt", "apple 1 2\n")) == "vec"
    assert sniff_format(write("b.txt", "1 2\n")) == "points"
    assert len(load_collection(write("c.txt", "1\n2\n3\n"), limit=2)) == 2


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 5)), elements=finite),
       st.booleans())
def test_vec_round_trip(tmp_path_factory, x, header):
    path = tmp_path_factory.mktemp("rt") / "x.vec"
    words = tuple(f"w{i}é" for i in range(len(x)))
    write_vec_file(EmbeddingCollection(words, x), path, header=header)
    back = load_vec_file(path)
    assert back.words == words
    assert back.vectors.tobytes() == np.asarray(x, dtype=np.float64).tobytes()


def test_collection_invariants():
    with pytest.raises(ValueError):
        EmbeddingCollection(("a",), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        EmbeddingCollection((), np.zeros((0, 2)))
