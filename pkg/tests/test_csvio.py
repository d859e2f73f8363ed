import pytest

from pmetraj.csvio import format_value, write_csv_atomic


def test_float_formatting_roundtrips():
    for v in (0.1, 1.0 / 3.0, 5e-324, 1.2345678901234567e17):
        assert float(format_value(v)) == v
    assert format_value(7) == "7"


def test_partial_write_leaves_nothing(tmp_path):
    def rows():
        yield (1, 2.0)
        raise RuntimeError("interrupted mid-write")

    target = tmp_path / "trace.csv"
    with pytest.raises(RuntimeError):
        write_csv_atomic(target, ["a", "b"], rows())
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []


def test_overwrite_is_atomic(tmp_path):
    target = tmp_path / "trace.csv"
    write_csv_atomic(target, ["a"], [(1,)])
    write_csv_atomic(target, ["a"], [(2,)])
    assert target.read_text() == "a\n2\n"
    assert list(tmp_path.iterdir()) == [target]
