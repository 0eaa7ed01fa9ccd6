import numpy as np
import pytest

from quartet.cost import DistanceMatrix
from quartet.matrix_io import (
    FORMATS,
    MatrixParseError,
    detect_format,
    format_matrix,
    parse_matrix,
    read_distance_matrix,
    write_distance_matrix,
)

from conftest import random_symmetric_matrix, rng_for


@pytest.mark.parametrize("fmt", FORMATS)
def test_round_trip_exact(fmt, tmp_path):
    rng = rng_for(17)
    dm = random_symmetric_matrix(9, rng)
    dm = DistanceMatrix(dm.d, names=[f"sp{i}" for i in range(9)])
    path = tmp_path / f"m.{fmt}"
    write_distance_matrix(dm, path, fmt)
    back = read_distance_matrix(path, fmt)
    assert np.array_equal(back.d, dm.d)  # bit-exact through text
    assert back.names == dm.names


def test_csv_headerless_round_trip(tmp_path):
    dm = random_symmetric_matrix(5, rng_for(3))
    assert dm.names is None
    text = format_matrix(dm, "csv")
    back = parse_matrix(text, "csv")
    assert back.names is None and np.array_equal(back.d, dm.d)


def test_csv_rejects_numeric_names():
    dm = DistanceMatrix(np.zeros((4, 4)), names=["1", "2", "3", "4"])
    with pytest.raises(ValueError):
        format_matrix(dm, "csv")


def test_whitespace_tolerance():
    text = "  a , b ,c, d\n 0, 1,2, 3\n1,0 , 2,2\n2,2,0,1\n3,2,1,0\n"
    dm = parse_matrix(text, "csv")
    assert dm.names == ["a", "b", "c", "d"]
    phylip = " 4\n  a\t0 1 2 3\n b 1 0 2\n   2\n c 2 2 0 1\n d 3 2 1 0\n"
    dm2 = parse_matrix(phylip, "phylip")
    assert dm2.names == ["a", "b", "c", "d"]
    assert dm2.d[1, 3] == 2.0


def test_parse_errors_carry_positions():
    with pytest.raises(MatrixParseError, match="line 2"):
        parse_matrix("1,2\n3,x\n", "csv")
    with pytest.raises(MatrixParseError, match="symmetric"):
        parse_matrix("0,1\n1.5,0\n" * 1, "csv")
    with pytest.raises(MatrixParseError, match="expected item count"):
        parse_matrix("abc\n", "phylip")
    with pytest.raises(MatrixParseError, match="truncated"):
        parse_matrix("3\na 0 1 2\nb 1 0 1\n", "phylip")
    with pytest.raises(MatrixParseError, match="NEXUS"):
        parse_matrix("BEGIN DISTANCES;", "nexus")


def test_nexus_lower_triangle_and_comments():
    text = """#NEXUS
[ distance block written by another tool ]
BEGIN distances;
  DIMENSIONS ntax=4;
  FORMAT triangle=LOWER diagonal;
  MATRIX
    'sp a' 0
    b 1.5 0
    c 2.25 3 0
    d 0.5 1 2 0
  ;
END;
"""
    dm = parse_matrix(text, "nexus")
    assert dm.names == ["sp a", "b", "c", "d"]
    assert dm.d[0, 3] == 0.5 and dm.d[3, 0] == 0.5
    assert dm.d[2, 1] == 3.0 and dm.d[1, 2] == 3.0


def test_format_detection(tmp_path):
    assert detect_format("x.nex") == "nexus"
    assert detect_format("x.phy") == "phylip"
    assert detect_format("x.csv") == "csv"
    assert detect_format(None, "#NEXUS\nBEGIN...") == "nexus"
    assert detect_format(None, " 5\na 0 1\n") == "phylip"
    assert detect_format(None, "0,1\n1,0\n") == "csv"
    # extension wins over content
    p = tmp_path / "m.weird"
    p.write_text("#NEXUS\n")
    assert detect_format(p, "#NEXUS\n") == "nexus"


def test_17_digit_round_trip_values():
    vals = np.array(
        [
            [0.0, 1 / 3, np.pi],
            [1 / 3, 0.0, np.nextafter(0.1, 1.0)],
            [np.pi, np.nextafter(0.1, 1.0), 0.0],
        ]
    )
    # 3x3 is legal as a bare matrix container even though trees need n>=4
    dm = DistanceMatrix(vals)
    for fmt in FORMATS:
        back = parse_matrix(format_matrix(dm, fmt), fmt)
        assert np.array_equal(back.d, vals), fmt
