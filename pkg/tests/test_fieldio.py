import csv

import numpy as np
import pytest

from qssfm.fieldio import read_field, write_field, write_field_csv, write_scalar_csv
from qssfm.grid import ComplexField, Representation, make_grid

from conftest import random_unit


class TestBinary:
    @pytest.mark.parametrize("rep", list(Representation))
    def test_round_trip(self, tmp_path, rng, rep):
        g = make_grid((8, 4), (2.0, 3.0), (-1.0, 0.5))
        f = ComplexField(g, random_unit(rng, 32), rep)
        write_field(tmp_path / "f.bin", f)
        back = read_field(tmp_path / "f.bin")
        assert back.grid == g and back.representation is rep
        np.testing.assert_array_equal(back.values, f.values)

    def test_bad_magic(self, tmp_path):
        (tmp_path / "x.bin").write_bytes(b"nonsense" * 4)
        with pytest.raises(ValueError, match="magic"):
            read_field(tmp_path / "x.bin")

    def test_truncated(self, tmp_path, rng):
        g = make_grid((8,), (1.0,))
        write_field(tmp_path / "f.bin", ComplexField(g, random_unit(rng, 8)))
        data = (tmp_path / "f.bin").read_bytes()
        (tmp_path / "f.bin").write_bytes(data[:-16])
        with pytest.raises(ValueError):
            read_field(tmp_path / "f.bin")


class TestCsv:
    def test_field_csv(self, tmp_path):
        g = make_grid((2, 2), (1.0, 1.0))
        write_field_csv(tmp_path / "f.csv", ComplexField(g, [0.5, 0.5j, -0.5, 0.5]))
        rows = list(csv.reader(open(tmp_path / "f.csv")))
        assert rows[0] == ["ix", "iy", "re", "im", "density"]
        assert rows[2][:2] == ["0", "1"] and float(rows[2][3]) == 0.5

    def test_scalar_csv_coordinates(self, tmp_path):
        g = make_grid((4,), (2.0,))
        write_scalar_csv(tmp_path / "s.csv", g, {"err": np.arange(4.0)})
        rows = list(csv.reader(open(tmp_path / "s.csv")))
        assert rows[0] == ["x", "err"]
        assert [float(r[0]) for r in rows[1:]] == [-1.0, -0.5, 0.0, 0.5]
