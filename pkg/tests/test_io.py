import io

import pytest

from cminhash.errors import DatasetFormatError, DatasetParseError
from cminhash.experiments import MaeResultRow, McResultRow
from cminhash.io import (
    TheoryMeanRow,
    TheoryPerKRow,
    csv_header,
    format_sparse_dataset,
    load_sparse_dataset,
    parse_sparse_dataset,
    read_results_csv,
    write_results_csv,
    write_sparse_dataset,
)
from cminhash.permute import BinaryVector, Scheme


class TestDatasetParser:
    def test_basic(self):
        ds = parse_sparse_dataset("3\n1 3\n2\n")
        assert ds.dim == 3
        assert [v.nonzeros.tolist() for v in ds] == [[1, 3], [2]]
        assert ds.ids == (2, 3)
        assert ds.by_id(3) == BinaryVector(3, [2])

    def test_blank_line_is_empty_vector(self):
        ds = parse_sparse_dataset("4\n1\n\n2 4\n")
        assert [v.nnz for v in ds] == [1, 0, 2]
        assert ds.ids == (2, 3, 4)

    def test_header_only(self):
        assert len(parse_sparse_dataset("7\n")) == 0

    def test_crlf(self):
        ds = parse_sparse_dataset("3\r\n1 2\r\n")
        assert ds[0].nonzeros.tolist() == [1, 2]

    @pytest.mark.parametrize("text,line", [
        ("3\n3 1\n", 2),
        ("3\n1 2\n2 2\n", 3),
        ("3\n1 4\n", 2),
        ("3\n0\n", 2),
        ("3\n1 x\n", 2),
        ("3\n1  2\n", 2),
        ("3\n 1\n", 2),
        ("3\n-1\n", 2),
    ])
    def test_parse_errors_carry_line(self, text, line):
        with pytest.raises(DatasetParseError) as err:
            parse_sparse_dataset(text)
        assert err.value.line == line
        assert f"line {line}" in str(err.value)

    @pytest.mark.parametrize("text", ["", "1 2\n3\n", "D=3\n1\n", "0\n"])
    def test_bad_header(self, text):
        with pytest.raises(DatasetFormatError):
            parse_sparse_dataset(text)

    def test_roundtrip(self, tmp_path):
        vecs = [BinaryVector(12, [1, 5, 12]), BinaryVector(12, []), BinaryVector(12, [7])]
        path = tmp_path / "d.txt"
        write_sparse_dataset(vecs, path)
        assert path.read_text() == "12\n1 5 12\n\n7\n"
        assert list(load_sparse_dataset(path)) == vecs

    def test_format_checks_dim(self):
        with pytest.raises(DatasetFormatError):
            format_sparse_dataset([BinaryVector(3, [1]), BinaryVector(4, [1])])
        assert format_sparse_dataset([], dim=5) == "5\n"


class TestResultsCsv:
    def test_headers(self):
        assert ",".join(csv_header(McResultRow)) == "K,scheme,mean,bias2,variance,mse,trials,stderr_mean"
        assert ",".join(csv_header(MaeResultRow)) == "K,scheme,mae,reps"
        assert ",".join(csv_header(TheoryMeanRow)) == "K,mean,bias2"
        assert ",".join(csv_header(TheoryPerKRow)) == "k,expectation"

    def test_empty_rows_header_only(self, tmp_path):
        path = tmp_path / "e.csv"
        write_results_csv([], path, row_type=MaeResultRow)
        assert path.read_text() == "K,scheme,mae,reps\n"
        with pytest.raises(ValueError):
            write_results_csv([], path)

    def test_full_precision_and_reparse(self, tmp_path):
        rows = [MaeResultRow(8, Scheme.PI_PI, 0.1 + 0.2, 10), MaeResultRow(32, Scheme.SIGMA_PI, 1 / 3, 10)]
        path = tmp_path / "m.csv"
        write_results_csv(rows, path)
        back = read_results_csv(path)
        assert back[0]["scheme"] == "pi_pi"
        assert float(back[0]["mae"]) == 0.1 + 0.2
        assert float(back[1]["mae"]) == 1 / 3

    def test_stream_target(self):
        buf = io.StringIO()
        write_results_csv([TheoryPerKRow(1, 0.5)], buf)
        assert buf.getvalue() == "k,expectation\n1,0.5\n"

    def test_mixed_rows_rejected(self, tmp_path):
        with pytest.raises(TypeError):
            write_results_csv([TheoryPerKRow(1, 0.5), TheoryMeanRow(1, 0.5, 0.0)], tmp_path / "x.csv")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError):
            write_results_csv([TheoryPerKRow(1, 0.5)], tmp_path / "missing" / "x.csv")
