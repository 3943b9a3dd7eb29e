"""Sparse dataset files and result CSVs.

Dataset format: the first line is the dimension D; every following line is
one vector, written as ascending space-separated 1-based nonzero indices.
A blank line is an empty vector.  Vector ids are the file line numbers.
"""

import csv
import dataclasses
import enum
import re
from dataclasses import dataclass

from .errors import DatasetFormatError, DatasetParseError
from .permute import BinaryVector

_HEADER = re.compile(r"^[0-9]+$")
_ROW = re.compile(r"^[0-9]+( [0-9]+)*$")


@dataclass(frozen=True)
class SparseDataset:
    dim: int
    vectors: tuple
    ids: tuple

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __getitem__(self, i):
        return self.vectors[i]

    def by_id(self, line):
        try:
            return self.vectors[self.ids.index(line)]
        except ValueError:
            raise KeyError(f"no vector on line {line}") from None


def parse_sparse_dataset(text):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in lines]
    if not lines or not _HEADER.match(lines[0]):
        raise DatasetFormatError("missing dimension header", line=1)
    dim = int(lines[0])
    if dim < 1:
        raise DatasetFormatError("dimension must be >= 1", line=1)
    vectors, ids = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            idx = []
        elif not _ROW.match(line):
            raise DatasetParseError(f"not a list of integers: {line[:40]!r}", line=lineno)
        else:
            idx = [int(t) for t in line.split(" ")]
        for prev, cur in zip(idx, idx[1:]):
            if cur <= prev:
                raise DatasetParseError("indices must be strictly ascending", line=lineno)
        if idx and (idx[0] < 1 or idx[-1] > dim):
            raise DatasetParseError(f"index outside [1, {dim}]", line=lineno)
        vectors.append(BinaryVector(dim, idx))
        ids.append(lineno)
    return SparseDataset(dim, tuple(vectors), tuple(ids))


def load_sparse_dataset(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_sparse_dataset(fh.read())


def format_sparse_dataset(vectors, dim=None):
    vectors = list(vectors)
    if dim is None:
        if not vectors:
            raise DatasetFormatError("dimension needed for an empty dataset")
        dim = vectors[0].dim
    out = [str(dim)]
    for v in vectors:
        if v.dim != dim:
            raise DatasetFormatError(f"vector of dim {v.dim} in a dataset of dim {dim}")
        out.append(" ".join(str(int(i)) for i in v.nonzeros))
    return "\n".join(out) + "\n"


def write_sparse_dataset(vectors, path, dim=None):
    text = format_sparse_dataset(vectors, dim)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


@dataclass(frozen=True)
class TheoryMeanRow:
    K: int
    mean: float
    bias2: float


@dataclass(frozen=True)
class TheoryPerKRow:
    k: int
    expectation: float


def _cell(value):
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def csv_header(row_type):
    return [f.name for f in dataclasses.fields(row_type)]


def write_results_csv(rows, path, row_type=None):
    """Header plus one line per row; floats carry 17 significant digits.

    ``path`` may also be an open text stream.
    """
    rows = list(rows)
    if row_type is None:
        if not rows:
            raise ValueError("row_type is required to write an empty result set")
        row_type = type(rows[0])
    for r in rows:
        if type(r) is not row_type:
            raise TypeError(f"mixed row types: {type(r).__name__} vs {row_type.__name__}")
    header = csv_header(row_type)

    def emit(fh):
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for r in rows:
            out.writerow([_cell(getattr(r, name)) for name in header])

    if hasattr(path, "write"):
        emit(path)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            emit(fh)


def read_results_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
