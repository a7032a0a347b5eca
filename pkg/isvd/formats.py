"""On-disk formats: column streams, weight matrices, saved factors and run
reports.

A column stream is a 24 byte little-endian header (magic ``ISVD``, version,
``m``, ``n``) followed by ``n`` columns of ``m`` little-endian float64
values. ``n = 0`` marks a stream of unknown length that runs to end of file.
"""
import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp
from django.core.serializers.json import DjangoJSONEncoder

from .const import STREAM_MAGIC, STREAM_VERSION
from .exceptions import (
    DimensionMismatch,
    FactorStoreError,
    NonFiniteError,
    StreamFormatError,
    WeightMatrixError,
)
from .factors import BRANCHES, CoreSVD
from .linalg import WeightOperator

log = logging.getLogger(__name__)

__all__ = [
    "ColumnStream",
    "ColumnStreamHeader",
    "RunReport",
    "load_factors",
    "read_column_stream",
    "read_report",
    "read_weight_matrix",
    "save_factors",
    "write_column_stream",
    "write_report",
    "write_weight_matrix",
]

HEADER_DTYPE = np.dtype([
    ("magic", "S4"),
    ("version", "<u4"),
    ("m", "<u8"),
    ("n", "<u8"),
])
COLUMN_DTYPE = np.dtype("<f8")

FACTOR_FILES = {"Q": "Q.isvd", "R": "R.isvd", "sigma": "sigma.isvd"}
MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class ColumnStreamHeader:

    m: int
    n: int = 0
    version: int = STREAM_VERSION

    def to_bytes(self):
        record = np.array(
            [(STREAM_MAGIC, self.version, self.m, self.n)],
            dtype=HEADER_DTYPE,
        )
        return record.tobytes()

    @classmethod
    def from_bytes(cls, raw):
        """:raises: ``StreamFormatError``"""
        if len(raw) != HEADER_DTYPE.itemsize:
            raise StreamFormatError(
                f"truncated header ({len(raw)} of {HEADER_DTYPE.itemsize} "
                "bytes)"
            )
        record = np.frombuffer(raw, dtype=HEADER_DTYPE)[0]
        if bytes(record["magic"]) != STREAM_MAGIC:
            raise StreamFormatError(f"bad magic: {bytes(record['magic'])!r}")
        if int(record["version"]) != STREAM_VERSION:
            raise StreamFormatError(
                f"unsupported stream version: {int(record['version'])}"
            )
        if int(record["m"]) < 1:
            raise StreamFormatError("stream header has m = 0")
        return cls(
            m=int(record["m"]),
            n=int(record["n"]),
            version=int(record["version"]),
        )


def write_column_stream(path, m, columns):
    """Writes ``columns`` (an iterable of length-``m`` vectors) to ``path``.

    The header is first written with ``n = 0`` and rewritten with the final
    count, so ``columns`` may be a generator. If writing fails part way, the
    partial file is removed.

    :returns: the number of columns written.
    :raises: ``DimensionMismatch``, ``NonFiniteError``
    """
    path = Path(path)
    count = 0
    with open(path, "wb") as stream:
        try:
            stream.write(ColumnStreamHeader(m=m).to_bytes())
            for column in columns:
                values = np.asarray(column, dtype=COLUMN_DTYPE)
                if values.shape != (m,):
                    raise DimensionMismatch(
                        f"column {count} has shape {values.shape}, expected "
                        f"({m},)"
                    )
                if not np.all(np.isfinite(values)):
                    raise NonFiniteError(
                        f"column {count} has non-finite entries"
                    )
                stream.write(values.tobytes())
                count += 1
            stream.seek(0)
            stream.write(ColumnStreamHeader(m=m, n=count).to_bytes())
        except BaseException:
            stream.close()
            path.unlink(missing_ok=True)
            raise
    log.debug(f"wrote {count} columns of length {m} to {path}")
    return count


class ColumnStream:
    """Lazy reader of a column stream file. Iterating yields one column at a
    time; use as a context manager (or call ``close()``) to release the file.
    """

    def __init__(self, path, m=None):
        self.path = Path(path)
        self._file = open(self.path, "rb")
        try:
            self.header = ColumnStreamHeader.from_bytes(
                self._file.read(HEADER_DTYPE.itemsize)
            )
            if m is not None and self.header.m != m:
                raise DimensionMismatch(
                    f"{self.path} has columns of length {self.header.m}, "
                    f"expected {m}"
                )
        except Exception:
            self._file.close()
            raise

    @property
    def m(self):
        return self.header.m

    def __iter__(self):
        width = self.header.m * COLUMN_DTYPE.itemsize
        index = 0
        while not self.header.n or index < self.header.n:
            raw = self._file.read(width)
            if not raw and not self.header.n:
                break
            if len(raw) != width:
                raise StreamFormatError(
                    f"{self.path}: column {index} is truncated "
                    f"({len(raw)} of {width} bytes)"
                )
            yield np.frombuffer(raw, dtype=COLUMN_DTYPE).astype(float)
            index += 1

    def read_all(self):
        """Returns the remaining columns as an ``m x n`` matrix."""
        columns = list(self)
        if not columns:
            return np.empty((self.header.m, 0))
        return np.column_stack(columns)

    def close(self):
        self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def read_column_stream(path, m=None):
    """Opens a column stream.

    :param m: expected column length, checked against the header.
    :raises: ``StreamFormatError``, ``DimensionMismatch``
    """
    return ColumnStream(path, m)


def read_weight_matrix(path):
    """Reads an SPD weight matrix in Matrix Market format.

    An exact identity is returned as the identity operator.

    :raises: ``WeightMatrixError``
    """
    try:
        matrix = scipy.io.mmread(str(path))
    except (OSError, ValueError) as exc:
        raise WeightMatrixError(f"cannot read {path}: {exc}") from exc
    matrix = sp.csr_matrix(matrix, dtype=float)
    rows, columns = matrix.shape
    if rows != columns:
        raise WeightMatrixError(f"{path}: weight matrix is {rows}x{columns}")
    if not np.all(np.isfinite(matrix.data)):
        raise WeightMatrixError(f"{path}: weight has non-finite entries")
    scale = abs(matrix).max() if matrix.nnz else 0.0
    asymmetry = abs(matrix - matrix.T).max() if matrix.nnz else 0.0
    if asymmetry > 1e-12 * max(scale, 1.0):
        raise WeightMatrixError(f"{path}: weight is not symmetric")
    if (matrix - sp.identity(rows, format="csr")).count_nonzero() == 0:
        return WeightOperator.identity(rows)
    return WeightOperator.sparse(matrix)


def write_weight_matrix(path, weight):
    """Writes ``weight`` in symmetric Matrix Market coordinate format with
    round-trip precision.
    """
    if weight.is_identity:
        matrix = sp.identity(weight.dimension, format="coo")
    else:
        # the symmetric format stores the lower triangle only
        matrix = sp.tril(weight.matrix, format="coo")
    scipy.io.mmwrite(str(path), matrix, symmetry="symmetric", precision=17)


def save_factors(directory, core, tol):
    """Saves ``core`` as three column streams plus ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_column_stream(directory / FACTOR_FILES["Q"], core.m, core.Q.T)
    write_column_stream(
        directory / FACTOR_FILES["R"], core.columns_seen, core.R.T
    )
    write_column_stream(
        directory / FACTOR_FILES["sigma"], core.rank, [core.sigma]
    )
    manifest = {
        "m": core.m,
        "n": core.columns_seen,
        "k": core.rank,
        "tol": tol,
    }
    with open(directory / MANIFEST_FILE, "w") as stream:
        json.dump(manifest, stream, indent=2)


def _read_factor(directory, name, rows, columns):
    path = directory / FACTOR_FILES[name]
    if not path.exists():
        raise FactorStoreError(f"missing factor file: {path}")
    try:
        with read_column_stream(path, rows) as stream:
            matrix = stream.read_all()
    except (StreamFormatError, DimensionMismatch) as exc:
        raise FactorStoreError(f"{path}: {exc}") from exc
    if matrix.shape != (rows, columns):
        raise FactorStoreError(
            f"{path}: expected {rows}x{columns}, found {matrix.shape}"
        )
    return matrix


def load_factors(directory):
    """Loads factors written by ``save_factors()``.

    :returns: ``(CoreSVD, manifest)``
    :raises: ``FactorStoreError``
    """
    directory = Path(directory)
    try:
        with open(directory / MANIFEST_FILE) as stream:
            manifest = json.load(stream)
        m, n, k = manifest["m"], manifest["n"], manifest["k"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise FactorStoreError(
            f"unreadable manifest in {directory}: {exc}"
        ) from exc
    core = CoreSVD(
        Q=_read_factor(directory, "Q", m, k),
        sigma=_read_factor(directory, "sigma", k, 1)[:, 0],
        R=_read_factor(directory, "R", n, k),
        columns_seen=n,
    )
    return core, manifest


def _branch_counts():
    return {branch: 0 for branch in BRANCHES}


@dataclass
class RunReport:
    """Summary of one incremental run.

    ``orthogonality`` holds ``[column_index, E_W]`` samples. ``branches``
    counts the update branches taken (they sum to ``n - 1``) and
    ``reorth_fired`` the updates that reorthogonalized. ``stopped`` holds the
    error that ended a partial run (empty for complete runs).
    """

    algorithm: str
    tol: float
    m: int
    n: int
    rank: int
    singular_values: list = field(default_factory=list)
    orthogonality: list = field(default_factory=list)
    wall_time: float = 0.0
    branches: dict = field(default_factory=_branch_counts)
    reorth_fired: int = 0
    interlacing_checked: int = 0
    interlacing_failures: int = 0
    stopped: str = ""

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def check_finite(self):
        """:raises: ``NonFiniteError`` if any reported value is NaN or Inf."""
        values = [self.tol, self.wall_time, *self.singular_values]
        values.extend(value for _, value in self.orthogonality)
        if not all(math.isfinite(value) for value in values):
            raise NonFiniteError("report contains non-finite values")


def _report_format(path, format):
    if format is None:
        format = Path(path).suffix.lstrip(".").lower() or "json"
    if format not in ("json", "csv"):
        raise ValueError(f"invalid report format: {format!r}")
    return format


def write_report(path, report, format=None):
    """Writes ``report`` as JSON or as ``section,key,value`` CSV rows.

    :param format: ``"json"`` or ``"csv"``; taken from the file extension by
        default.
    """
    format = _report_format(path, format)
    report.check_finite()
    with open(path, "w", newline="") as stream:
        if format == "json":
            json.dump(
                report.to_dict(),
                stream,
                cls=DjangoJSONEncoder,
                allow_nan=False,
                indent=2,
            )
            stream.write("\n")
            return
        writer = csv.writer(stream)
        writer.writerow(["section", "key", "value"])
        for key in _RUN_FIELDS:
            value = getattr(report, key)
            if isinstance(value, float):
                value = format_float(value)
            writer.writerow(["run", key, value])
        for index, value in enumerate(report.singular_values):
            writer.writerow(["sigma", index, format_float(value)])
        for index, value in report.orthogonality:
            writer.writerow(["orthogonality", index, format_float(value)])
        for branch, count in report.branches.items():
            writer.writerow(["branches", branch, count])


def format_float(value):
    # 17 significant digits round-trip every double
    return f"{value:.17g}"


_RUN_FIELDS = {
    "algorithm": str,
    "tol": float,
    "m": int,
    "n": int,
    "rank": int,
    "wall_time": float,
    "reorth_fired": int,
    "interlacing_checked": int,
    "interlacing_failures": int,
    "stopped": str,
}


def read_report(path, format=None):
    format = _report_format(path, format)
    with open(path, newline="") as stream:
        if format == "json":
            return RunReport.from_dict(json.load(stream))
        reader = csv.reader(stream)
        next(reader)
        run = {}
        report_sigma = []
        samples = []
        branches = _branch_counts()
        for section, key, value in reader:
            if section == "run":
                run[key] = _RUN_FIELDS[key](value)
            elif section == "sigma":
                report_sigma.append(float(value))
            elif section == "orthogonality":
                samples.append([int(key), float(value)])
            elif section == "branches":
                branches[key] = int(value)
    return RunReport(
        singular_values=report_sigma,
        orthogonality=samples,
        branches=branches,
        **run,
    )
