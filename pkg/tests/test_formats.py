import json
import os
from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np
import scipy.io
import scipy.sparse as sp
from django.test import SimpleTestCase
from numpy.testing import assert_array_equal

from isvd.datagen import assemble_mass_matrix, build_mesh
from isvd.exceptions import (
    DimensionMismatch,
    FactorStoreError,
    NonFiniteError,
    StreamFormatError,
    WeightMatrixError,
)
from isvd.factors import CoreSVD
from isvd.formats import (
    MANIFEST_FILE,
    ColumnStreamHeader,
    RunReport,
    load_factors,
    read_column_stream,
    read_report,
    read_weight_matrix,
    save_factors,
    write_column_stream,
    write_report,
    write_weight_matrix,
)
from isvd.isvd import run_isvd3
from isvd.linalg import WeightOperator

from .mocks import seeded, tolerances


class TempDirTestCase(SimpleTestCase):

    def setUp(self):
        super().setUp()
        tempdir = TemporaryDirectory()
        self.addCleanup(tempdir.cleanup)
        self.tempdir = Path(tempdir.name)


class TestColumnStream(TempDirTestCase):

    def test_round_trip_is_bitwise(self):
        rng = seeded()
        columns = rng.standard_normal((3, 4))
        path = self.tempdir / "u.isvd"
        self.assertEqual(3, write_column_stream(path, 4, columns))
        with read_column_stream(path) as stream:
            self.assertEqual(ColumnStreamHeader(m=4, n=3), stream.header)
            read = stream.read_all()
        assert_array_equal(columns.T, read)
        assert_array_equal(columns.T.view(np.int64), read.view(np.int64))

    def test_file_size(self):
        path = self.tempdir / "u.isvd"
        write_column_stream(path, 5, np.ones((2, 5)))
        self.assertEqual(24 + 2 * 5 * 8, os.path.getsize(path))

    def test_generator_input(self):
        path = self.tempdir / "u.isvd"
        count = write_column_stream(path, 2, (np.full(2, t) for t in range(7)))
        self.assertEqual(7, count)
        with read_column_stream(path, m=2) as stream:
            self.assertEqual(7, stream.header.n)
            self.assertEqual(7, len(list(stream)))

    def test_unknown_length_reads_to_end(self):
        path = self.tempdir / "u.isvd"
        with open(path, "wb") as file:
            file.write(ColumnStreamHeader(m=4).to_bytes())
            for index in range(5):
                file.write(np.full(4, index, dtype="<f8").tobytes())
        with read_column_stream(path) as stream:
            self.assertEqual(0, stream.header.n)
            matrix = stream.read_all()
        self.assertEqual((4, 5), matrix.shape)
        assert_array_equal([0.0, 1.0, 2.0, 3.0, 4.0], matrix[0])

    def test_truncated_column(self):
        path = self.tempdir / "u.isvd"
        write_column_stream(path, 4, np.ones((3, 4)))
        with open(path, "r+b") as file:
            file.truncate(os.path.getsize(path) - 8)
        with read_column_stream(path) as stream:
            with self.assertRaisesRegex(StreamFormatError, "column 2"):
                list(stream)

    def test_bad_magic(self):
        path = self.tempdir / "u.isvd"
        path.write_bytes(b"NOPE" + bytes(20))
        with self.assertRaises(StreamFormatError):
            read_column_stream(path)

    def test_truncated_header(self):
        path = self.tempdir / "u.isvd"
        path.write_bytes(b"ISVD")
        with self.assertRaises(StreamFormatError):
            read_column_stream(path)

    def test_unsupported_version(self):
        path = self.tempdir / "u.isvd"
        path.write_bytes(ColumnStreamHeader(m=2, version=9).to_bytes())
        with self.assertRaisesRegex(StreamFormatError, "version"):
            read_column_stream(path)

    def test_length_mismatch(self):
        path = self.tempdir / "u.isvd"
        write_column_stream(path, 4, np.ones((1, 4)))
        with self.assertRaises(DimensionMismatch):
            read_column_stream(path, m=5)

    def test_write_rejects_bad_columns(self):
        path = self.tempdir / "u.isvd"
        with self.assertRaises(NonFiniteError):
            write_column_stream(path, 2, [[1.0, np.nan]])
        with self.assertRaises(DimensionMismatch):
            write_column_stream(path, 2, [[1.0, 2.0, 3.0]])

    def test_failed_write_leaves_no_file(self):
        path = self.tempdir / "u.isvd"
        columns = [np.ones(2), np.ones(2), [1.0, np.nan]]
        with self.assertRaises(NonFiniteError):
            write_column_stream(path, 2, columns)
        self.assertFalse(path.exists())

    def test_interrupted_generator_leaves_no_file(self):
        def columns():
            yield np.ones(3)
            raise RuntimeError("source went away")

        path = self.tempdir / "u.isvd"
        with self.assertRaisesRegex(RuntimeError, "source went away"):
            write_column_stream(path, 3, columns())
        self.assertFalse(path.exists())


class TestWeightMatrix(TempDirTestCase):

    def test_identity(self):
        path = self.tempdir / "w.mtx"
        write_weight_matrix(path, WeightOperator.identity(6))
        weight = read_weight_matrix(path)
        self.assertTrue(weight.is_identity)
        self.assertEqual(6, weight.dimension)

    def test_mass_matrix_round_trip(self):
        mass = assemble_mass_matrix(build_mesh(4))
        path = self.tempdir / "w.mtx"
        write_weight_matrix(path, mass)
        weight = read_weight_matrix(path)
        self.assertEqual("sparse-SPD", weight.kind)
        assert_array_equal(mass.to_dense(), weight.to_dense())

    def test_asymmetric(self):
        path = self.tempdir / "w.mtx"
        scipy.io.mmwrite(str(path), sp.coo_matrix([[2.0, 1.0], [0.0, 2.0]]))
        with self.assertRaisesRegex(WeightMatrixError, "symmetric"):
            read_weight_matrix(path)

    def test_nonsquare(self):
        path = self.tempdir / "w.mtx"
        scipy.io.mmwrite(str(path), sp.coo_matrix(np.ones((2, 3))))
        with self.assertRaises(WeightMatrixError):
            read_weight_matrix(path)

    def test_missing_file(self):
        with self.assertRaises(WeightMatrixError):
            read_weight_matrix(self.tempdir / "nope.mtx")


class TestFactors(TempDirTestCase):

    def setUp(self):
        super().setUp()
        rng = seeded()
        U = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 9))
        self.core = run_isvd3(U.T, WeightOperator.identity(6), tolerances())

    def test_round_trip_is_bitwise(self):
        save_factors(self.tempdir, self.core, 1e-12)
        core, manifest = load_factors(self.tempdir)
        self.assertEqual({"m": 6, "n": 9, "k": 3, "tol": 1e-12}, manifest)
        assert_array_equal(self.core.Q, core.Q)
        assert_array_equal(self.core.sigma, core.sigma)
        assert_array_equal(self.core.R, core.R)
        self.assertEqual(9, core.columns_seen)

    def test_inconsistent_manifest(self):
        save_factors(self.tempdir, self.core, 1e-12)
        manifest_path = self.tempdir / MANIFEST_FILE
        manifest = json.loads(manifest_path.read_text())
        manifest["k"] = 4
        manifest_path.write_text(json.dumps(manifest))
        with self.assertRaises(FactorStoreError):
            load_factors(self.tempdir)

    def test_missing_factor(self):
        save_factors(self.tempdir, self.core, 1e-12)
        (self.tempdir / "R.isvd").unlink()
        with self.assertRaisesRegex(FactorStoreError, "missing"):
            load_factors(self.tempdir)

    def test_missing_manifest(self):
        with self.assertRaises(FactorStoreError):
            load_factors(self.tempdir)

    def test_saved_core_shapes(self):
        core = CoreSVD(
            Q=np.eye(3)[:, :1],
            sigma=np.array([2.0]),
            R=np.ones((1, 1)),
            columns_seen=1,
        )
        save_factors(self.tempdir, core, 1e-12)
        loaded, _ = load_factors(self.tempdir)
        self.assertEqual((3, 1), loaded.Q.shape)
        self.assertEqual((1, 1), loaded.R.shape)


class TestRunReport(TempDirTestCase):

    def make_report(self):
        return RunReport(
            algorithm="isvd3",
            tol=1e-12,
            m=289,
            n=1001,
            rank=3,
            singular_values=[2.5, 0.1 + 0.2, 1e-11],
            orthogonality=[[11, 1.5e-15], [1001, 2.25e-15]],
            wall_time=0.125,
            branches={
                "buffered": 997,
                "rank-grew": 3,
                "rank-held": 0,
                "sv-truncated": 0,
            },
            reorth_fired=1,
        )

    def test_json_round_trip(self):
        path = self.tempdir / "report.json"
        write_report(path, self.make_report())
        self.assertEqual(self.make_report(), read_report(path))
        self.assertEqual("isvd3", json.loads(path.read_text())["algorithm"])

    def test_csv_round_trip(self):
        path = self.tempdir / "report.csv"
        write_report(path, self.make_report())
        self.assertEqual(self.make_report(), read_report(path))
        self.assertIn("sigma,1,0.30000000000000004", path.read_text())

    def test_explicit_format(self):
        path = self.tempdir / "report.out"
        write_report(path, self.make_report(), format="csv")
        self.assertEqual(self.make_report(), read_report(path, format="csv"))

    def test_invalid_format(self):
        with self.assertRaises(ValueError):
            write_report(self.tempdir / "r.xml", self.make_report())

    def test_non_finite_values_are_rejected(self):
        report = self.make_report()
        report.singular_values.append(float("nan"))
        with self.assertRaises(NonFiniteError):
            write_report(self.tempdir / "r.json", report)

    def test_stopped_run_round_trip(self):
        report = self.make_report()
        report.stopped = "RankLimitExceeded: rank 3 exceeds the cap, min(m=2)"
        for name in ("report.json", "report.csv"):
            with self.subTest(format=name):
                path = self.tempdir / name
                write_report(path, report)
                self.assertEqual(report, read_report(path))
