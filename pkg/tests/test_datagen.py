import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from isvd.datagen import (
    GeneratorSpec,
    SnapshotConfig,
    assemble_mass_matrix,
    build_mesh,
    decaying_spectrum_matrix,
    load_column,
    random_low_rank_matrix,
    snapshot_column,
    snapshot_matrix,
    snapshot_stream,
)
from isvd.exceptions import DegenerateMeshError
from isvd.linalg import WeightOperator
from isvd.verify import dense_svd_oracle

from .mocks import mesh16_load_vectors, seeded


class TestBuildMesh(SimpleTestCase):

    def test_single_cell(self):
        mesh = build_mesh(1)
        self.assertEqual(4, mesh.vertex_count)
        self.assertEqual(2, mesh.triangle_count)
        assert_array_equal(
            [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], mesh.vertices
        )
        assert_array_equal([0.5, 0.5], mesh.areas())

    def test_example_mesh(self):
        mesh = build_mesh(16)
        self.assertEqual(289, mesh.vertex_count)
        self.assertEqual(512, mesh.triangle_count)

    def test_areas_cover_the_square(self):
        for n in (1, 3, 8):
            with self.subTest(n=n):
                mesh = build_mesh(n)
                self.assertAlmostEqual(1.0, mesh.areas().sum(), delta=1e-14)
                self.assertTrue(np.all(mesh.areas() > 0))

    def test_large_mesh(self):
        mesh = build_mesh(512)
        self.assertEqual(513 ** 2, mesh.vertex_count)
        self.assertEqual(524288, mesh.triangle_count)

    def test_invalid_sizes(self):
        for n in (0, -3, 1.5, "4", True):
            with self.subTest(n=n):
                with self.assertRaises(DegenerateMeshError):
                    build_mesh(n)


class TestMassMatrix(SimpleTestCase):

    def test_single_cell(self):
        mass = assemble_mass_matrix(build_mesh(1))
        self.assertEqual("sparse-SPD", mass.kind)
        matrix = mass.to_dense()
        assert_allclose(matrix, matrix.T, rtol=0, atol=1e-18)
        assert_allclose(
            [1 / 3, 1 / 6, 1 / 6, 1 / 3], matrix.sum(axis=1), rtol=1e-15
        )
        self.assertTrue(np.all(np.linalg.eigvalsh(matrix) > 0))

    def test_total_mass(self):
        for n in (1, 4, 16):
            with self.subTest(n=n):
                mass = assemble_mass_matrix(build_mesh(n))
                self.assertAlmostEqual(1.0, mass.matrix.sum(), delta=1e-13)

    def test_cholesky(self):
        mass = assemble_mass_matrix(build_mesh(16))
        L = mass.cholesky()
        assert_allclose(mass.to_dense(), L @ L.T, atol=1e-16)

    def test_random_samples(self):
        rng = seeded()
        mass = assemble_mass_matrix(build_mesh(8))
        self.assertLessEqual(mass.symmetry_defect(rng), 1e-15)
        self.assertTrue(mass.is_positive_on_samples(rng))


class TestSnapshots(SimpleTestCase):

    def test_column_count(self):
        self.assertEqual(1001, SnapshotConfig(t_end=10.0, dt=0.01).column_count)
        self.assertEqual(10001, SnapshotConfig().column_count)
        self.assertEqual(2, SnapshotConfig(t_end=10.0, dt=10.0).column_count)
        self.assertEqual(1, SnapshotConfig(t_end=0.0, dt=0.5).column_count)

    def test_invalid_config(self):
        for values in ({"dt": 0.0}, {"dt": -1.0}, {"t_end": -1.0},
                       {"dt": float("nan")}, {"kind": "X"}):
            with self.subTest(**values):
                with self.assertRaises(ValueError):
                    SnapshotConfig(**values)

    def test_snapshot_column(self):
        mesh = build_mesh(1)
        assert_array_equal(np.ones(4), snapshot_column(0.0, mesh))
        assert_allclose(
            [1.0, -1.0, -1.0, 1.0], snapshot_column(np.pi, mesh), atol=1e-15
        )

    def test_load_column(self):
        mesh = build_mesh(4)
        mass = assemble_mass_matrix(mesh)
        load = load_column(0.0, mesh, mass)
        self.assertAlmostEqual(1.0, load.sum(), delta=1e-14)
        self.assertTrue(np.all(load > 0))

    def test_stream_is_lazy_and_matches_matrix(self):
        mesh = build_mesh(4)
        config = SnapshotConfig(t_end=1.0, dt=0.25, kind="B")
        stream = snapshot_stream(mesh, config)
        first = next(stream)
        matrix = snapshot_matrix(mesh, config)
        self.assertEqual((25, 5), matrix.shape)
        assert_array_equal(matrix[:, 0], first)

    def test_nodal_values_are_bounded(self):
        matrix = snapshot_matrix(build_mesh(4), SnapshotConfig(dt=0.5))
        self.assertLessEqual(np.abs(matrix).max(), 1.0)

    def test_example_is_deterministic(self):
        _, mass, B = mesh16_load_vectors()
        again = snapshot_matrix(
            build_mesh(16), SnapshotConfig(t_end=10.0, dt=0.01, kind="B"), mass
        )
        self.assertEqual((289, 1001), B.shape)
        assert_array_equal(B, again)

    def test_example_is_low_rank(self):
        _, _, B = mesh16_load_vectors()
        oracle = dense_svd_oracle(B, WeightOperator.identity(289))
        # x + y takes 33 distinct values on the mesh
        self.assertLessEqual(oracle.rank, 33)
        self.assertGreaterEqual(oracle.rank, 10)


class TestRandomMatrices(SimpleTestCase):

    def test_random_low_rank(self):
        U = random_low_rank_matrix(seeded(), 20, 30, 4)
        self.assertEqual((20, 30), U.shape)
        self.assertEqual(4, np.linalg.matrix_rank(U))

    def test_random_low_rank_noise(self):
        U = random_low_rank_matrix(seeded(), 20, 30, 4, noise=1e-3)
        self.assertEqual(20, np.linalg.matrix_rank(U))

    def test_decaying_spectrum(self):
        sigma = 10.0 ** -np.arange(1, 6)
        U = decaying_spectrum_matrix(seeded(), 30, 40, sigma)
        assert_allclose(
            sigma, np.linalg.svd(U, compute_uv=False)[:5], rtol=1e-10
        )


class TestGeneratorSpec(SimpleTestCase):

    def test_defaults(self):
        spec = GeneratorSpec.parse("gen:mesh16,dt0.01")
        self.assertEqual(16, spec.mesh_n)
        self.assertEqual(SnapshotConfig(t_end=10.0, dt=0.01), spec.snapshots)

    def test_all_fields(self):
        spec = GeneratorSpec.parse("gen:mesh4,dt0.5,t2,kindB")
        self.assertEqual(4, spec.mesh_n)
        self.assertEqual(
            SnapshotConfig(t_end=2.0, dt=0.5, kind="B"), spec.snapshots
        )
        self.assertEqual(25, spec.mesh().vertex_count)

    def test_invalid(self):
        for text in ("mesh4", "gen:dt0.1", "gen:foo3", "gen:meshX",
                     "gen:mesh4,dt0"):
            with self.subTest(text=text):
                with self.assertRaises(ValueError):
                    GeneratorSpec.parse(text)
