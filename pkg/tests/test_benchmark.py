import os
from unittest import skipUnless

from django.test import SimpleTestCase

from isvd.benchmark import (
    SECTION_FINISH,
    SECTION_INITIALIZE,
    SECTION_REORTHOGONALIZE,
    time_sections,
)
from isvd.datagen import (
    SnapshotConfig,
    assemble_mass_matrix,
    build_mesh,
    snapshot_stream,
)
from isvd.exceptions import EmptyStreamError, UnknownAlgorithm
from isvd.factors import BRANCH_BUFFERED, BRANCH_RANK_GREW
from isvd.linalg import WeightOperator

from .mocks import seeded, tolerances

TIMING = bool(os.environ.get("ISVD_TIMING_TESTS"))


def snapshot_times(algorithm, mesh_n, dt, mass=False):
    mesh = build_mesh(mesh_n)
    if mass:
        weight = assemble_mass_matrix(mesh)
    else:
        weight = WeightOperator.identity(mesh.vertex_count)
    return time_sections(
        algorithm,
        snapshot_stream(mesh, SnapshotConfig(t_end=10.0, dt=dt)),
        weight,
        tolerances(),
    )


def low_rank_columns(basis, n, seed=0):
    rng = seeded(seed)
    for _ in range(n):
        yield basis @ rng.standard_normal(basis.shape[1])


class TestTimeSections(SimpleTestCase):

    def test_sections(self):
        times = snapshot_times("isvd3", 4, 0.1)
        self.assertEqual(101, times.columns)
        self.assertGreater(times.rank, 1)
        self.assertTrue({
            SECTION_INITIALIZE,
            SECTION_REORTHOGONALIZE,
            SECTION_FINISH,
            BRANCH_BUFFERED,
            BRANCH_RANK_GREW,
        } <= set(times.sections))
        self.assertAlmostEqual(
            sum(times.sections.values()), times.total, delta=1e-12
        )

    def test_unknown_algorithm(self):
        with self.assertRaises(UnknownAlgorithm):
            time_sections("isvd9", [], WeightOperator.identity(2), tolerances())

    def test_empty_stream(self):
        with self.assertRaises(EmptyStreamError):
            time_sections("isvd1", [], WeightOperator.identity(2), tolerances())


@skipUnless(TIMING, "set ISVD_TIMING_TESTS=1 to run timing tests")
class TestTimingTrends(SimpleTestCase):

    def test_buffered_family_is_faster(self):
        direct = snapshot_times("isvd1", 64, 1e-2, mass=True)
        buffered = snapshot_times("isvd3", 64, 1e-2, mass=True)
        self.assertGreaterEqual(direct.total / buffered.total, 3.0)

    def test_time_is_linear_in_columns(self):
        basis = seeded().standard_normal((5000, 30))
        weight = WeightOperator.identity(5000)
        totals = [
            time_sections(
                "isvd3", low_rank_columns(basis, n), weight, tolerances()
            ).total
            for n in (1000, 2000)
        ]
        ratio = totals[1] / totals[0]
        self.assertGreaterEqual(ratio, 1.5)
        self.assertLessEqual(ratio, 3.0)

    def test_rank_events_are_rare(self):
        times = snapshot_times("isvd3", 16, 1e-3)
        self.assertLess(times.rank, 60)
        self.assertGreater(
            times.sections[BRANCH_BUFFERED], times.sections[SECTION_FINISH]
        )
