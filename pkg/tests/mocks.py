from contextlib import contextmanager
from functools import lru_cache
from unittest.mock import patch

import numpy as np

from isvd.datagen import (
    SnapshotConfig,
    assemble_mass_matrix,
    build_mesh,
    snapshot_matrix,
)
from isvd.factors import ToleranceConfig
from isvd.linalg import svd_full, svd_thin_wide
from isvd.verify import principal_angles


def seeded(seed=0):
    return np.random.default_rng(seed)


def random_orthonormal(rng, m, k):
    Q, _ = np.linalg.qr(rng.standard_normal((m, k)))
    return Q


def tolerances(tol=1e-12, tol_orth=1e-10, max_rank=2000):
    return ToleranceConfig(tol=tol, tol_orth=tol_orth, max_rank=max_rank)


@lru_cache(maxsize=None)
def mesh16_load_vectors():
    """Load vectors of cos(t(x+y)) on the 512 triangle mesh, t = 0, 0.01,
    ..., 10: ``(mesh, mass, B)`` with ``B`` of shape 289 x 1001.
    """
    mesh = build_mesh(16)
    mass = assemble_mass_matrix(mesh)
    snapshots = SnapshotConfig(t_end=10.0, dt=0.01, kind="B")
    matrix = snapshot_matrix(mesh, snapshots, mass)
    matrix.setflags(write=False)
    return mesh, mass, matrix


@lru_cache(maxsize=None)
def mesh16_nodal_values():
    """Nodal values of cos(t(x+y)) on the same mesh and times as
    ``mesh16_load_vectors()``: ``(mesh, mass, U)``.
    """
    mesh = build_mesh(16)
    mass = assemble_mass_matrix(mesh)
    matrix = snapshot_matrix(mesh, SnapshotConfig(t_end=10.0, dt=0.01))
    matrix.setflags(write=False)
    return mesh, mass, matrix


@contextmanager
def svd_call_counter():
    """Counts the small SVDs computed by the update functions. Yields a
    callable returning the number of calls so far.
    """
    with patch("isvd.isvd.svd_full", wraps=svd_full) as full:
        with patch("isvd.isvd.svd_thin_wide", wraps=svd_thin_wide) as wide:
            yield lambda: full.call_count + wide.call_count


class SubspaceAssertions:
    """Mixin for ``SimpleTestCase`` classes comparing factors up to sign."""

    def assertSameSubspace(self, Q1, Q2, weight, tol=1e-8):
        self.assertEqual(Q1.shape, Q2.shape)
        angles = principal_angles(Q1, Q2, weight)
        self.assertLessEqual(angles.max(initial=0.0), tol)
