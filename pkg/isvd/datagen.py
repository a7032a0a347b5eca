"""Snapshot data of ``f(t, x, y) = cos(t (x + y))`` on uniform triangulations
of the unit square, and the P1 mass matrices that weight them.
"""
import math
import re
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import DegenerateMeshError
from .linalg import WeightOperator

__all__ = [
    "GeneratorSpec",
    "SnapshotConfig",
    "StructuredMesh",
    "assemble_mass_matrix",
    "build_mesh",
    "decaying_spectrum_matrix",
    "load_column",
    "random_low_rank_matrix",
    "snapshot_column",
    "snapshot_matrix",
    "snapshot_stream",
]

KIND_NODAL = "U"
KIND_LOAD = "B"

# P1 element mass matrix of a triangle with unit area
_P1_MASS = np.array([
    [2.0, 1.0, 1.0],
    [1.0, 2.0, 1.0],
    [1.0, 1.0, 2.0],
]) / 12.0


@dataclass(frozen=True)
class StructuredMesh:
    """Uniform triangulation of ``[0, 1]^2`` with ``n`` cells per side.

    Vertices are numbered row by row (``x`` fastest) and every cell is split
    along its lower-left to upper-right diagonal.
    """

    n: int
    vertices: np.ndarray
    triangles: np.ndarray

    @property
    def vertex_count(self):
        return self.vertices.shape[0]

    @property
    def triangle_count(self):
        return self.triangles.shape[0]

    def areas(self):
        corners = self.vertices[self.triangles]
        first = corners[:, 1] - corners[:, 0]
        second = corners[:, 2] - corners[:, 0]
        return 0.5 * np.abs(
            first[:, 0] * second[:, 1] - first[:, 1] * second[:, 0]
        )


def build_mesh(n):
    """:raises: ``DegenerateMeshError`` unless ``n`` is a positive integer."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DegenerateMeshError(f"mesh size must be a positive int: {n!r}")
    n = int(n)
    ticks = np.linspace(0.0, 1.0, n + 1)
    x, y = np.meshgrid(ticks, ticks)
    vertices = np.column_stack((x.ravel(), y.ravel()))

    rows, columns = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    v00 = (rows * (n + 1) + columns).ravel()
    v10 = v00 + 1
    v01 = v00 + n + 1
    v11 = v01 + 1
    triangles = np.concatenate((
        np.column_stack((v00, v10, v11)),
        np.column_stack((v00, v11, v01)),
    ))
    return StructuredMesh(n=n, vertices=vertices, triangles=triangles)


def assemble_mass_matrix(mesh):
    """Assembles the P1 mass matrix ``M_ij = (phi_i, phi_j)``.

    :returns: a sparse ``WeightOperator``
    :raises: ``DegenerateMeshError`` for zero-area triangles.
    """
    areas = mesh.areas()
    if np.any(areas <= 0):
        bad = int(np.flatnonzero(areas <= 0)[0])
        raise DegenerateMeshError(f"triangle {bad} has zero area")
    local = areas[:, np.newaxis, np.newaxis] * _P1_MASS
    rows = np.repeat(mesh.triangles[:, :, np.newaxis], 3, axis=2)
    columns = np.repeat(mesh.triangles[:, np.newaxis, :], 3, axis=1)
    size = mesh.vertex_count
    # duplicate (row, column) pairs are summed by the conversion
    matrix = sp.coo_matrix(
        (local.ravel(), (rows.ravel(), columns.ravel())),
        shape=(size, size),
    ).tocsr()
    return WeightOperator.sparse(matrix)


@dataclass(frozen=True)
class SnapshotConfig:
    """Snapshot times ``0, dt, 2 dt, ... <= t_end``.

    ``kind`` selects nodal values (``"U"``) or load vectors ``M u``
    (``"B"``).
    """

    t_end: float = 10.0
    dt: float = 1e-3
    kind: str = KIND_NODAL

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError(f"t_end must be nonnegative, got {self.t_end!r}")
        if self.kind not in (KIND_NODAL, KIND_LOAD):
            raise ValueError(f"invalid snapshot kind: {self.kind!r}")

    @property
    def column_count(self):
        # the slack keeps t_end itself when t_end / dt rounds just below
        return math.floor(self.t_end / self.dt + 1e-9) + 1

    def times(self):
        return self.dt * np.arange(self.column_count)


def snapshot_column(t, mesh):
    """Nodal values ``cos(t (x_i + y_i))`` of the P1 interpolant."""
    x = mesh.vertices[:, 0]
    y = mesh.vertices[:, 1]
    return np.cos(t * (x + y))


def load_column(t, mesh, mass):
    """Load vector ``M u(t)``, ``f`` being replaced by its interpolant."""
    return mass.apply(snapshot_column(t, mesh))


def snapshot_stream(mesh, config, mass=None):
    """Yields the snapshot columns lazily."""
    if config.kind == KIND_LOAD and mass is None:
        mass = assemble_mass_matrix(mesh)
    for t in config.times():
        if config.kind == KIND_LOAD:
            yield load_column(t, mesh, mass)
        else:
            yield snapshot_column(t, mesh)


def snapshot_matrix(mesh, config, mass=None):
    return np.column_stack(list(snapshot_stream(mesh, config, mass)))


def random_low_rank_matrix(rng, m, n, rank, noise=0.0):
    """Returns an ``m x n`` Gaussian product of exact rank ``rank`` (with
    probability one), optionally with additive noise of scale ``noise``.
    """
    matrix = rng.standard_normal((m, rank)) @ rng.standard_normal((rank, n))
    if noise:
        matrix += noise * rng.standard_normal((m, n))
    return matrix


def decaying_spectrum_matrix(rng, m, n, sigma):
    """Returns ``Q1 diag(sigma) Q2^T`` with random orthonormal factors."""
    sigma = np.asarray(sigma, dtype=float)
    k = sigma.shape[0]
    left, _ = np.linalg.qr(rng.standard_normal((m, k)))
    right, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return (left * sigma) @ right.T


_GEN_FIELD = re.compile(r"^(mesh|dt|t|kind)(.+)$")


@dataclass(frozen=True)
class GeneratorSpec:
    """Parsed ``gen:`` input specification, e.g.
    ``gen:mesh16,dt0.01,t10,kindB``. Omitted fields take the snapshot
    defaults.
    """

    mesh_n: int
    snapshots: SnapshotConfig

    @classmethod
    def parse(cls, text):
        """:raises: ``ValueError`` for malformed specifications."""
        if not text.startswith("gen:"):
            raise ValueError(f"not a generator spec: {text!r}")
        values = {}
        for item in filter(None, text[4:].split(",")):
            match = _GEN_FIELD.match(item.strip())
            if match is None:
                raise ValueError(f"invalid generator field: {item!r}")
            values[match.group(1)] = match.group(2)
        if "mesh" not in values:
            raise ValueError(f"generator spec needs a mesh size: {text!r}")
        try:
            mesh_n = int(values["mesh"])
            snapshots = SnapshotConfig(
                t_end=float(values.get("t", SnapshotConfig.t_end)),
                dt=float(values.get("dt", SnapshotConfig.dt)),
                kind=values.get("kind", KIND_NODAL),
            )
        except ValueError as exc:
            raise ValueError(f"invalid generator spec {text!r}: {exc}")
        return cls(mesh_n=mesh_n, snapshots=snapshots)

    def mesh(self):
        return build_mesh(self.mesh_n)
