"""Resolution of the ``--input`` and ``--weight`` specifications shared by the
management commands.

Inputs are column stream files or ``gen:`` generator specs (see
``GeneratorSpec``). Weights are ``identity``, ``mass`` (the mass matrix of the
generated mesh, or the ``<stream>.mass.mtx`` file written next to a generated
stream) or ``file:<path>`` (a Matrix Market file).
"""
from pathlib import Path

from .datagen import (
    GeneratorSpec,
    assemble_mass_matrix,
    snapshot_matrix,
    snapshot_stream,
)
from .exceptions import DimensionMismatch, WeightMatrixError
from .formats import read_column_stream, read_weight_matrix
from .linalg import WeightOperator

MASS_SUFFIX = ".mass.mtx"


def mass_matrix_path(stream_path):
    """``out/b.isvd`` -> ``out/b.mass.mtx``"""
    stream_path = Path(stream_path)
    return stream_path.with_name(stream_path.stem + MASS_SUFFIX)


class InputSource:
    """A replayable column source: every call to ``columns()`` starts a new
    pass over the data.
    """

    def __init__(self, m, path=None, generator=None):
        self.m = m
        self.path = path
        self.generator = generator
        self._mesh = None

    @classmethod
    def from_spec(cls, spec):
        """:raises: ``ValueError`` for malformed generator specs, plus the
        errors of ``read_column_stream()``.
        """
        if spec.startswith("gen:"):
            generator = GeneratorSpec.parse(spec)
            return cls(m=(generator.mesh_n + 1) ** 2, generator=generator)
        with read_column_stream(spec) as stream:
            m = stream.m
        return cls(m=m, path=Path(spec))

    @property
    def mesh(self):
        if self.generator is None:
            return None
        if self._mesh is None:
            self._mesh = self.generator.mesh()
        return self._mesh

    def columns(self):
        if self.generator is not None:
            yield from snapshot_stream(self.mesh, self.generator.snapshots)
            return
        with read_column_stream(self.path, self.m) as stream:
            yield from stream

    def matrix(self):
        if self.generator is not None:
            return snapshot_matrix(self.mesh, self.generator.snapshots)
        with read_column_stream(self.path, self.m) as stream:
            return stream.read_all()

    def __str__(self):
        return str(self.path) if self.path is not None else "generator"


def resolve_weight(spec, source):
    """Returns the ``WeightOperator`` named by ``spec`` for ``source``.

    :raises: ``ValueError`` for unknown specs, ``WeightMatrixError`` when no
        mass matrix is available, ``DimensionMismatch`` if the weight does not
        match the input.
    """
    if spec == "identity":
        return WeightOperator.identity(source.m)
    if spec == "mass":
        if source.mesh is not None:
            weight = assemble_mass_matrix(source.mesh)
        elif source.path is not None and mass_matrix_path(source.path).exists():
            weight = read_weight_matrix(mass_matrix_path(source.path))
        else:
            raise WeightMatrixError(
                f"no mass matrix available for input {source}"
            )
    elif spec.startswith("file:"):
        weight = read_weight_matrix(spec[len("file:"):])
    else:
        raise ValueError(f"invalid weight spec: {spec!r}")
    if weight.dimension != source.m:
        raise DimensionMismatch(
            f"weight of dimension {weight.dimension} does not match input "
            f"columns of length {source.m}"
        )
    return weight
