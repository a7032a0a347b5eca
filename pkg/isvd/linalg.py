"""Weighted inner products, small dense SVD kernels and W-weighted
Gram-Schmidt.

Vectors are 1-D ``numpy`` arrays and factors are 2-D arrays with one singular
vector per column. Every function here is pure: inputs are never modified.
"""
import numpy as np
import scipy.linalg as spla
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_norm

from .const import DEGENERATE_NORM
from .exceptions import (
    DegenerateColumnError,
    DimensionMismatch,
    NonFiniteError,
    WeightMatrixError,
)

__all__ = [
    "WeightOperator",
    "bordered_matrix",
    "gram_schmidt_w",
    "needs_reorthogonalization",
    "orient_signs",
    "residual",
    "svd_full",
    "svd_thin_wide",
    "w_inner",
    "w_norm",
]

KIND_IDENTITY = "identity"
KIND_DENSE = "dense-SPD"
KIND_SPARSE = "sparse-SPD"


class WeightOperator:
    """The SPD matrix ``W`` of the inner product ``(a, b)_W = a^T W b``.

    Instances are immutable and ``apply()`` is re-entrant, so one operator can
    be shared by streams running on different threads.
    """

    def __init__(self, kind, dimension, matrix=None):
        if kind not in (KIND_IDENTITY, KIND_DENSE, KIND_SPARSE):
            raise ValueError(f"invalid weight kind: {kind!r}")
        if dimension < 1:
            raise DimensionMismatch(f"invalid weight dimension: {dimension}")
        if kind != KIND_IDENTITY and matrix.shape != (dimension, dimension):
            raise DimensionMismatch(
                f"expected {dimension}x{dimension} weight matrix, "
                f"got {matrix.shape}"
            )
        self.kind = kind
        self.dimension = dimension
        self.matrix = matrix

    @classmethod
    def identity(cls, dimension):
        return cls(KIND_IDENTITY, dimension)

    @classmethod
    def dense(cls, matrix):
        matrix = np.array(matrix, dtype=float)
        _check_finite(matrix, "weight matrix")
        return cls(KIND_DENSE, matrix.shape[0], matrix)

    @classmethod
    def sparse(cls, matrix):
        matrix = sp.csr_matrix(matrix, dtype=float)
        _check_finite(matrix.data, "weight matrix")
        return cls(KIND_SPARSE, matrix.shape[0], matrix)

    @classmethod
    def diagonal(cls, entries):
        entries = np.asarray(entries, dtype=float)
        return cls.sparse(sp.diags(entries))

    @property
    def is_identity(self):
        return self.kind == KIND_IDENTITY

    def apply(self, values):
        """Returns ``W @ values`` for a vector or a matrix of columns.

        The identity operator returns ``values`` itself (no copy), so callers
        must not modify the result in place.
        """
        values = np.asarray(values, dtype=float)
        if values.shape[0] != self.dimension:
            raise DimensionMismatch(
                f"weight of dimension {self.dimension} cannot be applied to "
                f"an operand with {values.shape[0]} rows"
            )
        if self.is_identity:
            return values
        return np.asarray(self.matrix @ values)

    def to_dense(self):
        if self.is_identity:
            return np.eye(self.dimension)
        if self.kind == KIND_SPARSE:
            return self.matrix.toarray()
        return self.matrix.copy()

    def cholesky(self):
        """Returns the lower Cholesky factor ``L`` with ``W = L L^T``.

        :raises: ``WeightMatrixError`` if ``W`` is not positive definite.
        """
        if self.is_identity:
            return np.eye(self.dimension)
        try:
            return spla.cholesky(self.to_dense(), lower=True)
        except np.linalg.LinAlgError as exc:
            raise WeightMatrixError(f"weight is not SPD: {exc}") from exc

    def norm_estimate(self):
        """Frobenius norm of ``W`` (an upper bound of its spectral norm)."""
        if self.is_identity:
            return float(np.sqrt(self.dimension))
        if self.kind == KIND_SPARSE:
            return float(sparse_norm(self.matrix))
        return float(np.linalg.norm(self.matrix))

    def symmetry_defect(self, rng, samples=4):
        """Largest ``|(a, Wb) - (b, Wa)| / (|a| |b| |W|)`` over random sample
        pairs drawn from ``rng``.
        """
        worst = 0.0
        scale = self.norm_estimate()
        for _ in range(samples):
            a = rng.standard_normal(self.dimension)
            b = rng.standard_normal(self.dimension)
            defect = abs(a @ self.apply(b) - b @ self.apply(a))
            worst = max(
                worst,
                defect / (np.linalg.norm(a) * np.linalg.norm(b) * scale),
            )
        return worst

    def is_positive_on_samples(self, rng, samples=4):
        for _ in range(samples):
            v = rng.standard_normal(self.dimension)
            if not v @ self.apply(v) > 0:
                return False
        return True

    def __repr__(self):
        return f"<WeightOperator {self.kind} m={self.dimension}>"


def _check_finite(values, what):
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"{what} contains non-finite entries")


def _check_vector(vector, weight, what="vector"):
    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1 or vector.shape[0] != weight.dimension:
        raise DimensionMismatch(
            f"{what} of shape {vector.shape} does not match weight "
            f"dimension {weight.dimension}"
        )
    return vector


def w_inner(a, b, weight):
    """Returns ``a^T W b``."""
    a = _check_vector(a, weight)
    b = _check_vector(b, weight)
    if weight.is_identity:
        return float(a @ b)
    return float(a @ weight.apply(b))


def w_norm(vector, weight):
    """Returns ``sqrt(v^T W v)``, clamping roundoff-negative forms at zero."""
    return float(np.sqrt(max(w_inner(vector, vector, weight), 0.0)))


def residual(u, Q, weight):
    """Projects ``u`` onto the W-orthonormal columns of ``Q``.

    ``W`` is applied to ``u`` exactly once.

    :returns: ``(d, e, p)`` with coefficients ``d = Q^T W u``, residual
        ``e = u - Q d`` and its W-norm ``p``.
    """
    u = _check_vector(u, weight, "column")
    if Q.shape[0] != weight.dimension:
        raise DimensionMismatch(
            f"factor with {Q.shape[0]} rows does not match weight dimension "
            f"{weight.dimension}"
        )
    d = Q.T @ weight.apply(u)
    e = u - Q @ d
    return d, e, w_norm(e, weight)


def orient_signs(left, right):
    """Flips singular vector pairs so the largest-magnitude entry of each left
    vector is nonnegative (ties go to the lowest row index).

    :returns: new ``(left, right)`` arrays; the inputs are not modified.
    """
    left = np.array(left, dtype=float)
    right = np.array(right, dtype=float)
    columns = min(left.shape[1], right.shape[1])
    if not columns:
        return left, right
    # argmax returns the first (lowest index) maximum
    rows = np.argmax(np.abs(left[:, :columns]), axis=0)
    flip = left[rows, np.arange(columns)] < 0
    left[:, :columns][:, flip] *= -1
    right[:, :columns][:, flip] *= -1
    return left, right


def bordered_matrix(sigma, d, p):
    """Returns the ``(k + 1) x (k + 1)`` matrix ``[[diag(sigma), d], [0, p]]``
    whose SVD updates a rank-k core with one column.
    """
    k = sigma.shape[0]
    Y = np.zeros((k + 1, k + 1))
    Y[np.arange(k), np.arange(k)] = sigma
    Y[:k, k] = d
    Y[k, k] = p
    return Y


def svd_full(Y):
    """Full SVD ``Y = Q_Y diag(sigma_Y) R_Y^T`` of a small dense matrix.

    :returns: ``(Q_Y, sigma_Y, R_Y)`` with descending singular values and the
        sign convention of ``orient_signs()``.
    :raises: ``NonFiniteError``
    """
    Y = np.asarray(Y, dtype=float)
    _check_finite(Y, "matrix")
    left, sigma, right_t = spla.svd(
        Y,
        full_matrices=True,
        lapack_driver="gesvd",
        check_finite=False,
    )
    left, right = orient_signs(left, right_t.T)
    return left, sigma, right


def svd_thin_wide(Y):
    """Economy SVD of a short-and-fat ``k x (k + s)`` matrix.

    :returns: ``(Q_Y, sigma_Y, R_Y)`` where ``Q_Y`` is ``k x k`` and ``R_Y``
        is ``(k + s) x k`` with orthonormal columns.
    :raises: ``DimensionMismatch``, ``NonFiniteError``
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[1] <= Y.shape[0]:
        raise DimensionMismatch(f"expected a wide matrix, got {Y.shape}")
    _check_finite(Y, "matrix")
    left, sigma, right_t = spla.svd(
        Y,
        full_matrices=False,
        lapack_driver="gesvd",
        check_finite=False,
    )
    left, right = orient_signs(left, right_t.T)
    return left, sigma, right


def needs_reorthogonalization(Q, weight, tol):
    """The Gram-Schmidt trigger: ``|(Q[:, -1], Q[:, 0])_W| > tol``."""
    if not Q.shape[1]:
        return False
    return abs(w_inner(Q[:, -1], Q[:, 0], weight)) > tol


def gram_schmidt_w(Q, weight, tol):
    """Re-orthonormalizes the columns of ``Q`` in the W inner product.

    Nothing is done (and ``Q`` itself is returned) unless
    ``needs_reorthogonalization()`` fires. Otherwise one modified
    Gram-Schmidt pass is made, in column order, normalizing with ``w_norm``.

    :raises: ``DegenerateColumnError`` if a column collapses after projection.
    """
    if Q.shape[0] != weight.dimension:
        raise DimensionMismatch(
            f"factor with {Q.shape[0]} rows does not match weight dimension "
            f"{weight.dimension}"
        )
    if not needs_reorthogonalization(Q, weight, tol):
        return Q
    Q = np.array(Q, dtype=float)
    WQ = np.empty_like(Q)
    for i in range(Q.shape[1]):
        column = Q[:, i]
        for j in range(i):
            column -= (column @ WQ[:, j]) * Q[:, j]
        w_column = weight.apply(column)
        norm = np.sqrt(max(column @ w_column, 0.0))
        if norm < DEGENERATE_NORM:
            raise DegenerateColumnError(
                f"column {i} collapsed during Gram-Schmidt (norm={norm!r})"
            )
        Q[:, i] = column / norm
        WQ[:, i] = w_column / norm
    return Q
