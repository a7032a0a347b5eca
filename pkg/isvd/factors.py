"""Value types shared by the incremental SVD families."""
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import RankLimitExceeded

BRANCH_BUFFERED = "buffered"
BRANCH_RANK_GREW = "rank-grew"
BRANCH_RANK_HELD = "rank-held"
BRANCH_SV_TRUNCATED = "sv-truncated"

BRANCHES = (
    BRANCH_BUFFERED,
    BRANCH_RANK_GREW,
    BRANCH_RANK_HELD,
    BRANCH_SV_TRUNCATED,
)


@dataclass(frozen=True)
class ToleranceConfig:
    """Thresholds of an incremental run.

    :param tol: residuals below ``residual_threshold()`` are treated as zero
        and singular values below ``tol`` are truncated (by the families that
        truncate).
    :param tol_orth: threshold for orthogonality audits.
    :param max_rank: rank cap; the effective cap is ``min(m, max_rank)``.
    """

    tol: float
    tol_orth: float
    max_rank: int

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if not self.tol_orth > 0:
            raise ValueError(
                f"tol_orth must be positive, got {self.tol_orth!r}"
            )
        if self.max_rank < 1:
            raise ValueError(
                f"max_rank must be at least 1, got {self.max_rank!r}"
            )

    @classmethod
    def from_settings(cls, **overrides):
        """Builds a config from the ``ISVD_*`` Django settings. Keyword
        arguments whose value is not ``None`` take precedence.
        """
        from .utils import get_setting
        values = {
            "tol": get_setting("TOL"),
            "tol_orth": get_setting("TOL_ORTH"),
            "max_rank": get_setting("MAX_RANK"),
        }
        values.update(
            (key, value) for key, value in overrides.items()
            if value is not None
        )
        return cls(**values)

    def residual_threshold(self, column_norm):
        """Residual norm below which a column adds nothing to the rank:
        ``tol`` relative to the W-norm of the column, and absolute for columns
        of norm at most one.
        """
        return self.tol * max(1.0, column_norm)

    def rank_cap(self, m):
        return min(m, self.max_rank)

    def check_rank(self, rank, m):
        if rank > self.rank_cap(m):
            raise RankLimitExceeded(
                f"rank {rank} exceeds the cap min(m={m}, "
                f"max_rank={self.max_rank}); the stream does not look low "
                "rank at this tolerance"
            )


@dataclass(frozen=True)
class CoreSVD:
    """Rank-k truncated core SVD ``U = Q diag(sigma) R^T`` of the first
    ``columns_seen`` columns, with ``Q^T W Q = I`` and ``R^T R = I``.
    """

    Q: np.ndarray
    sigma: np.ndarray
    R: np.ndarray
    columns_seen: int

    @property
    def rank(self):
        return self.sigma.shape[0]

    @property
    def m(self):
        return self.Q.shape[0]

    def reconstruct(self):
        return (self.Q * self.sigma) @ self.R.T

    def violations(self, weight, tol_orth):
        """Returns descriptions of the violated invariants (empty if valid)."""
        from .verify import orthogonality_error
        found = []
        k = self.rank
        if self.Q.shape[1] != k or self.R.shape[1] != k:
            found.append(
                f"factor shapes {self.Q.shape}, {self.R.shape} do not match "
                f"rank {k}"
            )
            return found
        if self.R.shape[0] != self.columns_seen:
            found.append(
                f"R has {self.R.shape[0]} rows for {self.columns_seen} columns"
            )
        left = orthogonality_error(self.Q, weight)
        if left > tol_orth:
            found.append(f"left factor orthogonality error {left:.3e}")
        right = np.linalg.norm(self.R.T @ self.R - np.eye(k))
        if right > tol_orth:
            found.append(f"right factor orthogonality error {right:.3e}")
        if np.any(self.sigma <= 0):
            found.append("singular values are not strictly positive")
        if np.any(np.diff(self.sigma) > 0):
            found.append("singular values are not non-increasing")
        if k > min(self.m, self.columns_seen):
            found.append(f"rank {k} exceeds min(m, columns)")
        return found


@dataclass(frozen=True)
class FiveMatrixState:
    """Brand's factored form ``U = Q_out Q_small diag(sigma) R_small^T
    R_out^T``. Only ``Q_out Q_small`` and ``R_out R_small`` have orthonormal
    columns; ``R_small_pinv`` tracks the pseudo-inverse of ``R_small``.
    """

    Q_out: np.ndarray
    Q_small: np.ndarray
    sigma: np.ndarray
    R_small: np.ndarray
    R_small_pinv: np.ndarray
    R_out: np.ndarray
    columns_seen: int

    @classmethod
    def from_core(cls, core):
        k = core.rank
        return cls(
            Q_out=core.Q,
            Q_small=np.eye(k),
            sigma=core.sigma,
            R_small=np.eye(k),
            R_small_pinv=np.eye(k),
            R_out=core.R,
            columns_seen=core.columns_seen,
        )

    @property
    def rank(self):
        return self.sigma.shape[0]

    def to_core(self):
        return CoreSVD(
            Q=self.Q_out @ self.Q_small,
            sigma=self.sigma,
            R=self.R_out @ self.R_small,
            columns_seen=self.columns_seen,
        )

    def small_orthogonality_error(self):
        """``|I - Q_small^T Q_small|_F``, the drift of the small factor."""
        k = self.rank
        return float(np.linalg.norm(np.eye(k) - self.Q_small.T @ self.Q_small))


@dataclass(frozen=True)
class BufferedState:
    """State of the buffered families: the outer core (whose ``Q`` is the
    outer left matrix), the accumulated small rotation ``Q0`` and the
    coefficient vectors of columns whose residual fell below ``tol``.
    """

    core: CoreSVD
    Q0: np.ndarray
    buffer: tuple = field(default=())

    @classmethod
    def from_core(cls, core):
        return cls(core=core, Q0=np.eye(core.rank))

    @property
    def q(self):
        return len(self.buffer)

    @property
    def rank(self):
        return self.core.rank

    @property
    def columns_seen(self):
        return self.core.columns_seen + self.q

    def buffered(self, coefficients):
        return replace(self, buffer=self.buffer + (coefficients,))

    def small_orthogonality_error(self):
        """``|I - Q0^T Q0|_F``; stays at roundoff level because only one small
        product is accumulated per rank event.
        """
        k = self.Q0.shape[0]
        return float(np.linalg.norm(np.eye(k) - self.Q0.T @ self.Q0))


@dataclass
class UpdateReport:
    """Diagnostics of one column update.

    ``reorth_fired`` is set when the left factor was reorthogonalized or the
    residual direction re-projected. ``bordered`` holds the
    ``(sigma, d, p)`` triple of the bordered SVD when the update was
    instrumented and formed one.
    """

    column_index: int
    branch: str
    p: float
    rank_after: int
    reorth_fired: bool = False
    bordered: tuple = None
