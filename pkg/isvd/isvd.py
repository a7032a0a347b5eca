"""The incremental SVD families.

Every family consumes one column at a time and keeps a truncated core SVD
``U = Q diag(sigma) R^T`` of the columns seen so far, orthonormal in the
weighted inner product ``(a, b)_W = a^T W b``:

- ``isvd1`` rotates the full left factor at every update and re-runs weighted
  Gram-Schmidt when the first and last columns drift apart.
- ``isvd2`` keeps Brand's five-matrix form and rotates only the small inner
  factors. Its outer left factor is never reorthogonalized, which is what
  makes it lose orthogonality on long streams.
- ``isvd3`` buffers the coefficients of every column that adds nothing to the
  rank and absorbs the whole buffer with one wide SVD at the next rank event.
- ``isvd4`` is ``isvd3`` with the small rotation folded into the left factor
  at each rank event, and with a single last-singular-value truncation test.

A column adds nothing to the rank when its residual is below
``ToleranceConfig.residual_threshold()`` of its W-norm.

Updates are pure: they return a new state and an ``UpdateReport`` and never
modify their inputs.
"""
import logging
from dataclasses import replace

import numpy as np
import scipy.linalg as spla

from .const import DEGENERATE_NORM
from .exceptions import (
    EmptyStreamError,
    NonFiniteError,
    SingularUpdateError,
    ZeroFirstColumnError,
)
from .factors import (
    BRANCH_BUFFERED,
    BRANCH_RANK_GREW,
    BRANCH_RANK_HELD,
    BRANCH_SV_TRUNCATED,
    BufferedState,
    CoreSVD,
    FiveMatrixState,
    ToleranceConfig,
    UpdateReport,
)
from .linalg import (
    WeightOperator,
    bordered_matrix,
    gram_schmidt_w,
    residual,
    svd_full,
    svd_thin_wide,
    w_norm,
)

log = logging.getLogger(__name__)

__all__ = [
    "finalize_isvd3",
    "finalize_isvd4",
    "initialize",
    "reorthogonalize_isvd1",
    "reorthogonalize_isvd2",
    "run_isvd1",
    "run_isvd2",
    "run_isvd3",
    "run_isvd4",
    "run_updates",
    "update_isvd1",
    "update_isvd2",
    "update_isvd3",
    "update_isvd4",
]


def initialize(u, weight):
    """Returns the rank-1 core SVD of the first column.

    :raises: ``ZeroFirstColumnError`` if ``u`` has (numerically) zero W-norm.
    """
    u = np.asarray(u, dtype=float)
    sigma = w_norm(u, weight)
    if not np.isfinite(sigma):
        raise NonFiniteError("first column contains non-finite entries")
    if sigma < DEGENERATE_NORM:
        raise ZeroFirstColumnError(
            f"the first column must be nonzero (W-norm {sigma!r})"
        )
    return CoreSVD(
        Q=(u / sigma)[:, np.newaxis],
        sigma=np.array([sigma]),
        R=np.ones((1, 1)),
        columns_seen=1,
    )


def _threshold(config, d, p):
    # |u|_W^2 = |d|^2 + p^2 for a W-orthonormal left factor
    return config.residual_threshold(float(np.hypot(np.linalg.norm(d), p)))


def _stack_right(R, R_Y, k):
    """Returns ``blkdiag(R, I) @ R_Y`` without forming the block matrix."""
    return np.vstack((R @ R_Y[:k], R_Y[k:]))


def _pad(small):
    return spla.block_diag(small, 1.0)


def _kept_rank(sigma, tol):
    # sigma is descending, so the kept values form a prefix
    return max(1, int(np.count_nonzero(sigma >= tol)))


def _next_index(state, column_index):
    return state.columns_seen + 1 if column_index is None else column_index


def _triple(sigma, d, p, instrument):
    if not instrument:
        return None
    return (np.array(sigma), np.array(d), float(p))


def update_isvd1(core, u, weight, config, column_index=None,
                 instrument=False):
    """Direct update of a ``CoreSVD`` with one column.

    Residuals below the threshold keep the rank; otherwise the rank grows by
    one and trailing singular values below ``tol`` are truncated.

    :returns: ``(CoreSVD, UpdateReport)``
    """
    index = _next_index(core, column_index)
    d, e, p = residual(u, core.Q, weight)
    k = core.rank
    if p < _threshold(config, d, p):
        Q_Y, sigma_Y, R_Y = svd_full(bordered_matrix(core.sigma, d, 0.0))
        updated = CoreSVD(
            Q=core.Q @ Q_Y[:k, :k],
            sigma=sigma_Y[:k],
            R=_stack_right(core.R, R_Y[:, :k], k),
            columns_seen=core.columns_seen + 1,
        )
        report = UpdateReport(
            index,
            BRANCH_RANK_HELD,
            p,
            k,
            bordered=_triple(core.sigma, d, 0.0, instrument),
        )
        return updated, report

    Q_Y, sigma_Y, R_Y = svd_full(bordered_matrix(core.sigma, d, p))
    Q = np.column_stack((core.Q, e / p)) @ Q_Y
    R = _stack_right(core.R, R_Y, k)
    keep = _kept_rank(sigma_Y, config.tol)
    config.check_rank(keep, core.m)
    updated = CoreSVD(
        Q=Q[:, :keep],
        sigma=sigma_Y[:keep],
        R=R[:, :keep],
        columns_seen=core.columns_seen + 1,
    )
    report = UpdateReport(
        index,
        BRANCH_RANK_GREW if keep == k + 1 else BRANCH_SV_TRUNCATED,
        p,
        keep,
        bordered=_triple(core.sigma, d, p, instrument),
    )
    return updated, report


def reorthogonalize_isvd1(core, report, weight, config):
    """Weighted Gram-Schmidt on the left factor, if its first and last
    columns drifted apart. Records the outcome on ``report``.
    """
    Q = gram_schmidt_w(core.Q, weight, config.tol)
    if Q is core.Q:
        return core
    log.debug(f"column {report.column_index}: reorthogonalized Q")
    report.reorth_fired = True
    return replace(core, Q=Q)


def _pinv(small):
    pinv, rank = spla.pinv(small, return_rank=True)
    if rank < small.shape[0]:
        raise SingularUpdateError(
            f"right small factor lost rank ({rank} < {small.shape[0]})"
        )
    return pinv


def update_isvd2(state, u, weight, config, column_index=None,
                 instrument=False):
    """Update of the five-matrix form ``Q_out Q_small diag(sigma)
    R_small^T R_out^T``.

    Only the small factors are rotated; ``Q_out`` grows by one column at
    each rank event and is never reorthogonalized (see
    ``reorthogonalize_isvd2()`` for the small factor).

    :returns: ``(FiveMatrixState, UpdateReport)``
    :raises: ``SingularUpdateError`` if the small right factor loses rank.
    """
    index = _next_index(state, column_index)
    d_out, e, p = residual(u, state.Q_out, weight)
    d = state.Q_small.T @ d_out
    k = state.rank
    if p < _threshold(config, d_out, p):
        Q_Y, sigma_Y, R_Y = svd_full(bordered_matrix(state.sigma, d, 0.0))
        R_head = R_Y[:k, :k]
        R_tail = R_Y[k, :k]
        pinv = _pinv(R_head) @ state.R_small_pinv
        updated = replace(
            state,
            Q_small=state.Q_small @ Q_Y[:k, :k],
            sigma=sigma_Y[:k],
            R_small=state.R_small @ R_head,
            R_small_pinv=pinv,
            R_out=np.vstack((state.R_out, R_tail @ pinv)),
            columns_seen=state.columns_seen + 1,
        )
        branch, bordered = BRANCH_RANK_HELD, (d, 0.0)
    else:
        config.check_rank(k + 1, state.Q_out.shape[0])
        Q_Y, sigma_Y, R_Y = svd_full(bordered_matrix(state.sigma, d, p))
        updated = FiveMatrixState(
            Q_out=np.column_stack((state.Q_out, e / p)),
            Q_small=_pad(state.Q_small) @ Q_Y,
            sigma=sigma_Y,
            R_small=_pad(state.R_small) @ R_Y,
            R_small_pinv=R_Y.T @ _pad(state.R_small_pinv),
            R_out=_pad(state.R_out),
            columns_seen=state.columns_seen + 1,
        )
        branch, bordered = BRANCH_RANK_GREW, (d, p)

    report = UpdateReport(
        index,
        branch,
        p,
        updated.rank,
        bordered=_triple(state.sigma, *bordered, instrument),
    )
    return updated, report


def reorthogonalize_isvd2(state, report, weight, config):
    """Gram-Schmidt on the small left factor only; ``Q_out`` is left as is.
    """
    identity = WeightOperator.identity(state.rank)
    Q_small = gram_schmidt_w(state.Q_small, identity, config.tol)
    if Q_small is state.Q_small:
        return state
    log.debug(f"column {report.column_index}: reorthogonalized Q_small")
    report.reorth_fired = True
    return replace(state, Q_small=Q_small)


def _flush(state):
    """Absorbs the buffered coefficients with one wide SVD of
    ``[diag(sigma) | V]``.

    :returns: ``(BufferedState, Q_Y)``; the new state has an empty buffer and
        ``Q0`` rotated by ``Q_Y``.
    """
    core = state.core
    k = core.rank
    Y = np.hstack((np.diag(core.sigma), np.column_stack(state.buffer)))
    Q_Y, sigma_Y, R_Y = svd_thin_wide(Y)
    flushed = CoreSVD(
        Q=core.Q,
        sigma=sigma_Y,
        R=_stack_right(core.R, R_Y, k),
        columns_seen=core.columns_seen + state.q,
    )
    return BufferedState(core=flushed, Q0=state.Q0 @ Q_Y), Q_Y


def _new_direction(Q, d, e, p, weight, config, threshold):
    """Normalizes the residual and re-projects it once against ``Q`` if it
    is not W-orthogonal to the first column.

    The re-projection moves the removed component into the coefficients, so
    ``u = Q d + p direction`` holds for the returned ``d`` and ``p``.

    :returns: ``(direction, d, p, reprojected)``; ``direction`` is ``None``
        when the re-projected residual falls below ``threshold``.
    """
    direction = e / p
    w_direction = weight.apply(direction)
    if abs(w_direction @ Q[:, 0]) <= config.tol:
        return direction, d, p, False
    overlap = Q.T @ w_direction
    direction = direction - Q @ overlap
    norm = w_norm(direction, weight)
    d = d + p * overlap
    p = p * norm
    if p < threshold:
        return None, d, p, True
    return direction / norm, d, p, True


def _buffer(state, coefficients, index, p, reprojected=False):
    report = UpdateReport(
        index, BRANCH_BUFFERED, p, state.rank, reorth_fired=reprojected
    )
    return state.buffered(coefficients), report


def update_isvd3(state, u, weight, config, column_index=None,
                 instrument=False):
    """Buffered update with lazily accumulated small rotation ``Q0``.

    A residual below the threshold costs one projection: ``Q0^T d`` is
    buffered and nothing else changes. So is a residual that collapses when
    re-projected. At a rank event a pending buffer is flushed first, then the
    left factor gains the residual direction and ``Q0`` absorbs the bordered
    rotation. ``Q0`` is never reorthogonalized.

    :returns: ``(BufferedState, UpdateReport)``
    """
    index = _next_index(state, column_index)
    d, e, p = residual(u, state.core.Q, weight)
    threshold = _threshold(config, d, p)
    if p < threshold:
        return _buffer(state, state.Q0.T @ d, index, p)
    direction, d, p, reprojected = _new_direction(
        state.core.Q, d, e, p, weight, config, threshold
    )
    if direction is None:
        return _buffer(state, state.Q0.T @ d, index, p, reprojected)

    if state.q:
        state, _ = _flush(state)
    core = state.core
    k = core.rank
    config.check_rank(k + 1, core.m)
    d_core = state.Q0.T @ d
    Q_Y, sigma_Y, R_Y = svd_full(bordered_matrix(core.sigma, d_core, p))
    grown = CoreSVD(
        Q=np.column_stack((core.Q, direction)),
        sigma=sigma_Y,
        R=_stack_right(core.R, R_Y, k),
        columns_seen=core.columns_seen + 1,
    )
    report = UpdateReport(
        index,
        BRANCH_RANK_GREW,
        p,
        k + 1,
        reorth_fired=reprojected,
        bordered=_triple(core.sigma, d_core, p, instrument),
    )
    return BufferedState(core=grown, Q0=_pad(state.Q0) @ Q_Y), report


def finalize_isvd3(state):
    """Flushes a pending buffer and applies ``Q0`` to the left factor."""
    if state.q:
        state, _ = _flush(state)
    core = state.core
    return replace(core, Q=core.Q @ state.Q0)


def update_isvd4(state, u, weight, config, column_index=None,
                 instrument=False):
    """Buffered update with the small rotation folded into ``Q`` at every
    rank event.

    Between rank events ``Q0`` is the identity, so ``d`` itself is buffered.
    After the bordered SVD only the last singular value is tested against
    ``tol``: the rank grows if it passes and the last triple is dropped
    otherwise.

    :returns: ``(BufferedState, UpdateReport)``
    """
    index = _next_index(state, column_index)
    d, e, p = residual(u, state.core.Q, weight)
    threshold = _threshold(config, d, p)
    if p < threshold:
        return _buffer(state, d, index, p)
    direction, d, p, reprojected = _new_direction(
        state.core.Q, d, e, p, weight, config, threshold
    )
    if direction is None:
        return _buffer(state, d, index, p, reprojected)

    if state.q:
        state, Q_Y = _flush(state)
        d = Q_Y.T @ d
    core = state.core
    k = core.rank
    Q_Y, sigma_Y, R_Y = svd_full(bordered_matrix(core.sigma, d, p))
    rotation = _pad(state.Q0) @ Q_Y
    expanded = np.column_stack((core.Q, direction))
    if sigma_Y[k] >= config.tol:
        config.check_rank(k + 1, core.m)
        updated = CoreSVD(
            Q=expanded @ rotation,
            sigma=sigma_Y,
            R=_stack_right(core.R, R_Y, k),
            columns_seen=core.columns_seen + 1,
        )
        branch = BRANCH_RANK_GREW
    else:
        updated = CoreSVD(
            Q=expanded @ rotation[:, :k],
            sigma=sigma_Y[:k],
            R=_stack_right(core.R, R_Y[:, :k], k),
            columns_seen=core.columns_seen + 1,
        )
        branch = BRANCH_SV_TRUNCATED
    report = UpdateReport(
        index,
        branch,
        p,
        updated.rank,
        reorth_fired=reprojected,
        bordered=_triple(core.sigma, d, p, instrument),
    )
    return BufferedState.from_core(updated), report


def finalize_isvd4(state):
    """Flushes a pending buffer into the left factor."""
    if not state.q:
        return state.core
    state, Q_Y = _flush(state)
    core = state.core
    return replace(core, Q=core.Q @ Q_Y)


def run_updates(columns, weight, config, start, update, finish,
                reorthogonalize=None, observer=None, instrument=False):
    """Drives one family over a column iterable.

    Each step is ``update`` followed by ``reorthogonalize`` (when given).

    :param start: callable turning the initial ``CoreSVD`` into the family
        state.
    :param update: callable with the ``update_isvd*`` signature.
    :param finish: callable turning the last state into a ``CoreSVD``.
    :param reorthogonalize: optional callable with the
        ``reorthogonalize_isvd*`` signature.
    :param observer: optional callable invoked as ``observer(state, report)``
        after every step.
    :raises: ``EmptyStreamError`` if ``columns`` yields nothing.
    """
    columns = iter(columns)
    try:
        first = next(columns)
    except StopIteration:
        raise EmptyStreamError("the column stream is empty") from None
    state = start(initialize(first, weight))
    for index, column in enumerate(columns, start=2):
        state, report = update(
            state, column, weight, config, index, instrument
        )
        if reorthogonalize is not None:
            state = reorthogonalize(state, report, weight, config)
        if observer is not None:
            observer(state, report)
    return finish(state)


def _identity(state):
    return state


def _config(config):
    return ToleranceConfig.from_settings() if config is None else config


def run_isvd1(columns, weight, config=None):
    """Direct incremental SVD with weighted Gram-Schmidt after each update."""
    return run_updates(
        columns,
        weight,
        _config(config),
        _identity,
        update_isvd1,
        _identity,
        reorthogonalize=reorthogonalize_isvd1,
    )


def run_isvd2(columns, weight, config=None):
    """Five-matrix incremental SVD; returns ``(Q_out Q_small, sigma,
    R_out R_small)``.
    """
    return run_updates(
        columns,
        weight,
        _config(config),
        FiveMatrixState.from_core,
        update_isvd2,
        FiveMatrixState.to_core,
        reorthogonalize=reorthogonalize_isvd2,
    )


def run_isvd3(columns, weight, config=None):
    return run_updates(
        columns,
        weight,
        _config(config),
        BufferedState.from_core,
        update_isvd3,
        finalize_isvd3,
    )


def run_isvd4(columns, weight, config=None):
    return run_updates(
        columns,
        weight,
        _config(config),
        BufferedState.from_core,
        update_isvd4,
        finalize_isvd4,
    )
