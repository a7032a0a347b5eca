"""Dense ground truth and executable property checks.

The check functions return ``PropertyResult`` values instead of raising, so
that ``isvd_verify`` can print every witness and then decide the exit status.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .const import ORACLE_DROP_RATIO
from .exceptions import DeskScaleExceeded, DimensionMismatch
from .factors import CoreSVD, ToleranceConfig
from .linalg import (
    WeightOperator,
    bordered_matrix,
    orient_signs,
    svd_full,
    svd_thin_wide,
)
from .utils import get_setting, plural

log = logging.getLogger(__name__)

__all__ = [
    "PropertyResult",
    "SUITES",
    "SpectrumComparison",
    "check_block_identity",
    "check_interlacing",
    "check_projection_invariance",
    "check_zero_row_bordering",
    "compare_spectra",
    "dense_svd_oracle",
    "orthogonality_error",
    "principal_angles",
    "run_suite",
]


@dataclass
class PropertyResult:
    """Outcome of one property check. ``witness`` describes the worst case
    found (or the violated inequality).
    """

    name: str
    passed: bool
    witness: str = ""

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.witness}"


@dataclass
class SpectrumComparison:
    abs_errors: np.ndarray
    rel_errors: np.ndarray
    floor: float
    count: int = field(init=False)
    max_rel_error: float = field(init=False)

    def __post_init__(self):
        self.count = len(self.rel_errors)
        self.max_rel_error = (
            float(self.rel_errors.max()) if self.count else 0.0
        )

    @property
    def max_abs_error(self):
        return float(self.abs_errors.max()) if self.count else 0.0


def check_desk_scale(m, n, limit=None):
    """:raises: ``DeskScaleExceeded`` if ``m * n`` is above the limit."""
    if limit is None:
        limit = get_setting("DESK_SCALE_LIMIT")
    if m * n > limit:
        raise DeskScaleExceeded(
            f"a dense {m}x{n} computation exceeds the desk-scale limit "
            f"({m * n} > {limit} entries)"
        )


def dense_svd_oracle(U, weight, limit=None):
    """Returns the W-weighted core SVD of the whole matrix ``U``.

    With ``W = L L^T`` the dense SVD of ``L^T U`` is mapped back through
    ``Q = L^-T Q_hat``. Singular values below ``1e-14 sigma_1`` are dropped.

    :raises: ``DeskScaleExceeded``, ``WeightMatrixError``
    """
    U = np.asarray(U, dtype=float)
    m, n = U.shape
    check_desk_scale(m, n, limit)
    if weight.dimension != m:
        raise DimensionMismatch(
            f"weight of dimension {weight.dimension} does not match a matrix "
            f"with {m} rows"
        )
    if weight.is_identity:
        L = None
        scaled = U
    else:
        L = weight.cholesky()
        scaled = L.T @ U
    left, sigma, right_t = spla.svd(
        scaled, full_matrices=False, lapack_driver="gesvd"
    )
    left, right = orient_signs(left, right_t.T)
    k = int(np.count_nonzero(sigma > ORACLE_DROP_RATIO * sigma[0]))
    left, sigma, right = left[:, :k], sigma[:k], right[:, :k]
    if L is not None:
        left = spla.solve_triangular(L.T, left, lower=False)
    return CoreSVD(Q=left, sigma=sigma, R=right, columns_seen=n)


def orthogonality_error(Q, weight):
    """``E_W = |I - Q^T W Q|_F``."""
    k = Q.shape[1]
    return float(np.linalg.norm(np.eye(k) - Q.T @ weight.apply(Q)))


def principal_angles(Q1, Q2, weight):
    """Returns the principal angles between the spans of two W-orthonormal
    factors, ascending.

    Small angles are taken from the sines (``arcsin`` is accurate near zero
    where ``arccos`` is not), the others from the cosines.
    """
    if Q1.shape != Q2.shape:
        raise DimensionMismatch(
            f"cannot compare subspaces of shapes {Q1.shape} and {Q2.shape}"
        )
    cross = Q1.T @ weight.apply(Q2)
    cosines = np.clip(spla.svdvals(cross), 0.0, 1.0)
    remainder = Q2 - Q1 @ cross
    gram = remainder.T @ weight.apply(remainder)
    sines = np.sqrt(np.clip(spla.eigvalsh(gram), 0.0, 1.0))
    # cosines are descending and sines ascending: both index angles upwards
    angles = np.where(
        cosines ** 2 > 0.5, np.arcsin(sines), np.arccos(cosines)
    )
    return np.sort(angles)


def _slack(sigma):
    return 1e-12 * float(sigma[0])


def check_interlacing(sigma, d, p):
    """Checks that the singular values ``mu`` of ``[[diag(sigma), d],
    [0, p]]`` satisfy ``mu[k] <= p`` and ``mu[i+1] <= sigma[i] <= mu[i]``
    (within ``1e-12 sigma[0]``).
    """
    sigma = np.asarray(sigma, dtype=float)
    k = sigma.shape[0]
    _, mu, _ = svd_full(
        bordered_matrix(sigma, np.asarray(d, dtype=float), p)
    )
    slack = _slack(sigma)
    violations = []
    if mu[k] > p + slack:
        violations.append(f"mu[{k}]={mu[k]!r} > p={p!r}")
    for i in range(k):
        if sigma[i] > mu[i] + slack:
            violations.append(f"sigma[{i}]={sigma[i]!r} > mu[{i}]={mu[i]!r}")
        if mu[i + 1] > sigma[i] + slack:
            violations.append(
                f"mu[{i + 1}]={mu[i + 1]!r} > sigma[{i}]={sigma[i]!r}"
            )
    if violations:
        return PropertyResult("interlacing", False, "; ".join(violations))
    return PropertyResult("interlacing", True, f"k={k}, mu[k]={mu[k]:.3e}")


def block_identity_sides(A, B):
    """Returns both sides of ``blkdiag(blkdiag(A, 1) B, 1) =
    blkdiag(A, I_2) blkdiag(B, 1)``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.shape != (A.shape[1] + 1, A.shape[1]):
        raise DimensionMismatch(
            f"B must be {A.shape[1] + 1}x{A.shape[1]} for A of shape "
            f"{A.shape}, got {B.shape}"
        )
    left = spla.block_diag(spla.block_diag(A, 1.0) @ B, 1.0)
    right = spla.block_diag(A, np.eye(2)) @ spla.block_diag(B, 1.0)
    return left, right


def check_block_identity(A, B):
    left, right = block_identity_sides(A, B)
    scale = max(float(np.abs(left).max()), float(np.abs(right).max()))
    difference = float(np.abs(left - right).max())
    passed = (
        difference <= 1e-15 * scale
        and np.array_equal(left == 0, right == 0)
    )
    return PropertyResult(
        "block identity", passed, f"max difference {difference:.3e}"
    )


def check_projection_invariance(Q, rotation, x):
    """``Q Q^T x`` is unchanged when ``Q`` is replaced by ``Q rotation``."""
    rotated = Q @ rotation
    difference = np.linalg.norm(Q @ (Q.T @ x) - rotated @ (rotated.T @ x))
    bound = 1e-12 * np.linalg.norm(x)
    return PropertyResult(
        "projection invariance",
        difference <= bound,
        f"difference {difference:.3e} (bound {bound:.3e})",
    )


def check_zero_row_bordering(A, alpha):
    """The thin SVD of ``[A | alpha]`` and the full SVD of ``[[A, alpha],
    [0, 0]]`` share their singular values and (up to sign) their left
    singular vectors.
    """
    A = np.asarray(A, dtype=float)
    k = A.shape[0]
    Q_thin, sigma_thin, _ = svd_thin_wide(np.column_stack((A, alpha)))
    bordered = np.zeros((k + 1, k + 1))
    bordered[:k, :k] = A
    bordered[:k, k] = alpha
    Q_full, sigma_full, _ = svd_full(bordered)
    spectrum = compare_spectra(sigma_full[:k], sigma_thin, floor=0.0)
    alignment = np.abs(np.sum(Q_thin * Q_full[:k, :k], axis=0))
    vector_error = float(np.abs(1.0 - alignment).max())
    passed = (
        spectrum.max_rel_error <= 1e-12
        and vector_error <= 1e-8
        and abs(sigma_full[k]) <= _slack(sigma_full)
        and np.allclose(Q_full[k, :k], 0.0)
    )
    return PropertyResult(
        "zero-row bordering",
        passed,
        f"spectrum {spectrum.max_rel_error:.3e}, vectors {vector_error:.3e}",
    )


def compare_spectra(computed, reference, floor=None, count=None):
    """Compares two spectra entrywise; the shorter one is padded with zeros.

    :param floor: denominators of relative errors are ``max(reference_i,
        floor)``; defaults to ``1e-10`` times the largest value.
    :param count: compare only the leading ``count`` values.
    """
    computed = np.asarray(computed, dtype=float)
    reference = np.asarray(reference, dtype=float)
    size = max(computed.shape[0], reference.shape[0])
    if count is not None:
        size = min(size, count)
    a = np.zeros(size)
    b = np.zeros(size)
    a[:min(size, computed.shape[0])] = computed[:size]
    b[:min(size, reference.shape[0])] = reference[:size]
    if floor is None:
        top = max(a.max(initial=0.0), b.max(initial=0.0))
        floor = 1e-10 * top
    abs_errors = np.abs(a - b)
    denominators = np.maximum(b, floor)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_errors = np.where(
            abs_errors == 0, 0.0, abs_errors / denominators
        )
    return SpectrumComparison(abs_errors, rel_errors, float(floor))


def _worst(name, results):
    """Folds per-trial results into one, keeping the first failure."""
    for result in results:
        if not result.passed:
            return PropertyResult(name, False, result.witness)
    return PropertyResult(
        name, True, f"{plural(len(results), 'trial')} passed"
    )


def _random_orthonormal(rng, m, k):
    Q, _ = np.linalg.qr(rng.standard_normal((m, k)))
    return Q


def _random_spectrum(rng, k):
    return np.sort(rng.uniform(1.0, 10.0, k))[::-1]


def identities_suite(rng, trials):
    blocks = []
    projections = []
    borderings = []
    for _ in range(trials):
        m, n = rng.integers(1, 12, size=2)
        # dyadic rationals keep every product exact
        A = rng.integers(-64, 65, size=(m, n)) / 16
        B = rng.integers(-64, 65, size=(n + 1, n)) / 16
        blocks.append(check_block_identity(A, B))

        m = int(rng.integers(2, 60))
        k = int(rng.integers(1, m + 1))
        projections.append(check_projection_invariance(
            _random_orthonormal(rng, m, k),
            _random_orthonormal(rng, k, k),
            rng.standard_normal(m),
        ))

        k = int(rng.integers(1, 20))
        borderings.append(check_zero_row_bordering(
            np.diag(_random_spectrum(rng, k)), rng.standard_normal(k)
        ))
    return [
        _worst("block identity", blocks),
        _worst("projection invariance", projections),
        _worst("zero-row bordering", borderings),
    ]


def interlace_suite(rng, trials):
    results = []
    for _ in range(trials):
        k = int(rng.integers(1, 21))
        results.append(check_interlacing(
            _random_spectrum(rng, k),
            rng.standard_normal(k),
            float(rng.uniform(0.0, 5.0)),
        ))
    return [_worst("interlacing", results)]


def random_weight(rng, m, identity):
    if identity:
        return WeightOperator.identity(m)
    return WeightOperator.diagonal(rng.uniform(0.5, 2.0, m))


def equivalence_trial(rng):
    """Runs ``isvd1`` and ``isvd3`` on one random low-rank stream.

    :returns: ``(comparison, left_angle, right_angle)``
    """
    from .datagen import random_low_rank_matrix
    from .isvd import run_isvd1, run_isvd3
    m = int(rng.integers(20, 101))
    n = int(rng.integers(m // 2, 151))
    rank = int(rng.integers(1, 13))
    U = random_low_rank_matrix(rng, m, n, rank)
    weight = random_weight(rng, m, identity=bool(rng.integers(0, 2)))
    config = ToleranceConfig.from_settings(tol=1e-12)
    direct = run_isvd1(U.T, weight, config)
    buffered = run_isvd3(U.T, weight, config)
    comparison = compare_spectra(buffered.sigma, direct.sigma, floor=0.0)
    if direct.rank != buffered.rank:
        return comparison, np.inf, np.inf
    left = principal_angles(direct.Q, buffered.Q, weight).max()
    right = principal_angles(
        direct.R, buffered.R, WeightOperator.identity(n)
    ).max()
    return comparison, float(left), float(right)


def equivalence_suite(rng, trials):
    results = []
    for _ in range(trials):
        comparison, left, right = equivalence_trial(rng)
        passed = comparison.max_rel_error <= 1e-10 and max(left, right) <= 1e-8
        results.append(PropertyResult(
            "isvd3 matches isvd1",
            passed,
            f"spectrum {comparison.max_rel_error:.3e}, angles "
            f"{left:.3e}/{right:.3e}",
        ))
    return [_worst("isvd3 matches isvd1", results)]


def orthogonality_suite(rng, trials):
    """Final ``E_W`` of the buffered families on snapshot data, with the
    identity and the mass matrix as weights. ``rng`` picks the mesh sizes.
    """
    from .datagen import SnapshotConfig, assemble_mass_matrix, build_mesh
    from .datagen import snapshot_stream
    from .isvd import run_isvd3, run_isvd4
    results = []
    config = ToleranceConfig.from_settings()
    for _ in range(trials):
        mesh = build_mesh(int(rng.integers(4, 13)))
        snapshots = SnapshotConfig(t_end=10.0, dt=0.05)
        mass = assemble_mass_matrix(mesh)
        for weight in (WeightOperator.identity(mesh.vertex_count), mass):
            for run in (run_isvd3, run_isvd4):
                core = run(snapshot_stream(mesh, snapshots), weight, config)
                error = orthogonality_error(core.Q, weight)
                results.append(PropertyResult(
                    "orthogonality",
                    error <= config.tol_orth,
                    f"{run.__name__} N={mesh.n} W={weight.kind}: "
                    f"E_W={error:.3e}",
                ))
    return [_worst("orthogonality", results)]


SUITES = {
    "identities": identities_suite,
    "interlace": interlace_suite,
    "equivalence": equivalence_suite,
    "orthogonality": orthogonality_suite,
}


def run_suite(name, seed=0, trials=None):
    """Runs a named property suite with a seeded generator.

    :returns: list of ``PropertyResult``
    :raises: ``KeyError`` for unknown suite names.
    """
    suite = SUITES[name]
    if trials is None:
        trials = 1 if name == "orthogonality" else 100
    rng = np.random.default_rng(seed)
    log.info(f"running {name} suite ({plural(trials, 'trial')}, seed {seed})")
    return suite(rng, trials)
