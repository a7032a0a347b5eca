import logging
import time

from .exceptions import RunStopped, UnknownAlgorithm
from .factors import (
    BRANCH_BUFFERED,
    BufferedState,
    FiveMatrixState,
    ToleranceConfig,
)
from .formats import RunReport
from .isvd import (
    finalize_isvd3,
    finalize_isvd4,
    reorthogonalize_isvd1,
    reorthogonalize_isvd2,
    run_updates,
    update_isvd1,
    update_isvd2,
    update_isvd3,
    update_isvd4,
)
from .utils import class_import_helper, get_setting
from .verify import check_interlacing, orthogonality_error

log = logging.getLogger(__name__)

__all__ = [
    "BaseDriver",
    "Isvd1Driver",
    "Isvd2Driver",
    "Isvd3Driver",
    "Isvd4Driver",
    "driver_registry",
]


class _DriverRegistry:
    """Registry of the incremental SVD drivers available to the management
    commands, keyed by their ``algorithm`` id.

    The registry can be customized by defining a list of ``BaseDriver``
    subclass paths via the ``ISVD_DRIVERS`` settings attribute.
    """

    def __init__(self):
        self.drivers = None

    def setup_drivers(self):
        """Populate the registry, possibly defined in settings.

        This method is called at app ready time. ``get()`` calls it on first
        use when the app registry was never populated (plain library use).
        """
        self.drivers = {}
        for driver_path in get_setting("DRIVERS"):
            driver_class = class_import_helper(
                driver_path,
                "'ISVD_DRIVERS' item",
                BaseDriver,
            )
            driver = driver_class()
            self.drivers[driver.algorithm] = driver

    @property
    def algorithms(self):
        if self.drivers is None:
            self.setup_drivers()
        return sorted(self.drivers)

    def get(self, algorithm):
        """:raises: ``UnknownAlgorithm``"""
        if self.drivers is None:
            self.setup_drivers()
        try:
            return self.drivers[algorithm]
        except KeyError:
            raise UnknownAlgorithm(
                f"unknown algorithm {algorithm!r} (choose from "
                f"{', '.join(self.algorithms)})"
            ) from None


driver_registry = _DriverRegistry()


class _RunTracker:
    """Collects branch counts, sampled orthogonality errors and (when
    instrumented) interlacing checks while a driver runs.
    """

    def __init__(self, driver, weight, sample_every, instrument):
        self.driver = driver
        self.weight = weight
        self.sample_every = sample_every
        self.instrument = instrument
        self.report = RunReport(
            algorithm=driver.algorithm, tol=0.0, m=0, n=0, rank=0
        )
        self.updates = 0
        self.state = None

    def observe(self, state, update):
        self.updates += 1
        self.state = state
        self.report.branches[update.branch] += 1
        if update.reorth_fired:
            self.report.reorth_fired += 1
        if update.branch != BRANCH_BUFFERED:
            log.debug(
                f"column {update.column_index}: {update.branch} "
                f"(p={update.p:.3e}, rank {update.rank_after})"
            )
        if self.instrument and update.bordered is not None:
            result = check_interlacing(*update.bordered)
            self.report.interlacing_checked += 1
            if not result.passed:
                self.report.interlacing_failures += 1
                log.warning(
                    f"column {update.column_index}: {result.witness}"
                )
        if self.updates % self.sample_every == 0:
            error = orthogonality_error(
                self.driver.left_factor(state), self.weight
            )
            self.report.orthogonality.append([update.column_index, error])


class BaseDriver:
    """Abstract class for the Driver API. Subclasses run one incremental SVD
    family.

    BaseDriver subclasses must define the following:
    - ``algorithm`` class attribute, the id used by ``driver_registry``.
    - ``start()`` method that turns the rank-1 initial ``CoreSVD`` into the
      family state.
    - ``update()`` method with the signature of the ``update_isvd*``
      functions.
    - ``finish()`` method that turns the last state into a ``CoreSVD``.
    - ``left_factor()`` method that returns the current left factor of a
      state (for orthogonality sampling).

    ``reorthogonalize()`` runs after each update and does nothing by default.
    """

    algorithm = None

    def start(self, core):
        raise NotImplementedError("start() is abstract")

    def update(self, state, u, weight, config, column_index=None,
               instrument=False):
        raise NotImplementedError("update() is abstract")

    def reorthogonalize(self, state, report, weight, config):
        return state

    def finish(self, state):
        raise NotImplementedError("finish() is abstract")

    def left_factor(self, state):
        raise NotImplementedError("left_factor() is abstract")

    def run(self, columns, weight, config=None, instrument=False,
            sample_every=None, observer=None):
        """Runs the family over ``columns``.

        :param instrument: check interlacing of every bordered SVD.
        :param sample_every: orthogonality sampling stride (defaults to the
            ``ISVD_ORTH_SAMPLE_EVERY`` setting).
        :param observer: optional callable invoked as ``observer(state,
            report)`` after every update.
        :returns: ``(CoreSVD, RunReport)``
        """
        if config is None:
            config = ToleranceConfig.from_settings()
        if sample_every is None:
            sample_every = get_setting("ORTH_SAMPLE_EVERY")
        tracker = _RunTracker(self, weight, sample_every, instrument)

        def observe(state, update):
            tracker.observe(state, update)
            if observer is not None:
                observer(state, update)

        started = time.perf_counter()
        try:
            core = run_updates(
                columns,
                weight,
                config,
                self.start,
                self.update,
                self.finish,
                reorthogonalize=self.reorthogonalize,
                observer=observe,
                instrument=instrument,
            )
        except RunStopped as error:
            error.partial = self._partial(tracker, weight, config, started)
            if error.partial is not None:
                error.partial[1].stopped = f"{type(error).__name__}: {error}"
            raise
        report = tracker.report
        self._summarize(report, core, weight, config, started)
        log.info(
            f"{self.algorithm}: m={report.m} n={report.n} rank={report.rank} "
            f"in {report.wall_time:.3f}s"
        )
        return core, report

    def _partial(self, tracker, weight, config, started):
        """Factors and report of the columns absorbed before a run stopped,
        or ``None`` if it stopped at the first update.
        """
        if tracker.state is None:
            return None
        core = self.finish(tracker.state)
        report = tracker.report
        self._summarize(report, core, weight, config, started)
        log.warning(
            f"{self.algorithm}: stopped after {report.n} columns at rank "
            f"{report.rank}"
        )
        return core, report

    def _summarize(self, report, core, weight, config, started):
        report.wall_time = time.perf_counter() - started
        report.tol = float(config.tol)
        report.m = core.m
        report.n = core.columns_seen
        report.rank = core.rank
        report.singular_values = [float(value) for value in core.sigma]
        report.orthogonality.append(
            [core.columns_seen, orthogonality_error(core.Q, weight)]
        )


class Isvd1Driver(BaseDriver):
    """Direct updates, with weighted Gram-Schmidt after each one."""

    algorithm = "isvd1"

    def start(self, core):
        return core

    def update(self, state, u, weight, config, column_index=None,
               instrument=False):
        return update_isvd1(
            state, u, weight, config, column_index, instrument
        )

    def reorthogonalize(self, state, report, weight, config):
        return reorthogonalize_isvd1(state, report, weight, config)

    def finish(self, state):
        return state

    def left_factor(self, state):
        return state.Q


class Isvd2Driver(BaseDriver):
    """Five-matrix updates; only the small left factor is reorthogonalized."""

    algorithm = "isvd2"

    def start(self, core):
        return FiveMatrixState.from_core(core)

    def update(self, state, u, weight, config, column_index=None,
               instrument=False):
        return update_isvd2(
            state, u, weight, config, column_index, instrument
        )

    def reorthogonalize(self, state, report, weight, config):
        return reorthogonalize_isvd2(state, report, weight, config)

    def finish(self, state):
        return state.to_core()

    def left_factor(self, state):
        return state.Q_out @ state.Q_small


class _BufferedDriver(BaseDriver):

    def start(self, core):
        return BufferedState.from_core(core)

    def left_factor(self, state):
        return state.core.Q @ state.Q0


class Isvd3Driver(_BufferedDriver):
    """Buffered updates with a lazily applied small rotation."""

    algorithm = "isvd3"

    def update(self, state, u, weight, config, column_index=None,
               instrument=False):
        return update_isvd3(
            state, u, weight, config, column_index, instrument
        )

    def finish(self, state):
        return finalize_isvd3(state)


class Isvd4Driver(_BufferedDriver):
    """Buffered updates with the rotation folded in at every rank event."""

    algorithm = "isvd4"

    def update(self, state, u, weight, config, column_index=None,
               instrument=False):
        return update_isvd4(
            state, u, weight, config, column_index, instrument
        )

    def finish(self, state):
        return finalize_isvd4(state)
