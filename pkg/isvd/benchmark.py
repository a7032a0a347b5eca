"""Wall-clock breakdown of incremental runs by update branch."""
import time
from collections import defaultdict
from dataclasses import dataclass, field

from .drivers import driver_registry
from .exceptions import EmptyStreamError
from .isvd import initialize

SECTION_INITIALIZE = "initialize"
SECTION_REORTHOGONALIZE = "reorthogonalize"
SECTION_FINISH = "finish"


@dataclass
class SectionTimes:
    """Seconds spent per section. Update time is attributed to the branch the
    update took (``buffered``, ``rank-grew``, ...); reorthogonalization and
    the final flush have sections of their own.
    """

    algorithm: str
    columns: int = 0
    rank: int = 0
    sections: dict = field(default_factory=lambda: defaultdict(float))

    @property
    def total(self):
        return sum(self.sections.values())


def time_sections(algorithm, columns, weight, config):
    """Runs ``algorithm`` over ``columns`` and times every section.

    :returns: ``SectionTimes``
    :raises: ``UnknownAlgorithm``, ``EmptyStreamError``
    """
    driver = driver_registry.get(algorithm)
    times = SectionTimes(algorithm)
    clock = time.perf_counter
    columns = iter(columns)
    try:
        first = next(columns)
    except StopIteration:
        raise EmptyStreamError("the column stream is empty") from None

    started = clock()
    state = driver.start(initialize(first, weight))
    times.sections[SECTION_INITIALIZE] += clock() - started
    times.columns = 1
    for index, column in enumerate(columns, start=2):
        started = clock()
        state, report = driver.update(state, column, weight, config, index)
        updated = clock()
        state = driver.reorthogonalize(state, report, weight, config)
        times.sections[report.branch] += updated - started
        times.sections[SECTION_REORTHOGONALIZE] += clock() - updated
        times.columns = index

    started = clock()
    core = driver.finish(state)
    times.sections[SECTION_FINISH] += clock() - started
    times.rank = core.rank
    return times
