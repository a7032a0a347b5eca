from isvd.utils import plural
from isvd.verify import SUITES, run_suite

from ..base import IsvdCommand


class Command(IsvdCommand):

    help = "Run a property suite and print every result with its witness."

    def add_arguments(self, parser):
        parser.add_argument(
            "--suite",
            choices=sorted(SUITES),
            required=True,
            help="Property suite to run.",
        )
        parser.add_argument(
            "--seed",
            default=0,
            metavar="N",
            type=int,
            help="Seed of the random generator (default=%(default)s).",
        )
        parser.add_argument(
            "--trials",
            metavar="K",
            type=int,
            help="Random instances per property (default depends on suite).",
        )

    def perform(self, suite, seed, trials, **options):
        if trials is not None and trials < 1:
            raise ValueError("--trials must be a positive integer")
        results = run_suite(suite, seed=seed, trials=trials)
        for result in results:
            self.logfile.write(f"{result}\n")
        failed = [result for result in results if not result.passed]
        if failed:
            count = plural(len(failed), "property", "properties")
            raise self.property_failure(f"{count} failed in suite {suite!r}")
        count = plural(len(results), "property", "properties")
        self.log_info(f"{suite}: {count} passed")
