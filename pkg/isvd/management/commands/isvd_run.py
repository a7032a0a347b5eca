from isvd.drivers import driver_registry
from isvd.exceptions import RunStopped
from isvd.factors import ToleranceConfig
from isvd.formats import save_factors, write_report
from isvd.inputs import InputSource, resolve_weight

from ..base import IsvdCommand


class Command(IsvdCommand):

    help = "Run an incremental SVD over a column stream."

    def add_arguments(self, parser):
        parser.add_argument(
            "--algorithm",
            choices=driver_registry.algorithms,
            required=True,
            help="Incremental SVD family to run.",
        )
        parser.add_argument(
            "--input",
            dest="input_spec",
            required=True,
            metavar="PATH",
            help="Column stream file or 'gen:mesh16,dt0.01,...' spec.",
        )
        parser.add_argument(
            "--weight",
            default="identity",
            metavar="WSPEC",
            help=(
                "Inner product weight: identity, mass or file:PATH "
                "(default=%(default)s)."
            ),
        )
        parser.add_argument(
            "--tol",
            type=float,
            help="Residual threshold (default: the ISVD_TOL setting).",
        )
        parser.add_argument(
            "--max-rank",
            type=int,
            help="Rank cap (default: the ISVD_MAX_RANK setting).",
        )
        parser.add_argument(
            "--sample-every",
            metavar="N",
            type=int,
            help="Sample the orthogonality error every N updates.",
        )
        parser.add_argument(
            "--instrument",
            action="store_true",
            help="Check interlacing of every bordered SVD.",
        )
        parser.add_argument(
            "--report",
            dest="report_path",
            metavar="PATH",
            help="Write the run report (.json or .csv).",
        )
        parser.add_argument(
            "--report-format",
            choices=["json", "csv"],
            help="Report format (default: from the --report extension).",
        )
        parser.add_argument(
            "--save-factors",
            dest="factors_dir",
            metavar="DIR",
            help="Save Q, sigma and R to DIR.",
        )

    def perform(self, algorithm, input_spec, weight, tol, max_rank,
                sample_every, instrument, report_path, report_format,
                factors_dir, **options):
        driver = driver_registry.get(algorithm)
        config = ToleranceConfig.from_settings(tol=tol, max_rank=max_rank)
        source = InputSource.from_spec(input_spec)
        weight_operator = resolve_weight(weight, source)
        log_head = f"running {algorithm} on {source} (m={source.m}) ... "
        try:
            with self.action_log(log_head) as stream:
                core, run_report = driver.run(
                    source.columns(),
                    weight_operator,
                    config,
                    instrument=instrument,
                    sample_every=sample_every,
                )
                stream.write(f"done (rank {core.rank})")
        except RunStopped as error:
            self.logfile.write("stopped\n")
            if error.partial is not None and report_path:
                write_report(report_path, error.partial[1], report_format)
                self.log_info(f"partial report: {report_path}")
            raise
        self.log_info(
            f"n={run_report.n} sigma_1={core.sigma[0]:.17g} "
            f"E_W={run_report.orthogonality[-1][1]:.3e} "
            f"time={run_report.wall_time:.3f}s"
        )
        for branch, count in run_report.branches.items():
            self.log_info(f"{branch}: {count}")
        if report_path:
            write_report(report_path, run_report, report_format)
            self.log_info(f"report: {report_path}")
        if factors_dir:
            save_factors(factors_dir, core, config.tol)
            self.log_info(f"factors: {factors_dir}")
        if instrument:
            self.log_info(
                f"interlacing: {run_report.interlacing_checked} checked, "
                f"{run_report.interlacing_failures} failed"
            )
            if run_report.interlacing_failures:
                raise self.property_failure(
                    f"{run_report.interlacing_failures} bordered SVDs "
                    "violated interlacing"
                )
