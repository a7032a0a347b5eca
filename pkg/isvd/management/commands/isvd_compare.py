from isvd.exceptions import DimensionMismatch
from isvd.formats import load_factors
from isvd.inputs import InputSource, resolve_weight
from isvd.verify import (
    check_desk_scale,
    compare_spectra,
    dense_svd_oracle,
    orthogonality_error,
)

from ..base import IsvdCommand


class Command(IsvdCommand):

    help = (
        "Compare saved factors against the dense SVD of the same input and "
        "print the per-index spectrum errors and the orthogonality error."
    )

    def add_arguments(self, parser):
        parser.add_argument(
            "--factors",
            required=True,
            metavar="DIR",
            help="Directory written by 'isvd_run --save-factors'.",
        )
        parser.add_argument(
            "--input",
            dest="input_spec",
            required=True,
            metavar="PATH",
            help="Column stream file or 'gen:' spec the factors came from.",
        )
        parser.add_argument(
            "--weight",
            default="identity",
            metavar="WSPEC",
            help="identity, mass or file:PATH (default=%(default)s).",
        )
        parser.add_argument(
            "--floor",
            default=1e-10,
            metavar="F",
            type=float,
            help=(
                "Relative errors are taken against max(sigma_i, F * sigma_1) "
                "(default=%(default)s)."
            ),
        )
        parser.add_argument(
            "--count",
            metavar="N",
            type=int,
            help="Compare only the leading N singular values.",
        )
        parser.add_argument(
            "--max-rel-error",
            metavar="E",
            type=float,
            help="Exit with status 1 if the max relative error exceeds E.",
        )

    def perform(self, factors, input_spec, weight, floor, count,
                max_rel_error, **options):
        core, manifest = load_factors(factors)
        source = InputSource.from_spec(input_spec)
        if source.m != core.m:
            raise DimensionMismatch(
                f"factors have m={core.m}, input has m={source.m}"
            )
        check_desk_scale(source.m, manifest["n"])
        weight_operator = resolve_weight(weight, source)
        with self.action_log(f"oracle: dense SVD of {source} ... ") as stream:
            oracle = dense_svd_oracle(source.matrix(), weight_operator)
            stream.write(f"done (rank {oracle.rank})")
        comparison = compare_spectra(
            core.sigma,
            oracle.sigma,
            floor=floor * oracle.sigma[0],
            count=count,
        )
        self.logfile.write("index,computed,oracle,abs_error,rel_error\n")
        for index in range(comparison.count):
            computed = core.sigma[index] if index < core.rank else 0.0
            reference = oracle.sigma[index] if index < oracle.rank else 0.0
            self.logfile.write(
                f"{index},{computed:.17g},{reference:.17g},"
                f"{comparison.abs_errors[index]:.3e},"
                f"{comparison.rel_errors[index]:.3e}\n"
            )
        self.log_info(
            f"max relative error {comparison.max_rel_error:.3e} over "
            f"{comparison.count} values"
        )
        self.log_info(
            f"E_W {orthogonality_error(core.Q, weight_operator):.3e}"
        )
        worst = comparison.max_rel_error
        if max_rel_error is not None and worst > max_rel_error:
            raise self.property_failure(
                f"max relative error {worst:.3e} exceeds "
                f"{max_rel_error:.3e}"
            )
