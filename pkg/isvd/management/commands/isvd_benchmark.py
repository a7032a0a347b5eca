from isvd.benchmark import time_sections
from isvd.datagen import SnapshotConfig, assemble_mass_matrix, build_mesh
from isvd.datagen import snapshot_stream
from isvd.factors import ToleranceConfig
from isvd.linalg import WeightOperator

from ..base import IsvdCommand


class Command(IsvdCommand):

    help = "Time the incremental SVD families section by section."

    def add_arguments(self, parser):
        parser.add_argument(
            "--mesh-n",
            required=True,
            metavar="K",
            type=int,
            help="Cells per side of the snapshot mesh.",
        )
        parser.add_argument(
            "--dt",
            default=SnapshotConfig.dt,
            metavar="D",
            type=float,
            help="Time step between snapshots (default=%(default)s).",
        )
        parser.add_argument(
            "--t-end",
            default=SnapshotConfig.t_end,
            metavar="T",
            type=float,
            help="Last snapshot time (default=%(default)s).",
        )
        parser.add_argument(
            "--weight",
            choices=["identity", "mass"],
            default="identity",
            help="Inner product weight (default=%(default)s).",
        )
        parser.add_argument(
            "--algorithms",
            default="isvd1,isvd3",
            metavar="A,B",
            help="Comma separated algorithm ids (default=%(default)s).",
        )
        parser.add_argument(
            "--tol",
            type=float,
            help="Residual threshold (default: the ISVD_TOL setting).",
        )

    def perform(self, mesh_n, dt, t_end, weight, algorithms, tol, **options):
        config = ToleranceConfig.from_settings(tol=tol)
        snapshots = SnapshotConfig(t_end=t_end, dt=dt)
        mesh = build_mesh(mesh_n)
        if weight == "mass":
            weight_operator = assemble_mass_matrix(mesh)
        else:
            weight_operator = WeightOperator.identity(mesh.vertex_count)
        totals = {}
        for algorithm in filter(None, algorithms.split(",")):
            log_head = f"timing {algorithm} ... "
            with self.action_log(log_head) as stream:
                times = time_sections(
                    algorithm,
                    snapshot_stream(mesh, snapshots),
                    weight_operator,
                    config,
                )
                stream.write(f"done ({times.total:.3f}s, rank {times.rank})")
            for section, seconds in sorted(times.sections.items()):
                self.logfile.write(f"{algorithm},{section},{seconds:.6f}\n")
            totals[algorithm] = times.total
        if "isvd1" in totals and "isvd3" in totals and totals["isvd3"] > 0:
            ratio = totals["isvd1"] / totals["isvd3"]
            self.log_info(f"isvd1/isvd3 time ratio {ratio:.2f}")
