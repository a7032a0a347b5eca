from isvd.datagen import (
    KIND_LOAD,
    KIND_NODAL,
    SnapshotConfig,
    assemble_mass_matrix,
    build_mesh,
    snapshot_stream,
)
from isvd.formats import write_column_stream, write_weight_matrix
from isvd.inputs import mass_matrix_path

from ..base import IsvdCommand


class Command(IsvdCommand):

    help = (
        "Write a column stream of cos(t(x+y)) snapshots on a uniform "
        "triangulation of the unit square."
    )

    def add_arguments(self, parser):
        parser.add_argument(
            "--mesh-n",
            required=True,
            metavar="K",
            type=int,
            help="Cells per side of the mesh (2*K*K triangles).",
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
            "--kind",
            choices=[KIND_LOAD, KIND_NODAL],
            default=KIND_NODAL,
            help=(
                "B: load vectors M*u, U: nodal values (default=%(default)s). "
                "The mass matrix is written next to B streams."
            ),
        )
        parser.add_argument(
            "--with-mass",
            action="store_true",
            help="Also write the mass matrix next to U streams.",
        )
        parser.add_argument(
            "--out",
            required=True,
            metavar="PATH",
            help="Column stream file to write.",
        )

    def perform(self, mesh_n, dt, t_end, kind, with_mass, out, **options):
        snapshots = SnapshotConfig(t_end=t_end, dt=dt, kind=kind)
        mesh = build_mesh(mesh_n)
        mass = assemble_mass_matrix(mesh)
        log_head = (
            f"gen: mesh {mesh_n} ({mesh.vertex_count} vertices), "
            f"{snapshots.column_count} x {kind} ... "
        )
        with self.action_log(log_head) as stream:
            count = write_column_stream(
                out,
                mesh.vertex_count,
                snapshot_stream(mesh, snapshots, mass),
            )
            stream.write(f"done ({count} columns)")
        if kind == KIND_LOAD or with_mass:
            path = mass_matrix_path(out)
            write_weight_matrix(path, mass)
            self.log_info(f"mass matrix: {path}")
