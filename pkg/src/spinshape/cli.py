"""Command-line interface.

Commands: validate, spin enumerate, solve, roundtrip.  Exit codes: 0 success
(solve: residual targets met), 1 invalid input or flags, 2 solve ran but the
residual targets were not met (outputs still written), 3 internal error.
"""
from __future__ import annotations

import os

_threads = os.environ.get("SPINSHAPE_THREADS")
if _threads:  # cap BLAS pools before numpy spins them up
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import sys

import numpy as np

from . import __version__
from .dirac import DiracOperator
from .errors import FormatError, InvalidConfig, SpinshapeError
from .formats import load_any, read_obj, write_obj
from .mesh import homology_basis
from .reconstruct import derive_spinor_from_embedding, diagnostics, integrate
from .report import build_report, render_trace_figure, write_report, write_trace_csv
from .solve import SolveConfig, minimize
from .spin import (
    base_spin_structure,
    build_face_charts,
    enumerate_spin_classes,
    structure_for_class,
    transition_lifts,
    vertex_lift_check,
)


def _load(path: str):
    if not os.path.exists(path):
        raise FormatError(f"{path}: no such file")
    return load_any(path)


def cmd_validate(args) -> int:
    m, _ = _load(args.path)
    mesh = m.mesh
    print(f"vertices {mesh.vertex_count}")
    print(f"edges {mesh.edge_count}")
    print(f"faces {mesh.face_count}")
    print(f"genus {mesh.genus}")
    return 0


def cmd_spin_enumerate(args) -> int:
    m, _ = _load(args.path)
    charts = build_face_charts(m)
    lifts = transition_lifts(m, charts)
    base = base_spin_structure(m, lifts)
    hb = homology_basis(m.mesh)
    classes = enumerate_spin_classes(m, base, hb)
    for st in classes:
        if not vertex_lift_check(m, lifts, st).all():
            raise RuntimeError(f"class {st.class_bits} fails the vertex lift check")
        flipped = int(np.sum(st.signs != base.signs))
        print(f"class {st.class_bits} edges-flipped {flipped}")
    if args.dump_signs:
        with open(args.dump_signs, "w", encoding="utf-8") as fh:
            for st in classes:
                fh.write(f"class {st.class_bits}\n")
                for (a, b), sgn in zip(m.mesh.edges, st.signs):
                    fh.write(f"s {a} {b} {'+1' if sgn > 0 else '-1'}\n")
    return 0


def cmd_solve(args) -> int:
    m, _ = _load(args.path)
    charts = build_face_charts(m)
    lifts = transition_lifts(m, charts)
    hb = homology_basis(m.mesh)
    base = base_spin_structure(m, lifts)

    p2 = 2 * m.mesh.genus
    bits = args.spin_class if args.spin_class is not None else "0" * p2
    try:
        structure = structure_for_class(base, hb, bits)
    except ValueError as exc:
        raise InvalidConfig(str(exc)) from exc

    cfg = SolveConfig(
        mode=args.mode,
        eps1=args.eps1,
        eps2=args.eps2,
        eps3_init=args.eps3,
        eps3_decay=args.eps3_decay,
        eps3_floor=args.eps3_floor,
        period_weight=args.period_weight,
        period_growth=args.period_growth,
        max_outer=args.max_outer,
        max_inner=args.max_inner,
        residual_target=args.residual_target,
        rng_seed=args.seed,
        init=args.init,
    )
    cfg.validate()

    result = minimize(m, structure, cfg, charts=charts, hb=hb)

    op = DiracOperator(m, charts, lifts)
    ch = op.channels(result.psi, structure)
    imm = integrate(result.psi, op, channels=ch)
    dist = diagnostics(m, imm.positions, charts=charts, channels=ch)
    mismatch = np.linalg.norm(op.edge_mismatch(result.psi)[:, 1:], axis=1)

    if args.output:
        write_obj(args.output, imm.positions, m.mesh.faces)
    if args.report:
        recon = {
            "closure_max": imm.closure_max,
            "closure_rms": imm.closure_rms,
            "edge_mismatch_max": float(mismatch.max()),
            "edge_mismatch_mean": float(mismatch.mean()),
        }
        report = build_report(
            input_path=args.path,
            m=m,
            spin_class=bits,
            config=cfg.to_dict(),
            result=result,
            reconstruction=recon,
            distortion=dist.summary(),
            artifact_version=__version__,
        )
        write_report(args.report, report)
    if args.figures:
        os.makedirs(args.figures, exist_ok=True)
        write_trace_csv(os.path.join(args.figures, "trace.csv"), result)
        render_trace_figure(os.path.join(args.figures, "trace.png"), result)

    return 0 if result.converged else 2


def cmd_roundtrip(args) -> int:
    mesh, positions = read_obj(args.path)
    psi, structure, metric, charts, lifts = derive_spinor_from_embedding(mesh, positions)
    op = DiracOperator(metric, charts, lifts)
    ch = op.channels(psi, structure)
    hb = homology_basis(mesh)
    pvec = op.periods(psi, hb)
    imm = integrate(psi, op, channels=ch)

    diameter = float(
        np.linalg.norm(positions.max(axis=0) - positions.min(axis=0))
    )
    aligned = imm.positions - imm.positions[0] + positions[0]
    pos_err = float(np.linalg.norm(aligned - positions, axis=1).max())
    mismatch = np.linalg.norm(op.edge_mismatch(psi)[:, 1:], axis=1)
    pnorm = float(np.linalg.norm(pvec, axis=1).max()) if len(pvec) else 0.0

    ok = pos_err <= 1e-8 * diameter
    print(f"position-error {pos_err!r}")
    print(f"diameter {diameter!r}")
    print(f"edge-mismatch-max {float(mismatch.max())!r}")
    print(f"period-norm-max {pnorm!r}")
    print(f"median-H {float(np.median(ch.mean_curvature()))!r}")
    print(f"lift-check {'pass' if vertex_lift_check(metric, lifts, structure).all() else 'FAIL'}")
    if args.report:
        report = {
            "input": args.path,
            "position_error": pos_err,
            "diameter": diameter,
            "edge_mismatch_max": float(mismatch.max()),
            "period_norm_max": pnorm,
            "median_H": float(np.median(ch.mean_curvature())),
            "roundtrip_ok": bool(ok),
        }
        write_report(args.report, report)
    return 0 if ok else 2


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinshape",
        description="Conformal/isometric immersions of metric surfaces via face spinors.",
    )
    parser.add_argument("--version", action="version", version=f"spinshape {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a metricmesh/OBJ file and print counts")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    spin = sub.add_parser("spin", help="spin structure operations")
    spin_sub = spin.add_subparsers(dest="spin_command", required=True)
    p = spin_sub.add_parser("enumerate", help="list the 2^(2p) regular homotopy classes")
    p.add_argument("path")
    p.add_argument("--dump-signs", metavar="PATH", default=None)
    p.set_defaults(func=cmd_spin_enumerate)

    p = sub.add_parser("solve", help="minimize the channel energy and reconstruct")
    p.add_argument("path")
    p.add_argument("--mode", choices=("conformal", "isometric"), default="conformal")
    p.add_argument("--spin-class", default=None, metavar="BITSTRING")
    p.add_argument("--eps1", type=float, default=1.0)
    p.add_argument("--eps2", type=float, default=1.0)
    p.add_argument("--eps3", type=float, default=1.0)
    p.add_argument("--eps3-decay", type=float, default=0.5)
    p.add_argument("--eps3-floor", type=float, default=1e-4)
    p.add_argument("--period-weight", type=float, default=1.0)
    p.add_argument("--period-growth", type=float, default=2.0)
    p.add_argument("--max-outer", type=int, default=40)
    p.add_argument("--max-inner", type=int, default=500)
    p.add_argument("--residual-target", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=("ones", "random"), default="ones")
    p.add_argument("-o", "--output", metavar="OBJ", default=None)
    p.add_argument("--report", metavar="JSON", default=None)
    p.add_argument("--figures", metavar="DIR", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("roundtrip", help="derive a spinor from an OBJ and reintegrate it")
    p.add_argument("path")
    p.add_argument("--report", metavar="JSON", default=None)
    p.set_defaults(func=cmd_roundtrip)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpinshapeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - internal faults
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
