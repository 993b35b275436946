"""
Command-line interface
Subcommands: minimize, evolve, mesh, nondim, verify
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .energy import energy
from .errors import ConfigError, MeshError, NumericalError
from .experiments import EXPERIMENTS, PreparedRun, experiment, prepare
from .fields import constraint_report, project_pair
from .gradient_flow import minimize, step_size_advisory
from .llg import evolve, relax, weak_energy_check
from .mesh import (dump_tetmesh, generate_box_mesh, generate_disk_mesh, load_tetmesh, mesh_stats,
                   read_gmsh_msh2, write_gmsh_msh2)
from .models.material import PhysicalParams
from .models.run_config import RunConfig
from .nondim import derived_summary, nanodisk_params
from .report_generator import generate_run_report
from .utils import (format_energy, format_seconds, load_json, save_json, write_manifest,
                    write_trace, write_vtk)
from .verify import SUITES, run_all

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _add_run_options(parser: argparse.ArgumentParser, default_experiment: str):
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--experiment", default=None, choices=sorted(EXPERIMENTS),
                        help=f"named experiment (default {default_experiment})")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--preset", choices=["coupled", "decoupled", "general-theta", "llg"])
    parser.add_argument("--theta", type=float, nargs=3, metavar=("T1", "T2", "T3"))
    parser.add_argument("--metric", choices=["L2", "LumpedL2", "H1"])
    parser.add_argument("--tau", type=float)
    parser.add_argument("--eps", type=float)
    parser.add_argument("--max-steps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--initial", choices=["constant", "random", "skyrmion", "vtk"])
    parser.add_argument("--initial-path", help="snapshot for --initial vtk")
    parser.add_argument("--mesh-n", type=int, help="box cells per direction or disk rings")
    parser.add_argument("--solver", choices=["gmres", "cg"])
    parser.add_argument("--preconditioner", choices=["block_jacobi", "ilu", "none"])
    parser.add_argument("--parallel", action="store_true", help="solve sublattices concurrently")
    parser.add_argument("--pdf", action="store_true", help="also write report.pdf")
    parser.set_defaults(default_experiment=default_experiment)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afmflow",
        description="Finite element minimization and dynamics of two-sublattice magnets")
    parser.add_argument("--version", action="version", version=f"afmflow {__version__}")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("minimize", help="gradient-flow energy minimization")
    _add_run_options(p, "toy-cube")

    p = sub.add_parser("evolve", help="LLG dynamics with the tangent plane scheme")
    _add_run_options(p, "skyrmion-pulse")
    p.add_argument("--T", type=float, help="final time, in the configured time unit")
    p.add_argument("--snapshot-every", type=int)
    p.add_argument("--no-precession", action="store_true")

    p = sub.add_parser("mesh", help="generate, convert or inspect meshes")
    p.add_argument("action", choices=["generate", "convert", "stats"])
    p.add_argument("paths", nargs="*", help="input and/or output files")
    p.add_argument("--kind", choices=["box", "disk"], default="box")
    p.add_argument("--n", type=int, nargs=3, default=[8, 8, 8])
    p.add_argument("--radius", type=float, default=30.0)
    p.add_argument("--thickness", type=float, default=1.0)
    p.add_argument("--n-radial", type=int, default=10)
    p.add_argument("--n-layers", type=int, default=1)

    p = sub.add_parser("nondim", help="print derived dimensionless parameters")
    p.add_argument("--config", help="JSON file with an SI material section")
    p.add_argument("--nanodisk", "--table3", dest="nanodisk", action="store_true",
                   help="use the skyrmion nanodisk material")
    p.add_argument("--L", type=float, help="reference length in m")

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", action="append", choices=sorted(SUITES))
    p.add_argument("--quick", action="store_true", help="reduced sample counts")
    p.add_argument("--out", help="write verify.json here")
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Config file or named experiment with command-line overrides applied"""
    if args.config:
        data = load_json(args.config)
    else:
        data = experiment(args.experiment or args.default_experiment).to_dict()
    algorithm = data.setdefault("algorithm", {})
    output = data.setdefault("output", {})
    mesh = data.setdefault("mesh", {})

    overrides = {"preset": args.preset, "metric": args.metric, "tau": args.tau, "eps": args.eps,
                 "max_steps": args.max_steps, "seed": args.seed}
    algorithm.update({k: v for k, v in overrides.items() if v is not None})
    if args.theta is not None:
        algorithm["theta"] = dict(zip(("theta1", "theta2", "theta3"), args.theta))
    if args.initial_path is not None:
        if args.initial not in (None, "vtk"):
            raise ConfigError("--initial-path only applies to --initial vtk")
        algorithm["initial"] = {"kind": "vtk", "path": args.initial_path}
    elif args.initial is not None:
        algorithm["initial"] = {"kind": args.initial}
    solver = algorithm.setdefault("solver", {})
    if args.solver:
        solver["method"] = args.solver
    if args.preconditioner:
        solver["preconditioner"] = args.preconditioner
    if args.parallel:
        solver["parallel"] = True
    if args.mesh_n is not None:
        if mesh.get("kind", "box") == "disk":
            mesh["n_radial"] = args.mesh_n
        else:
            mesh["n"] = [args.mesh_n] * 3
    if args.out:
        output["directory"] = args.out
    if args.pdf:
        output["formats"] = sorted(set(output.get("formats", ["csv", "vtk"])) | {"pdf"})
    if getattr(args, "T", None) is not None:
        algorithm["T"] = args.T
    if getattr(args, "snapshot_every", None) is not None:
        output["snapshot_every"] = args.snapshot_every
    if getattr(args, "no_precession", False):
        algorithm["include_precession"] = False
    return RunConfig.from_dict(data)


def _summary(run: PreparedRun, command: str, reason: str, steps: int, pair, initial_energy) -> Dict:
    final = energy(pair, run.params)
    projected = energy(project_pair(pair), run.params)
    return {
        "name": run.config.name,
        "command": command,
        "reason": reason,
        "steps": steps,
        "initial_energy": initial_energy.to_dict(),
        "final_energy": final.to_dict(),
        "projected_energy": projected.total,
        "constraint": constraint_report(pair).to_dict(),
    }


def _finish(run: PreparedRun, summary: Dict, trace, outputs: List[str], advisory=None,
            extra: Optional[Dict] = None) -> Path:
    out_dir = Path(run.config.output.directory)
    formats = run.config.output.formats
    if "csv" in formats:
        outputs.append(str(write_trace(trace, out_dir / "trace.csv")))
    if "pdf" in formats:
        outputs.append(generate_run_report(summary, run.config.to_dict(), str(out_dir),
                                           advisory, run.derived))
    if extra:
        summary.update(extra)
    return write_manifest(out_dir, run.config.to_dict(), run.derived, summary, outputs)


def _print_summary(summary: Dict):
    print(f"{summary['command']} {summary['name']}: {summary['reason']} after "
          f"{summary['steps']} step(s)")
    print(f"  energy       {format_energy(summary['initial_energy']['total'])} -> "
          f"{format_energy(summary['final_energy']['total'])}")
    print(f"  projected    {format_energy(summary['projected_energy'])}")
    c = summary["constraint"]
    print(f"  err_L1       {max(c['err_L1']):.3e}   err_Linf {max(c['err_Linf']):.3e}")


def cmd_minimize(args) -> int:
    run = prepare(load_run_config(args))
    algorithm = run.config.algorithm
    out_dir = Path(run.config.output.directory)
    outputs = []
    if "vtk" in run.config.output.formats:
        outputs.append(str(write_vtk(run.mesh, run.initial, (run.params.eta_s1, run.params.eta_s2),
                                     out_dir / "initial.vtk")))
    if algorithm.is_llg:
        result = relax(run.initial, run.params, run.llg, run.flow.tau, run.flow.eps,
                       run.flow.max_steps, run.solver, algorithm.include_precession)
    else:
        result = minimize(run.initial, run.params, run.flow)
    if "vtk" in run.config.output.formats:
        outputs.append(str(write_vtk(run.mesh, result.pair,
                                     (run.params.eta_s1, run.params.eta_s2),
                                     out_dir / "final.vtk")))
    summary = _summary(run, "minimize", result.reason, result.steps, result.pair,
                       result.initial_energy)
    summary["stop_quantity"] = result.stop_quantity
    _finish(run, summary, result.trace, outputs, result.advisory)
    _print_summary(summary)
    return EXIT_OK


def cmd_evolve(args) -> int:
    config = load_run_config(args)
    if config.algorithm.T is None:
        raise ConfigError("evolve needs a final time T (config or --T)")
    run = prepare(config)
    out_dir = Path(run.config.output.directory)
    traj = evolve(run.initial, run.params, run.llg, run.schedule, run.T, run.flow.tau,
                  run.config.output.snapshot_every, run.solver,
                  run.config.algorithm.include_precession)
    outputs = []
    if "vtk" in run.config.output.formats:
        for step, pair in zip(traj.snapshot_steps, traj.snapshots):
            outputs.append(str(write_vtk(run.mesh, pair, (run.params.eta_s1, run.params.eta_s2),
                                         out_dir / f"snapshot_{step:07d}.vtk",
                                         title=f"step {step} t={step * traj.tau:.6g}")))
    weak = weak_energy_check(traj, run.params, run.llg)
    summary = _summary(run, "evolve", "completed", traj.n_steps, traj.final, traj.initial_energy)
    advisory = step_size_advisory(run.params, run.flow, mesh_stats(run.mesh), llg=run.llg)
    _finish(run, summary, traj.trace, outputs, advisory,
            {"weak_energy_check": weak.to_dict(),
             "max_stability_sum": traj.max_stability_sum,
             "time_scale_s": run.time_scale})
    _print_summary(summary)
    if run.time_scale is not None:
        print(f"  final time   {format_seconds(traj.n_steps * traj.tau * run.time_scale)}")
    print(f"  weak energy  {weak.value:.4e} (budget {weak.budget:.4e}) "
          f"{'pass' if weak.passed else 'FAIL'}")
    return EXIT_OK


def _read_any_mesh(path: str):
    if path.endswith(".tetmesh"):
        return load_tetmesh(path)
    mesh, skipped = read_gmsh_msh2(path)
    print(f"skipped {skipped} non-tetrahedral element(s) in {path}")
    return mesh


def _write_any_mesh(mesh, path: str):
    if path.endswith(".tetmesh"):
        return dump_tetmesh(mesh, path)
    return write_gmsh_msh2(mesh, path)


def cmd_mesh(args) -> int:
    if args.action == "generate":
        if len(args.paths) != 1:
            raise ConfigError("mesh generate needs one output path")
        if args.kind == "box":
            mesh = generate_box_mesh(*args.n)
        else:
            mesh = generate_disk_mesh(args.radius, args.thickness, args.n_radial, args.n_layers)
        path = _write_any_mesh(mesh, args.paths[0])
        print(f"wrote {path}")
    elif args.action == "convert":
        if len(args.paths) != 2:
            raise ConfigError("mesh convert needs input and output paths")
        mesh = _read_any_mesh(args.paths[0])
        path = _write_any_mesh(mesh, args.paths[1])
        print(f"wrote {path}")
    else:
        if len(args.paths) != 1:
            raise ConfigError("mesh stats needs one input path")
        mesh = _read_any_mesh(args.paths[0])
    stats = mesh_stats(mesh)
    for key, value in stats.to_dict().items():
        print(f"  {key:<17} {value:.6g}" if isinstance(value, float) else f"  {key:<17} {value}")
    return EXIT_OK


def cmd_nondim(args) -> int:
    if args.config:
        data = load_json(args.config)
        section = data.get("material", data)
        if "si" not in section:
            raise ConfigError("nondim needs a material section with 'si' data")
        physical = PhysicalParams.from_dict(section["si"])
    elif args.nanodisk:
        physical = nanodisk_params(L=args.L or 1e-9)
    else:
        raise ConfigError("nondim needs --config or --nanodisk")
    summary = derived_summary(physical)
    m = summary["material"]
    print(f"a11 = {m['a11']:.6g}   a22 = {m['a22']:.6g}   a12 = {m['a12']:.6g}   "
          f"a0 = {m['a0']:.6g}")
    print(f"q1 = {m['q1']:.6g}   q2 = {m['q2']:.6g}   eta_s = ({m['eta_s1']:.6g}, {m['eta_s2']:.6g})")
    llg = summary["llg"]
    print(f"eta = ({llg['eta1']:.6g}, {llg['eta2']:.6g})   alpha = ({llg['alpha1']:.6g}, "
          f"{llg['alpha2']:.6g})")
    print(f"time unit = {format_seconds(summary['time_scale_s'])}   energy unit = "
          f"{summary['energy_scale_J']:.6g} J")
    l1, l2 = summary["exchange_length_m"]
    print(f"exchange length = {l1 * 1e9:.2f} nm / {l2 * 1e9:.2f} nm")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_all(args.suite, quick=args.quick)
    for suite in results:
        print(f"{suite.name}: {'pass' if suite.passed else 'FAIL'}")
        for check in suite.checks:
            mark = "ok" if check.passed else "FAILED"
            print(f"  {check.name}: {check.value:.3e} (bound {check.bound:.3e}) {mark}")
    if args.out:
        save_json({"suites": [s.to_dict() for s in results]}, Path(args.out) / "verify.json")
    return EXIT_OK if all(s.passed for s in results) else EXIT_VERIFY


COMMANDS = {
    "minimize": cmd_minimize,
    "evolve": cmd_evolve,
    "mesh": cmd_mesh,
    "nondim": cmd_nondim,
    "verify": cmd_verify,
}


def cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, MeshError) as e:
        logger.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error("numerical failure: %s", e)
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


def main():
    sys.exit(cli())
