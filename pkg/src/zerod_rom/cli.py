"""
Command-line interface: build, run, compare and sweep.

Exit codes: 0 ok, 2 parse error, 3 validation error, 4 solver error,
5 comparison error.
"""
import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from .config import RunConfig, load_run_config, load_sweep_spec
from .exceptions import (
    ConfigError,
    InsufficientCycles,
    InvalidTree,
    MismatchedCaps,
    MissingBC,
    ModelFormatError,
    NetworkValidationError,
    SolverError,
    TooFewSamples,
    ZeroFlowAmplitude,
)
from .integrator import run_simulation, steady_initial_state
from .logging_config import setup_logging
from .metrics import CapSeries, cap_errors, resample_linear
from .model_file import read_centerline_tree, read_model, write_model
from .network import validate_network
from .results import check_periodicity, first_converged_cycle, periodicity_history
from .results_io import read_results_csv, write_manifest, write_results_csv
from .rom_builder import BuildMode, build_rom
from .sweep import run_sweep, write_sweep_outputs
from .units import from_cgs_pressure

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4
EXIT_COMPARISON = 5


def _error(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML or JSON run configuration")
    parser.add_argument("--cycles", type=int, dest="n_cycles", help="Number of cardiac cycles")
    parser.add_argument("--steps-per-cycle", type=int, help="Time steps per cardiac cycle")
    parser.add_argument("--spectral-radius", type=float, help="Generalized-alpha spectral radius in [0, 1]")
    parser.add_argument("--abs-tol", type=float, dest="newton_abs_tol", help="Newton absolute tolerance")
    parser.add_argument("--rel-tol", type=float, dest="newton_rel_tol", help="Newton relative tolerance")
    parser.add_argument("--max-iter", type=int, dest="max_newton_iters", help="Maximum Newton iterations")
    parser.add_argument("--report-units", choices=["cgs", "mmHg", "kPa"], help="Pressure unit of summaries")


def create_parser() -> argparse.ArgumentParser:
    """Create the command-line parser"""
    parser = argparse.ArgumentParser(prog="zerod", description="Lumped-parameter hemodynamics solver and ROM builder")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default) or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", help="Build a model file from a centerline tree")
    build.add_argument("tree", help="Centerline-tree JSON file")
    build.add_argument("--bc", help="Boundary-condition JSON file (inlet and outlets)")
    build.add_argument("--mode", default="automatic", help="'automatic' or 'fixed:<n>'")
    build.add_argument("--threshold", type=float, default=1.1, help="Stenosis area ratio threshold")
    build.add_argument("-o", "--output", default="model.json", help="Model file to write")

    run = sub.add_parser("run", help="Simulate a model file")
    run.add_argument("model", help="Model JSON file")
    run.add_argument("-o", "--output-dir", help="Directory for results.csv and manifest.json")
    _add_run_options(run)
    run.add_argument("--check-periodicity", type=float, metavar="TOL", help="Report cycle-to-cycle periodicity")
    run.add_argument("--last-cycle-only", action="store_true", help="Store only the last cycle")
    run.add_argument("--warm-start", action="store_true", help="Start from a steady mean-inflow solution")
    run.add_argument("--progress", action="store_true", help="Show a progress bar")

    compare = sub.add_parser("compare", help="Cap error metrics of a results file against a reference")
    compare.add_argument("results", help="Results CSV to evaluate")
    compare.add_argument("reference", help="Reference results CSV")
    compare.add_argument("cap_map", help="JSON cap map {'inlet': name, 'caps': {name: label | {results, reference}}}")
    compare.add_argument("-o", "--output", default="error_report.json", help="Report file to write")
    compare.add_argument("--resample", choices=["linear"], help="Resample results onto the reference grid")

    sweep = sub.add_parser("sweep", help="Run one simulation per parameter value")
    sweep.add_argument("model", help="Model JSON file")
    sweep.add_argument("spec", help="YAML or JSON sweep specification")
    sweep.add_argument("-o", "--output-dir", default="sweep", help="Directory for row results and summary.csv")
    sweep.add_argument("--parallelism", type=int, help="Override the spec's parallelism")
    _add_run_options(sweep)
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.config:
        config = config.merged(load_run_config(args.config))
    flags = {
        name: getattr(args, name, None)
        for name in (
            "n_cycles", "steps_per_cycle", "spectral_radius", "newton_abs_tol",
            "newton_rel_tol", "max_newton_iters", "report_units", "check_periodicity",
        )
    }
    flags = {k: v for k, v in flags.items() if v is not None}
    if getattr(args, "output_dir", None):
        flags["output_dir"] = args.output_dir
    for name in ("warm_start", "progress"):
        if getattr(args, name, False):
            flags[name] = True
    if getattr(args, "last_cycle_only", False):
        flags["store_all_cycles"] = False
    try:
        return config.merged(RunConfig.model_validate(flags))
    except ValueError as e:
        raise ConfigError(str(e))


def cmd_build(args: argparse.Namespace) -> int:
    try:
        mode = BuildMode.parse(args.mode)
        tree_file = read_centerline_tree(args.tree, args.bc)
    except (ModelFormatError, ValueError) as e:
        _error(str(e))
        return EXIT_PARSE
    try:
        rom = build_rom(tree_file.tree, tree_file.fluid, tree_file.wall, mode, args.threshold)
    except (MissingBC, InvalidTree, NetworkValidationError, TooFewSamples) as e:
        _error(str(e))
        return EXIT_VALIDATION

    write_model(args.output, rom.network)
    print(f"Built {args.output} ({mode}): {rom.n_vessels} vessel segments, "
          f"{len(rom.network.elements)} elements, {len(rom.network.wires)} wires")
    for branch_id, seg in rom.segmentations.items():
        line = f"  branch {branch_id}: {len(seg.segments)} segment(s)"
        for s in seg.stenoses:
            line += f", stenosis at [{s.s_start:.4g}, {s.s_end:.4g}] cm S0/Ss={s.area_proximal / s.area_stenosis:.4g}"
        print(line)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = _run_config(args)
        model = read_model(args.model)
    except (ModelFormatError, ConfigError) as e:
        _error(str(e))
        return EXIT_PARSE
    diagnostics = validate_network(model.network)
    if diagnostics:
        for d in diagnostics:
            _error(str(d))
        return EXIT_VALIDATION

    network = model.network
    params = config.integrator_params(model.simulation.integrator_params())
    n_cycles = config.n_cycles or model.simulation.number_of_cardiac_cycles
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    manifest: Dict[str, Any] = {
        "model": str(args.model),
        "n_cycles": n_cycles,
        "steps_per_cycle": params.steps_per_cycle,
        "dt": params.time_step(network.cycle_period),
        "spectral_radius": params.spectral_radius,
        "units": config.report_units,
    }

    started = time.perf_counter()
    try:
        initial = steady_initial_state(network, params) if config.warm_start else None
        results = run_simulation(
            network, params, n_cycles,
            initial=initial, store_all_cycles=config.store_all_cycles, progress=config.progress,
        )
    except SolverError as e:
        manifest.update({
            "converged": False,
            "error": str(e),
            "failed_step": e.step,
            "failed_time": e.time,
            "wall_clock_s": time.perf_counter() - started,
        })
        write_manifest(output_dir / "manifest.json", manifest)
        _error(f"step {e.step} (t={e.time}): {e}")
        return EXIT_SOLVER
    wall_clock = time.perf_counter() - started

    write_results_csv(output_dir / "results.csv", results)
    labels = dict(zip(results.wire_ids, results.wire_labels))
    manifest.update({
        "converged": True,
        "error": None,
        "failed_step": None,
        "wall_clock_s": wall_clock,
        "newton": {
            "total_iterations": results.total_newton_iterations,
            "max_per_step": int(results.newton_iterations.max()) if results.newton_iterations.size else 0,
            "mean_per_step": float(results.newton_iterations.mean()) if results.newton_iterations.size else 0.0,
        },
        "outlet_mean_pressure": {
            labels[w]: from_cgs_pressure(results.cycle_mean_pressure(-1, w), config.report_units)
            for w in results.outlet_wire_ids
        },
    })
    if config.check_periodicity is not None:
        manifest["periodicity"] = _periodicity_summary(results, config.check_periodicity, labels)
    write_manifest(output_dir / "manifest.json", manifest)
    print(f"Simulated {n_cycles} cycles in {wall_clock:.2f} s, "
          f"{results.total_newton_iterations} Newton iterations, results in {output_dir}")
    return EXIT_OK


def _periodicity_summary(results, tol: float, labels: Dict[int, str]) -> Dict[str, Any]:
    try:
        report = check_periodicity(results, tol)
        history = periodicity_history(results, tol)
    except InsufficientCycles as e:
        return {"tol": tol, "converged": None, "error": str(e)}
    return {
        "tol": tol,
        "converged": report.converged,
        "deltas": {labels[w]: d for w, d in report.deltas.items()},
        "history": [
            {"cycles": list(r.cycles), "max_delta": r.max_delta, "converged": r.converged}
            for r in history
        ],
        "first_converged_cycle": first_converged_cycle(history),
    }


def _cap_series(table, caps: Dict[str, Any], inlet: str, side: str) -> List[CapSeries]:
    series = []
    for name, column in caps.items():
        label = column if isinstance(column, str) else column[side]
        if label not in table.pressure:
            raise MismatchedCaps(f"Cap '{name}': no column '{label}' in the {side} file")
        series.append(CapSeries(
            cap_id=name,
            is_inlet=name == inlet,
            pressure=table.pressure[label],
            flow=table.flow[label],
        ))
    return series


def cmd_compare(args: argparse.Namespace) -> int:
    try:
        test_table = read_results_csv(args.results)
        ref_table = read_results_csv(args.reference)
        cap_map = json.loads(Path(args.cap_map).read_text())
        inlet = cap_map["inlet"]
        caps = cap_map["caps"]
    except (ModelFormatError, OSError, ValueError, KeyError) as e:
        _error(f"cannot parse inputs: {e}")
        return EXIT_PARSE

    try:
        reference = _cap_series(ref_table, caps, inlet, "reference")
        test = _cap_series(test_table, caps, inlet, "results")
        if test_table.n_t != ref_table.n_t:
            if args.resample != "linear":
                raise MismatchedCaps(
                    f"Time grids differ ({test_table.n_t} vs {ref_table.n_t} samples); use --resample linear"
                )
            test = [resample_linear(s, ref_table.n_t) for s in test]
        report = cap_errors(reference, test)
    except (MismatchedCaps, ZeroFlowAmplitude) as e:
        _error(str(e))
        return EXIT_COMPARISON

    Path(args.output).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    print(f"Pressure error avg {report.pressure_avg:.3%}, flow error avg {report.flow_avg:.3%} -> {args.output}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        config = _run_config(args)
        model = read_model(args.model)
        spec = load_sweep_spec(args.spec)
        if args.parallelism is not None:
            spec = spec.model_copy(update={"parallelism": max(1, args.parallelism)})
    except (ModelFormatError, ConfigError) as e:
        _error(str(e))
        return EXIT_PARSE
    diagnostics = validate_network(model.network)
    if diagnostics:
        for d in diagnostics:
            _error(str(d))
        return EXIT_VALIDATION

    params = config.integrator_params(model.simulation.integrator_params())
    n_cycles = config.n_cycles or model.simulation.number_of_cardiac_cycles
    output_dir = Path(args.output_dir)
    rows = run_sweep(model.network, spec, params, n_cycles)
    summary = write_sweep_outputs(output_dir, spec, rows, config.report_units)
    n_ok = sum(r.converged for r in rows)
    print(f"Sweep finished: {n_ok}/{len(rows)} rows succeeded, summary in {summary}")
    return EXIT_OK if n_ok else EXIT_SOLVER


COMMANDS = {
    "build": cmd_build,
    "run": cmd_run,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the zerod command"""
    load_dotenv()
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK
    try:
        setup_logging(args.log_level, include_timestamp=False)
    except ValueError as e:
        _error(str(e))
        return EXIT_PARSE
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
