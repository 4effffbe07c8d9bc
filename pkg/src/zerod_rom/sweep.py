"""
Batch parameter sweeps over one model
"""
import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .config import SweepSpec, max_workers
from .exceptions import ZeroDError
from .integrator import IntegratorParams, run_simulation
from .network import NetworkModel, validate_network
from .results import ResultSet
from .results_io import write_results_csv
from .units import from_cgs_pressure

logger = logging.getLogger(__name__)


@dataclass
class SweepRow:
    index: int
    value: float
    converged: bool
    error: Optional[str] = None
    outlet_means: Dict[str, float] = field(default_factory=dict)
    results: Optional[ResultSet] = None


def _run_row(task: Tuple[int, float, NetworkModel, str, IntegratorParams, int]) -> SweepRow:
    index, value, network, parameter, params, n_cycles = task
    try:
        model = network.with_parameter(parameter, value)
        diagnostics = validate_network(model)
        if diagnostics:
            raise ZeroDError("; ".join(str(d) for d in diagnostics))
        results = run_simulation(model, params, n_cycles, store_all_cycles=False)
    except (ZeroDError, KeyError, ValueError) as e:
        return SweepRow(index=index, value=value, converged=False, error=str(e))
    labels = dict(zip(results.wire_ids, results.wire_labels))
    means = {labels[w]: results.cycle_mean_pressure(-1, w) for w in results.outlet_wire_ids}
    return SweepRow(index=index, value=value, converged=True, outlet_means=means, results=results)


def run_sweep(
    network: NetworkModel,
    spec: SweepSpec,
    params: IntegratorParams,
    n_cycles: int
) -> List[SweepRow]:
    """
    Run one simulation per sweep value

    Rows run concurrently in worker processes up to the spec's parallelism
    (capped by ZEROD_THREADS) and come back in value order.

    Args:
        network: Base model
        spec: Parameter path and values
        params: Integrator settings shared by all rows
        n_cycles: Cycles per simulation

    Returns:
        One SweepRow per value, in value order
    """
    values = spec.resolved_values()
    tasks = [(i, v, network, spec.parameter, params, n_cycles) for i, v in enumerate(values)]
    workers = min(max_workers(spec.parallelism), len(tasks))
    logger.info(f"Sweeping {spec.parameter} over {len(values)} values with {workers} worker(s)")
    if workers <= 1:
        rows = [_run_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_row, tasks))
    for row in rows:
        if row.error:
            logger.warning(f"Sweep row {row.index} ({spec.parameter}={row.value}) failed: {row.error}")
    return rows


def write_sweep_outputs(
    output_dir: Union[str, Path],
    spec: SweepSpec,
    rows: List[SweepRow],
    units: str = "cgs"
) -> Path:
    """Write one results CSV per successful row and the summary table; returns the summary path"""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    outlets: List[str] = []
    for row in rows:
        for label in row.outlet_means:
            if label not in outlets:
                outlets.append(label)
        if row.results is not None:
            write_results_csv(output_dir / f"row_{row.index:04d}.csv", row.results)

    summary = output_dir / "summary.csv"
    with open(summary, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", spec.parameter, "converged", "error"] + [f"{o}:mean_pressure" for o in outlets])
        for row in rows:
            means = [
                "%.17g" % from_cgs_pressure(row.outlet_means[o], units) if o in row.outlet_means else ""
                for o in outlets
            ]
            writer.writerow([row.index, "%.17g" % row.value, str(row.converged).lower(), row.error or ""] + means)
    return summary
