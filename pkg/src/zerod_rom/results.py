"""
Stored simulation output and the cycle-to-cycle periodicity check
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .dofmap import SolutionState
from .exceptions import InsufficientCycles

logger = logging.getLogger(__name__)

DEFAULT_PERIODICITY_TOL = 0.01


@dataclass
class ResultSet:
    """
    Wire pressures and flows at the stored time steps.

    Stored cycle k spans samples cycle_starts[k] .. cycle_starts[k] + steps_per_cycle;
    consecutive cycles share their boundary sample.
    """
    time: np.ndarray
    wire_ids: List[int]
    wire_labels: List[str]
    pressure: np.ndarray
    flow: np.ndarray
    newton_iterations: np.ndarray
    steps_per_cycle: int
    cycle_starts: List[int]
    outlet_wire_ids: List[int] = field(default_factory=list)
    final_state: Optional[SolutionState] = None

    def __post_init__(self):
        n_t = len(self.time)
        if self.pressure.shape != (n_t, len(self.wire_ids)) or self.flow.shape != self.pressure.shape:
            raise ValueError(
                f"Inconsistent result arrays: time {n_t}, pressure {self.pressure.shape}, flow {self.flow.shape}"
            )

    @property
    def n_cycles(self) -> int:
        """Number of complete stored cycles"""
        return sum(1 for s in self.cycle_starts if s + self.steps_per_cycle < len(self.time))

    def wire_index(self, wire_id: int) -> int:
        return self.wire_ids.index(wire_id)

    def pressure_of(self, wire_id: int) -> np.ndarray:
        return self.pressure[:, self.wire_index(wire_id)]

    def flow_of(self, wire_id: int) -> np.ndarray:
        return self.flow[:, self.wire_index(wire_id)]

    def cycle_slice(self, k: int) -> slice:
        """Samples of stored cycle k including both boundary samples; negative k counts from the end"""
        start = self.cycle_starts[:self.n_cycles][k]
        return slice(start, start + self.steps_per_cycle + 1)

    def cycle_mean_pressure(self, k: int, wire_id: int) -> float:
        """Average over the cycle's steps_per_cycle samples, end sample excluded"""
        s = self.cycle_slice(k)
        return float(np.mean(self.pressure_of(wire_id)[s][:-1]))

    @property
    def total_newton_iterations(self) -> int:
        return int(np.sum(self.newton_iterations))


@dataclass
class PeriodicityReport:
    """Relative change of cycle-averaged outlet pressures between two cycles"""
    converged: bool
    deltas: Dict[int, float]
    tol: float
    cycles: Tuple[int, int]

    @property
    def max_delta(self) -> float:
        return max(self.deltas.values(), default=0.0)


def relative_delta(previous: float, current: float) -> float:
    if previous == 0.0:
        return 0.0 if current == 0.0 else float("inf")
    return abs(current - previous) / abs(previous)


def _compare_cycles(results: ResultSet, k_prev: int, k_curr: int, tol: float) -> PeriodicityReport:
    deltas = {
        wid: relative_delta(
            results.cycle_mean_pressure(k_prev, wid), results.cycle_mean_pressure(k_curr, wid)
        )
        for wid in results.outlet_wire_ids
    }
    converged = all(d < tol for d in deltas.values())
    return PeriodicityReport(converged=converged, deltas=deltas, tol=tol, cycles=(k_prev, k_curr))


def check_periodicity(results: ResultSet, tol: float = DEFAULT_PERIODICITY_TOL) -> PeriodicityReport:
    """
    Compare the last two stored cycles

    Args:
        results: Simulation output with at least two stored cycles
        tol: Relative tolerance on every outlet's cycle-averaged pressure

    Returns:
        PeriodicityReport for the last cycle pair
    """
    n = results.n_cycles
    if n < 2:
        raise InsufficientCycles(f"Periodicity check needs 2 stored cycles, have {n}")
    report = _compare_cycles(results, n - 2, n - 1, tol)
    logger.info(
        f"Periodicity {'reached' if report.converged else 'not reached'}: "
        f"max outlet pressure delta {report.max_delta:.3e} (tol {tol})"
    )
    return report


def periodicity_history(results: ResultSet, tol: float = DEFAULT_PERIODICITY_TOL) -> List[PeriodicityReport]:
    """Report for every consecutive pair of stored cycles"""
    n = results.n_cycles
    if n < 2:
        raise InsufficientCycles(f"Periodicity history needs 2 stored cycles, have {n}")
    return [_compare_cycles(results, k - 1, k, tol) for k in range(1, n)]


def first_converged_cycle(history: List[PeriodicityReport]) -> Optional[int]:
    """Index of the later cycle of the first converged pair, None if none converged"""
    for report in history:
        if report.converged:
            return report.cycles[1]
    return None
