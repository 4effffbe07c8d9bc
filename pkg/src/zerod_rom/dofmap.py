"""
Degree-of-freedom numbering and the solution state container
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .elements import equation_count, internal_dof_count
from .exceptions import CountMismatch, DimensionMismatch
from .network import ElementSpec, NetworkModel, count_dofs_and_equations

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DofMap:
    """
    Global numbering. Wire k (in network order) owns P at 2k and Q at 2k+1;
    internal dofs follow in element order. Equation rows are contiguous per
    element, also in element order.
    """
    wire_dofs: Dict[int, Tuple[int, int]]
    internal_dofs: Dict[str, Tuple[int, ...]]
    element_equations: Dict[str, Tuple[int, ...]]
    total_dofs: int
    total_equations: int

    def pressure_index(self, wire_id: int) -> int:
        return self.wire_dofs[wire_id][0]

    def flow_index(self, wire_id: int) -> int:
        return self.wire_dofs[wire_id][1]

    def element_local_dofs(self, spec: ElementSpec) -> List[int]:
        """Global indices of an element's local unknowns in local order"""
        dofs: List[int] = []
        for wid in spec.wires:
            dofs.extend(self.wire_dofs[wid])
        dofs.extend(self.internal_dofs[spec.id])
        return dofs


def build_dof_map(network: NetworkModel) -> DofMap:
    """
    Number the unknowns and equations of a validated network

    Args:
        network: Network that passes validate_network

    Returns:
        DofMap with total_dofs == total_equations

    Raises:
        CountMismatch: If the network is structurally unsolvable
    """
    total_dofs, total_equations = count_dofs_and_equations(network)
    if total_dofs != total_equations:
        raise CountMismatch(total_dofs, total_equations)

    wire_dofs = {w.id: (2 * k, 2 * k + 1) for k, w in enumerate(network.wires)}
    next_dof = 2 * len(network.wires)
    internal_dofs: Dict[str, Tuple[int, ...]] = {}
    element_equations: Dict[str, Tuple[int, ...]] = {}
    next_eq = 0
    for spec in network.elements:
        n_int = internal_dof_count(spec)
        internal_dofs[spec.id] = tuple(range(next_dof, next_dof + n_int))
        next_dof += n_int
        n_eq = equation_count(spec)
        element_equations[spec.id] = tuple(range(next_eq, next_eq + n_eq))
        next_eq += n_eq

    logger.debug(f"Numbered {total_dofs} dofs over {len(network.wires)} wires and {len(network.elements)} elements")
    return DofMap(
        wire_dofs=wire_dofs,
        internal_dofs=internal_dofs,
        element_equations=element_equations,
        total_dofs=total_dofs,
        total_equations=total_equations,
    )


@dataclass
class SolutionState:
    """Solution vector and its time derivative at time t"""
    t: float
    y: np.ndarray
    ydot: Optional[np.ndarray] = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.ydot is None:
            self.ydot = np.zeros_like(self.y)
        self.ydot = np.asarray(self.ydot, dtype=float)
        if self.y.shape != self.ydot.shape:
            raise DimensionMismatch(f"y has shape {self.y.shape} but ydot has shape {self.ydot.shape}")

    @classmethod
    def zeros(cls, total_dofs: int, t: float = 0.0) -> "SolutionState":
        return cls(t=t, y=np.zeros(total_dofs), ydot=np.zeros(total_dofs))

    def check_size(self, dofmap: DofMap) -> None:
        if self.y.shape != (dofmap.total_dofs,):
            raise DimensionMismatch(
                f"State has {self.y.size} entries, the network has {dofmap.total_dofs} dofs"
            )

    def copy(self) -> "SolutionState":
        return SolutionState(t=self.t, y=self.y.copy(), ydot=self.ydot.copy())
