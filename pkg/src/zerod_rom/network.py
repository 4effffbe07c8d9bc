"""
Network data model: wires, elements, validation and a small builder
"""
import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field

from .elements import equation_count, internal_dof_count
from .exceptions import NetworkValidationError
from .parameters import BOUNDARY_KINDS, ElementKind, ElementParams, FlowBCParams
from .timeseries import TimeSeries, timeseries_mean

logger = logging.getLogger(__name__)


class FluidProperties(BaseModel):
    """Blood properties in CGS"""
    model_config = ConfigDict(frozen=True)

    density: float = Field(1.06, gt=0.0, description="Density [g/cm^3]")
    viscosity: float = Field(0.04, gt=0.0, description="Dynamic viscosity [g/(cm s)]")


class Wire(BaseModel):
    """Connection point between one upstream and one downstream element port"""
    model_config = ConfigDict(frozen=True)

    id: int
    label: str = ""


class ElementSpec(BaseModel):
    """One lumped block, its parameters and the wires it is attached to"""
    model_config = ConfigDict(frozen=True)

    id: str
    params: ElementParams
    inlet_wires: Tuple[int, ...] = Field(default=(), description="Wires whose flow enters the element")
    outlet_wires: Tuple[int, ...] = Field(default=(), description="Wires whose flow leaves the element")

    @property
    def kind(self) -> ElementKind:
        return self.params.kind

    @property
    def wires(self) -> Tuple[int, ...]:
        return self.inlet_wires + self.outlet_wires


class NetworkModel(BaseModel):
    """Complete open-loop lumped problem"""
    model_config = ConfigDict(frozen=True)

    fluid: FluidProperties = Field(default_factory=FluidProperties)
    wires: Tuple[Wire, ...]
    elements: Tuple[ElementSpec, ...]
    inlet_bc_id: str = Field(..., description="FlowBC providing the reference inflow")

    def element(self, element_id: str) -> ElementSpec:
        for spec in self.elements:
            if spec.id == element_id:
                return spec
        raise KeyError(f"No element '{element_id}'")

    def wire(self, wire_id: int) -> Wire:
        for w in self.wires:
            if w.id == wire_id:
                return w
        raise KeyError(f"No wire {wire_id}")

    @property
    def cycle_period(self) -> float:
        """Period of the designated inflow series"""
        inlet = self.element(self.inlet_bc_id)
        if inlet.kind != ElementKind.FLOW_BC:
            raise ValueError(f"Inlet element '{self.inlet_bc_id}' is not a FlowBC")
        return inlet.params.Q.period

    def boundary_elements(self) -> List[ElementSpec]:
        return [e for e in self.elements if e.kind in BOUNDARY_KINDS]

    def outlet_wire_ids(self) -> List[int]:
        """Wires attached to boundary blocks other than prescribed inflows"""
        return [
            e.wires[0]
            for e in self.elements
            if e.kind in BOUNDARY_KINDS and e.kind != ElementKind.FLOW_BC
        ]

    def inlet_wire_id(self) -> int:
        return self.element(self.inlet_bc_id).wires[0]

    def with_parameter(self, path: str, value: Any) -> "NetworkModel":
        """
        Copy of the network with one element parameter replaced

        Args:
            path: "<element id>.<parameter name>", e.g. "BC1_outlet.R_distal"
            value: New parameter value (validated against the parameter record)

        Returns:
            New NetworkModel; the receiver is unchanged
        """
        element_id, sep, name = path.rpartition(".")
        if not sep:
            raise KeyError(f"Parameter path '{path}' must look like '<element>.<parameter>'")
        spec = self.element(element_id)
        if name == "kind" or name not in type(spec.params).model_fields:
            raise KeyError(f"Element '{element_id}' has no parameter '{name}'")
        data = spec.params.model_dump()
        data[name] = value
        params = type(spec.params).model_validate(data)
        return self._replace_params({element_id: params})

    def with_mean_inflow(self) -> "NetworkModel":
        """Copy of the network where every FlowBC carries its cycle-averaged flow"""
        replaced = {}
        for spec in self.elements:
            if spec.kind == ElementKind.FLOW_BC:
                q = spec.params.Q
                replaced[spec.id] = FlowBCParams(Q=TimeSeries.constant(timeseries_mean(q), q.period))
        return self._replace_params(replaced)

    def _replace_params(self, replaced: Dict[str, Any]) -> "NetworkModel":
        elements = tuple(
            e.model_copy(update={"params": replaced[e.id]}) if e.id in replaced else e
            for e in self.elements
        )
        return self.model_copy(update={"elements": elements})


class DiagnosticCode(str, Enum):
    DANGLING_WIRE = "DanglingWire"
    UNKNOWN_WIRE = "UnknownWire"
    WIRE_ENDPOINT_COUNT = "WireEndpointCount"
    BAD_PORT_COUNT = "BadPortCount"
    DUPLICATE_ID = "DuplicateId"
    DUPLICATE_LABEL = "DuplicateLabel"
    BAD_INLET = "BadInlet"
    DISCONNECTED = "Disconnected"
    COUNT_MISMATCH = "CountMismatch"


@dataclass(frozen=True)
class Diagnostic:
    """One structural problem, naming the offending wire or element"""
    code: DiagnosticCode
    entity: Any
    message: str = ""

    def __str__(self) -> str:
        text = f"{self.code.value}({self.entity})"
        return f"{text}: {self.message}" if self.message else text


def _port_problem(spec: ElementSpec) -> Optional[str]:
    n_in = len(spec.inlet_wires)
    n_out = len(spec.outlet_wires)
    if spec.kind == ElementKind.VESSEL:
        if n_in != 1 or n_out != 1:
            return f"vessel needs 1 inlet and 1 outlet wire, has {n_in} and {n_out}"
    elif spec.kind == ElementKind.JUNCTION:
        if n_in < 1 or n_out < 1 or n_in + n_out < 3:
            return f"junction needs >=1 inlet, >=1 outlet and >=3 ports, has {n_in} and {n_out}"
    elif n_in + n_out != 1:
        return f"boundary condition attaches to exactly one wire, has {n_in + n_out}"
    return None


def count_dofs_and_equations(network: NetworkModel) -> Tuple[int, int]:
    total_dofs = 2 * len(network.wires) + sum(internal_dof_count(e) for e in network.elements)
    total_equations = sum(equation_count(e) for e in network.elements)
    return total_dofs, total_equations


def validate_network(network: NetworkModel) -> List[Diagnostic]:
    """
    Check the structural invariants of a network

    Args:
        network: Network to check

    Returns:
        List of diagnostics, empty iff the network can be numbered and solved
    """
    diagnostics: List[Diagnostic] = []

    wire_ids = [w.id for w in network.wires]
    for wid, n in Counter(wire_ids).items():
        if n > 1:
            diagnostics.append(Diagnostic(DiagnosticCode.DUPLICATE_ID, wid, "wire id used more than once"))
    labels = [w.label for w in network.wires if w.label]
    for label, n in Counter(labels).items():
        if n > 1:
            diagnostics.append(Diagnostic(DiagnosticCode.DUPLICATE_LABEL, label, "wire label used more than once"))
    for eid, n in Counter(e.id for e in network.elements).items():
        if n > 1:
            diagnostics.append(Diagnostic(DiagnosticCode.DUPLICATE_ID, eid, "element id used more than once"))

    known = set(wire_ids)
    upstream: Counter = Counter()
    downstream: Counter = Counter()
    for spec in network.elements:
        problem = _port_problem(spec)
        if problem:
            diagnostics.append(Diagnostic(DiagnosticCode.BAD_PORT_COUNT, spec.id, problem))
        for wid in spec.wires:
            if wid not in known:
                diagnostics.append(
                    Diagnostic(DiagnosticCode.UNKNOWN_WIRE, wid, f"referenced by element '{spec.id}'")
                )
        upstream.update(spec.outlet_wires)
        downstream.update(spec.inlet_wires)

    for wid in dict.fromkeys(wire_ids):
        n_up = upstream[wid]
        n_down = downstream[wid]
        if n_up + n_down < 2:
            diagnostics.append(
                Diagnostic(DiagnosticCode.DANGLING_WIRE, wid, f"referenced by {n_up + n_down} element port(s)")
            )
        elif n_up != 1 or n_down != 1:
            diagnostics.append(
                Diagnostic(
                    DiagnosticCode.WIRE_ENDPOINT_COUNT,
                    wid,
                    f"{n_up} upstream and {n_down} downstream ports, expected 1 and 1",
                )
            )

    inlet = next((e for e in network.elements if e.id == network.inlet_bc_id), None)
    if inlet is None:
        diagnostics.append(Diagnostic(DiagnosticCode.BAD_INLET, network.inlet_bc_id, "no such element"))
    elif inlet.kind != ElementKind.FLOW_BC:
        diagnostics.append(
            Diagnostic(DiagnosticCode.BAD_INLET, inlet.id, f"inlet must be a FlowBC, got {inlet.kind.value}")
        )

    if network.elements:
        graph = nx.Graph()
        graph.add_nodes_from(e.id for e in network.elements)
        ends: Dict[int, List[str]] = {}
        for spec in network.elements:
            for wid in spec.wires:
                ends.setdefault(wid, []).append(spec.id)
        for wid, owners in ends.items():
            for a, b in zip(owners, owners[1:]):
                graph.add_edge(a, b, wire=wid)
        components = list(nx.connected_components(graph))
        if len(components) > 1:
            main = max(components, key=len)
            for comp in components:
                if comp is main:
                    continue
                first = next(e.id for e in network.elements if e.id in comp)
                diagnostics.append(
                    Diagnostic(DiagnosticCode.DISCONNECTED, first, "not connected to the rest of the network")
                )

    if not diagnostics:
        total_dofs, total_equations = count_dofs_and_equations(network)
        if total_dofs != total_equations:
            diagnostics.append(
                Diagnostic(
                    DiagnosticCode.COUNT_MISMATCH,
                    "network",
                    f"{total_dofs} dofs but {total_equations} equations",
                )
            )

    for d in diagnostics:
        logger.debug(f"Network diagnostic: {d}")
    return diagnostics


class NetworkBuilder:
    """
    Incremental construction of a NetworkModel. Wires are numbered from 1 in
    creation order and labelled "<upstream>_<downstream>".
    """

    def __init__(self, fluid: Optional[FluidProperties] = None):
        self.fluid = fluid or FluidProperties()
        self._params: Dict[str, Any] = {}
        self._inlets: Dict[str, List[int]] = {}
        self._outlets: Dict[str, List[int]] = {}
        self._wires: List[Wire] = []

    def add(self, element_id: str, params: Any) -> str:
        if element_id in self._params:
            raise ValueError(f"Element '{element_id}' already exists")
        self._params[element_id] = params
        self._inlets[element_id] = []
        self._outlets[element_id] = []
        return element_id

    def connect(self, upstream: str, downstream: str, label: Optional[str] = None) -> int:
        """Create a wire carrying flow from ``upstream`` into ``downstream``"""
        for eid in (upstream, downstream):
            if eid not in self._params:
                raise KeyError(f"No element '{eid}'")
        wire_id = len(self._wires) + 1
        self._wires.append(Wire(id=wire_id, label=label or f"{upstream}_{downstream}"))
        self._outlets[upstream].append(wire_id)
        self._inlets[downstream].append(wire_id)
        return wire_id

    def chain(self, *element_ids: str) -> List[int]:
        return [self.connect(a, b) for a, b in zip(element_ids, element_ids[1:])]

    def build(self, inlet_bc_id: Optional[str] = None, validate: bool = True) -> NetworkModel:
        if inlet_bc_id is None:
            flows = [eid for eid, p in self._params.items() if p.kind == ElementKind.FLOW_BC]
            if len(flows) != 1:
                raise ValueError(f"Cannot infer the inlet: {len(flows)} FlowBC elements")
            inlet_bc_id = flows[0]
        network = NetworkModel(
            fluid=self.fluid,
            wires=tuple(self._wires),
            elements=tuple(
                ElementSpec(
                    id=eid,
                    params=params,
                    inlet_wires=tuple(self._inlets[eid]),
                    outlet_wires=tuple(self._outlets[eid]),
                )
                for eid, params in self._params.items()
            ),
            inlet_bc_id=inlet_bc_id,
        )
        if validate:
            diagnostics = validate_network(network)
            if diagnostics:
                raise NetworkValidationError(diagnostics)
        return network
