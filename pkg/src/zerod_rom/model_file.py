"""
Reading and writing model files and centerline-tree files.

Model files are JSON with the sections ``boundary_conditions``, ``vessels``,
``junctions`` and ``simulation_parameters`` (plus an optional ``wires`` list).
Two connectivity styles are accepted:

* wire based: vessels carry ``inlet_wire``/``outlet_wire``, junctions
  ``inlet_wires``/``outlet_wires`` and boundary conditions a ``wire`` and a
  ``location`` ("inlet" or "outlet"). This is what ``write_model`` produces.
* vessel based (svZeroDSolver style): vessels carry a ``boundary_conditions``
  map {"inlet": bc_name, "outlet": bc_name}, junctions ``inlet_vessels`` and
  ``outlet_vessels``.

Boundary-condition values use the svZeroDSolver names (R, Pd, Rp, C, Rd, Ra1,
Ra2, Ca, Cc, Rv1, P_v, t, Q, P, Pim). Pressure-valued entries may be given in
mmHg or kPa with a ``units`` key on the boundary condition.
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .exceptions import ModelFormatError
from .integrator import IntegratorParams
from .network import ElementSpec, FluidProperties, NetworkBuilder, NetworkModel, Wire
from .parameters import (
    CoronaryParams,
    ElementKind,
    FlowBCParams,
    JunctionParams,
    PressureBCParams,
    ResistanceBCParams,
    VesselParams,
    WindkesselParams,
)
from .rom_builder import CenterlineTree, TreeJunction, WallModel
from .segmentation import BranchProfile
from .timeseries import TimeSeries
from .units import pressure_factor

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_BC_TYPES = {
    "FLOW": ElementKind.FLOW_BC,
    "PRESSURE": ElementKind.PRESSURE_BC,
    "RESISTANCE": ElementKind.RESISTANCE_BC,
    "RCR": ElementKind.WINDKESSEL_RCR,
    "CORONARY": ElementKind.CORONARY_RCRCR,
}
_BC_NAMES = {kind: name for name, kind in _BC_TYPES.items()}


class SimulationParameters(BaseModel):
    """``simulation_parameters`` section of a model file"""
    model_config = ConfigDict(extra="ignore")

    density: float = Field(1.06, gt=0.0)
    viscosity: float = Field(0.04, gt=0.0)
    number_of_cardiac_cycles: int = Field(1, ge=1)
    number_of_time_pts_per_cardiac_cycle: int = Field(1001, ge=2, description="steps_per_cycle + 1")
    spectral_radius: float = Field(0.0, ge=0.0, le=1.0)
    absolute_tolerance: float = Field(1e-8, gt=0.0)
    relative_tolerance: float = Field(1e-5, ge=0.0)
    maximum_nonlinear_iterations: int = Field(30, ge=1)
    inlet: Optional[str] = Field(None, description="Name of the inlet boundary condition")

    @property
    def fluid(self) -> FluidProperties:
        return FluidProperties(density=self.density, viscosity=self.viscosity)

    def integrator_params(self) -> IntegratorParams:
        return IntegratorParams(
            spectral_radius=self.spectral_radius,
            steps_per_cycle=self.number_of_time_pts_per_cardiac_cycle - 1,
            max_newton_iters=self.maximum_nonlinear_iterations,
            newton_abs_tol=self.absolute_tolerance,
            newton_rel_tol=self.relative_tolerance,
        )

    @classmethod
    def from_settings(
        cls,
        fluid: FluidProperties,
        params: IntegratorParams,
        n_cycles: int,
        inlet: Optional[str]
    ) -> "SimulationParameters":
        return cls(
            density=fluid.density,
            viscosity=fluid.viscosity,
            number_of_cardiac_cycles=n_cycles,
            number_of_time_pts_per_cardiac_cycle=params.steps_per_cycle + 1,
            spectral_radius=params.spectral_radius,
            absolute_tolerance=params.newton_abs_tol,
            relative_tolerance=params.newton_rel_tol,
            maximum_nonlinear_iterations=params.max_newton_iters,
            inlet=inlet,
        )


@dataclass
class ModelFile:
    network: NetworkModel
    simulation: SimulationParameters


def _load_json(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ModelFormatError(path, f"cannot read file ({e.strerror})")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(path, f"line {e.lineno}, column {e.colno}: {e.msg}")
    if not isinstance(data, dict):
        raise ModelFormatError(path, "top level must be a JSON object")
    return data


def _series(values: Dict[str, Any], key: str, scale: float = 1.0) -> TimeSeries:
    times = values["t"]
    samples = values[key]
    if not isinstance(samples, list):
        return TimeSeries.constant(float(samples) * scale, float(times[-1]) if times else 1.0)
    return TimeSeries.from_samples(times, [float(v) * scale for v in samples])


def _constant(values: Dict[str, Any], key: str) -> float:
    value = values[key]
    if isinstance(value, list):
        if len(set(value)) != 1:
            raise ValueError(f"'{key}' must be constant in time")
        return float(value[0])
    return float(value)


def bc_params_from_values(bc_type: str, values: Dict[str, Any], units: str = "cgs"):
    """
    Build the parameter record of a boundary condition from svZeroDSolver-style values

    Args:
        bc_type: FLOW, PRESSURE, RESISTANCE, RCR or CORONARY
        values: bc_values mapping
        units: Unit of the pressure-valued entries (cgs, mmHg, kPa)

    Returns:
        Parameter record of the matching element kind
    """
    p = pressure_factor(units)
    kind = _BC_TYPES.get(bc_type)
    if kind == ElementKind.FLOW_BC:
        return FlowBCParams(Q=_series(values, "Q"))
    if kind == ElementKind.PRESSURE_BC:
        return PressureBCParams(P=_constant(values, "P") * p)
    if kind == ElementKind.RESISTANCE_BC:
        return ResistanceBCParams(R=_constant(values, "R"), P_distal=_constant(values, "Pd") * p)
    if kind == ElementKind.WINDKESSEL_RCR:
        return WindkesselParams(
            R_proximal=_constant(values, "Rp"),
            C=_constant(values, "C"),
            R_distal=_constant(values, "Rd"),
            P_distal=_constant(values, "Pd") * p,
        )
    if kind == ElementKind.CORONARY_RCRCR:
        return CoronaryParams(
            R_a=values["Ra1"],
            R_am=values["Ra2"],
            R_v=values["Rv1"],
            C_a=values["Ca"],
            C_im=values["Cc"],
            P_v_distal=float(values.get("P_v", 0.0)) * p,
            P_im=_series(values, "Pim", p),
            ca_reference=values.get("ca_reference", "ground"),
        )
    raise ValueError(f"unknown bc_type '{bc_type}', expected one of {sorted(_BC_TYPES)}")


def bc_values_from_params(params) -> Tuple[str, Dict[str, Any]]:
    kind = params.kind
    if kind == ElementKind.FLOW_BC:
        values = {"t": list(params.Q.times), "Q": list(params.Q.values)}
    elif kind == ElementKind.PRESSURE_BC:
        values = {"P": params.P}
    elif kind == ElementKind.RESISTANCE_BC:
        values = {"R": params.R, "Pd": params.P_distal}
    elif kind == ElementKind.WINDKESSEL_RCR:
        values = {"Rp": params.R_proximal, "C": params.C, "Rd": params.R_distal, "Pd": params.P_distal}
    elif kind == ElementKind.CORONARY_RCRCR:
        values = {
            "Ra1": params.R_a,
            "Ra2": params.R_am,
            "Ca": params.C_a,
            "Cc": params.C_im,
            "Rv1": params.R_v,
            "P_v": params.P_v_distal,
            "t": list(params.P_im.times),
            "Pim": list(params.P_im.values),
            "ca_reference": params.ca_reference,
        }
    else:
        raise ValueError(f"{kind.value} is not a boundary condition")
    return _BC_NAMES[kind], values


def _vessel_params(entry: Dict[str, Any]) -> VesselParams:
    element_type = entry.get("zero_d_element_type", "BloodVessel")
    if element_type != "BloodVessel":
        raise ValueError(f"unsupported zero_d_element_type '{element_type}'")
    values = entry.get("zero_d_element_values", {})
    return VesselParams(
        R_poiseuille=values.get("R_poiseuille", 0.0),
        C=values.get("C", 0.0),
        L=values.get("L", 0.0),
        stenosis_coefficient=values.get("stenosis_coefficient", 0.0),
    )


def _read_wire_based(data: Dict[str, Any], sim: SimulationParameters) -> NetworkModel:
    elements: List[ElementSpec] = []
    inlet_name = sim.inlet
    for bc in data.get("boundary_conditions", []):
        params = bc_params_from_values(bc["bc_type"], bc.get("bc_values", {}), bc.get("units", "cgs"))
        wire = int(bc["wire"])
        location = bc.get("location", "outlet")
        if location not in ("inlet", "outlet"):
            raise ValueError(f"boundary condition '{bc['bc_name']}': location must be 'inlet' or 'outlet'")
        at_outlet = location == "outlet"
        elements.append(
            ElementSpec(
                id=bc["bc_name"],
                params=params,
                inlet_wires=(wire,) if at_outlet else (),
                outlet_wires=() if at_outlet else (wire,),
            )
        )
        if inlet_name is None and not at_outlet and params.kind == ElementKind.FLOW_BC:
            inlet_name = bc["bc_name"]
    for vessel in data.get("vessels", []):
        elements.append(
            ElementSpec(
                id=vessel.get("vessel_name", f"V{vessel['vessel_id']}"),
                params=_vessel_params(vessel),
                inlet_wires=(int(vessel["inlet_wire"]),),
                outlet_wires=(int(vessel["outlet_wire"]),),
            )
        )
    for junction in data.get("junctions", []):
        elements.append(
            ElementSpec(
                id=junction["junction_name"],
                params=JunctionParams(),
                inlet_wires=tuple(int(w) for w in junction["inlet_wires"]),
                outlet_wires=tuple(int(w) for w in junction["outlet_wires"]),
            )
        )

    if "wires" in data:
        wires = tuple(Wire(id=int(w["id"]), label=w.get("label", "")) for w in data["wires"])
    else:
        ids = sorted({w for e in elements for w in e.wires})
        wires = tuple(Wire(id=w, label=f"wire{w}") for w in ids)
    if inlet_name is None:
        raise ValueError("no inlet FLOW boundary condition found")
    return NetworkModel(fluid=sim.fluid, wires=wires, elements=tuple(elements), inlet_bc_id=inlet_name)


def _read_vessel_based(data: Dict[str, Any], sim: SimulationParameters) -> NetworkModel:
    bcs = {bc["bc_name"]: bc for bc in data.get("boundary_conditions", [])}
    builder = NetworkBuilder(sim.fluid)
    vessel_ids = {}
    for vessel in data.get("vessels", []):
        vessel_ids[vessel["vessel_id"]] = builder.add(
            vessel.get("vessel_name", f"V{vessel['vessel_id']}"), _vessel_params(vessel)
        )

    inlet_name = sim.inlet
    for vessel in data.get("vessels", []):
        vid = vessel_ids[vessel["vessel_id"]]
        for location, name in vessel.get("boundary_conditions", {}).items():
            if name not in bcs:
                raise ValueError(f"vessel {vessel['vessel_id']} references unknown boundary condition '{name}'")
            bc = bcs[name]
            builder.add(name, bc_params_from_values(bc["bc_type"], bc.get("bc_values", {}), bc.get("units", "cgs")))
            if location == "inlet":
                builder.connect(name, vid)
                if inlet_name is None and bc["bc_type"] == "FLOW":
                    inlet_name = name
            elif location == "outlet":
                builder.connect(vid, name)
            else:
                raise ValueError(f"vessel {vessel['vessel_id']}: unknown location '{location}'")

    for junction in data.get("junctions", []):
        inlets = [vessel_ids[v] for v in junction["inlet_vessels"]]
        outlets = [vessel_ids[v] for v in junction["outlet_vessels"]]
        if len(inlets) == 1 and len(outlets) == 1:
            builder.connect(inlets[0], outlets[0])
            continue
        jid = builder.add(junction["junction_name"], JunctionParams())
        for v in inlets:
            builder.connect(v, jid)
        for v in outlets:
            builder.connect(jid, v)

    if inlet_name is None:
        raise ValueError("no inlet FLOW boundary condition found")
    return builder.build(inlet_bc_id=inlet_name, validate=False)


def read_model(path: PathLike) -> ModelFile:
    """
    Parse a model file

    The network is returned unvalidated; run validate_network on it.

    Raises:
        ModelFormatError: On unreadable files, bad JSON or invalid entries
    """
    data = _load_json(path)
    try:
        sim = SimulationParameters.model_validate(data.get("simulation_parameters", {}))
        vessels = data.get("vessels", [])
        if any("inlet_wire" in v for v in vessels):
            network = _read_wire_based(data, sim)
        else:
            network = _read_vessel_based(data, sim)
    except ValidationError as e:
        raise ModelFormatError(path, _validation_message(e))
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(path, f"invalid entry: {e}")
    logger.info(f"Read model {path}: {len(network.elements)} elements, {len(network.wires)} wires")
    return ModelFile(network=network, simulation=sim)


def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        loc = ".".join(str(x) for x in item["loc"])
        parts.append(f"{loc}: {item['msg']}" if loc else item["msg"])
    return "; ".join(parts)


def model_to_dict(network: NetworkModel, simulation: SimulationParameters) -> Dict[str, Any]:
    """Wire-based JSON representation of a network"""
    bcs = []
    vessels = []
    junctions = []
    for spec in network.elements:
        if spec.kind == ElementKind.VESSEL:
            p = spec.params
            vessels.append({
                "vessel_id": len(vessels),
                "vessel_name": spec.id,
                "inlet_wire": spec.inlet_wires[0],
                "outlet_wire": spec.outlet_wires[0],
                "zero_d_element_type": "BloodVessel",
                "zero_d_element_values": {
                    "R_poiseuille": p.R_poiseuille,
                    "C": p.C,
                    "L": p.L,
                    "stenosis_coefficient": p.stenosis_coefficient,
                },
            })
        elif spec.kind == ElementKind.JUNCTION:
            junctions.append({
                "junction_name": spec.id,
                "junction_type": "NORMAL_JUNCTION",
                "inlet_wires": list(spec.inlet_wires),
                "outlet_wires": list(spec.outlet_wires),
            })
        else:
            bc_type, values = bc_values_from_params(spec.params)
            bcs.append({
                "bc_name": spec.id,
                "bc_type": bc_type,
                "wire": spec.wires[0],
                "location": "outlet" if spec.inlet_wires else "inlet",
                "bc_values": values,
            })
    sim = simulation.model_copy(update={"inlet": network.inlet_bc_id})
    return {
        "boundary_conditions": bcs,
        "vessels": vessels,
        "junctions": junctions,
        "wires": [{"id": w.id, "label": w.label} for w in network.wires],
        "simulation_parameters": sim.model_dump(),
    }


def write_model(path: PathLike, network: NetworkModel, simulation: Optional[SimulationParameters] = None) -> None:
    simulation = simulation or SimulationParameters(
        density=network.fluid.density, viscosity=network.fluid.viscosity
    )
    Path(path).write_text(json.dumps(model_to_dict(network, simulation), indent=2) + "\n")
    logger.info(f"Wrote model file {path}")


@dataclass
class TreeFile:
    tree: CenterlineTree
    fluid: FluidProperties
    wall: WallModel


def _branches(raw: Any) -> List[BranchProfile]:
    if isinstance(raw, dict):
        items = [(int(k), v) for k, v in raw.items()]
    else:
        items = [(int(b["id"]), b["samples"]) for b in raw]
    return [BranchProfile.from_pairs(bid, samples) for bid, samples in items]


def read_centerline_tree(path: PathLike, bc_path: Optional[PathLike] = None) -> TreeFile:
    """
    Parse a centerline-tree file

    The tree file holds ``branches`` (id -> list of [s, area] pairs in cm and
    cm^2), ``junctions`` (``id``, ``inlet_branches``, ``outlet_branches``),
    ``inlet`` ({"branch", "t", "Q"}) and ``outlets`` (branch id -> {"bc_type",
    "bc_values", "units"}). ``inlet`` and ``outlets`` may instead come from a
    separate boundary-condition file, whose entries take precedence. Optional
    ``fluid`` ({"density", "viscosity"}) and ``wall`` ({"k0"}) sections override
    the defaults.

    Raises:
        ModelFormatError: On unreadable files or invalid entries
    """
    data = _load_json(path)
    if bc_path is not None:
        bc_data = _load_json(bc_path)
        data = {**data, **{k: v for k, v in bc_data.items() if k in ("inlet", "outlets")}}
    try:
        inlet = data["inlet"]
        outlets = {
            int(branch): bc_params_from_values(bc["bc_type"], bc.get("bc_values", {}), bc.get("units", "cgs"))
            for branch, bc in data.get("outlets", {}).items()
        }
        tree = CenterlineTree(
            branches=tuple(_branches(data["branches"])),
            junctions=tuple(
                TreeJunction(
                    id=int(j["id"]),
                    inlet_branches=tuple(int(b) for b in j["inlet_branches"]),
                    outlet_branches=tuple(int(b) for b in j["outlet_branches"]),
                )
                for j in data.get("junctions", [])
            ),
            inlet_branch=int(inlet["branch"]),
            inflow=TimeSeries.from_samples(inlet["t"], inlet["Q"]),
            outlets=outlets,
        )
        fluid = FluidProperties(**data.get("fluid", {}))
        wall = WallModel(**data.get("wall", {}))
    except ValidationError as e:
        raise ModelFormatError(path, _validation_message(e))
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(path, f"invalid entry: {e}")
    return TreeFile(tree=tree, fluid=fluid, wall=wall)
