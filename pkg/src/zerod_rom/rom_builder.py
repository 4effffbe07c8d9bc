"""
Reduced-order model generation: centerline tree to lumped network
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .elements import stenosis_coefficient
from .exceptions import InvalidTree, MissingBC, NonPositiveGeometry
from .network import FluidProperties, NetworkBuilder, NetworkModel
from .parameters import BOUNDARY_KINDS, ElementKind, ElementParams, FlowBCParams, JunctionParams, VesselParams
from .segmentation import (
    DEFAULT_STENOSIS_THRESHOLD,
    BranchProfile,
    Segment,
    Segmentation,
    SegmentRole,
    detect_stenosis,
    fit_segments,
)
from .timeseries import TimeSeries

logger = logging.getLogger(__name__)


class WallModel(BaseModel):
    """Vessel wall stiffness k0 = E*h/r"""
    model_config = ConfigDict(frozen=True)

    k0: float = Field(1.0e6, gt=0.0, description="Wall stiffness [dyn/cm^2] (100 kPa)")


class TreeJunction(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int
    inlet_branches: Tuple[int, ...]
    outlet_branches: Tuple[int, ...]


class CenterlineTree(BaseModel):
    """Branch area profiles, their junctions and the cap boundary conditions"""
    model_config = ConfigDict(frozen=True)

    branches: Tuple[BranchProfile, ...]
    junctions: Tuple[TreeJunction, ...] = ()
    inlet_branch: int
    inflow: TimeSeries = Field(..., description="Prescribed inflow at the inlet cap [cm^3/s]")
    outlets: Dict[int, ElementParams] = Field(
        default_factory=dict, description="Boundary condition of each outlet branch"
    )

    @model_validator(mode="after")
    def _check_outlet_kinds(self) -> "CenterlineTree":
        for branch, params in self.outlets.items():
            if params.kind not in BOUNDARY_KINDS or params.kind == ElementKind.FLOW_BC:
                raise ValueError(f"outlet {branch}: {params.kind.value} cannot close a cap")
        return self

    def branch(self, branch_id: int) -> BranchProfile:
        for b in self.branches:
            if b.branch_id == branch_id:
                return b
        raise KeyError(f"No branch {branch_id}")

    def outlet_branches(self) -> List[int]:
        """Branches whose end is a cap"""
        fed = {b for j in self.junctions for b in j.inlet_branches}
        return [b.branch_id for b in self.branches if b.branch_id not in fed]

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(b.branch_id for b in self.branches)
        for j in self.junctions:
            for a in j.inlet_branches:
                for b in j.outlet_branches:
                    g.add_edge(a, b, junction=j.id)
        return g

    def check(self) -> None:
        """Raise InvalidTree unless branches form a connected DAG rooted at the inlet"""
        ids = [b.branch_id for b in self.branches]
        if len(set(ids)) != len(ids):
            raise InvalidTree("duplicate branch ids")
        known = set(ids)
        if self.inlet_branch not in known:
            raise InvalidTree(f"inlet branch {self.inlet_branch} does not exist")
        starts: Dict[int, int] = {}
        ends: Dict[int, int] = {}
        for j in self.junctions:
            if not j.inlet_branches or not j.outlet_branches:
                raise InvalidTree(f"junction {j.id} needs inlet and outlet branches")
            for b in j.inlet_branches + j.outlet_branches:
                if b not in known:
                    raise InvalidTree(f"junction {j.id} references unknown branch {b}")
            for b in j.inlet_branches:
                ends[b] = ends.get(b, 0) + 1
            for b in j.outlet_branches:
                starts[b] = starts.get(b, 0) + 1
        for b in ids:
            if ends.get(b, 0) > 1 or starts.get(b, 0) > 1:
                raise InvalidTree(f"branch {b} end attaches to more than one junction")
            if b != self.inlet_branch and starts.get(b, 0) != 1:
                raise InvalidTree(f"branch {b} is not fed by a junction")
        if starts.get(self.inlet_branch, 0):
            raise InvalidTree(f"inlet branch {self.inlet_branch} is fed by a junction")
        g = self.graph()
        if not nx.is_directed_acyclic_graph(g):
            raise InvalidTree("branch graph contains a cycle")
        reachable = nx.descendants(g, self.inlet_branch) | {self.inlet_branch}
        if reachable != known:
            raise InvalidTree(f"branches {sorted(known - reachable)} are not reachable from the inlet")


class BuildMode(BaseModel):
    """Branch discretization: automatic stenosis detection or n fitted segments"""
    model_config = ConfigDict(frozen=True)

    kind: Literal["automatic", "fixed"] = "automatic"
    n: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _check_n(self) -> "BuildMode":
        if self.kind == "fixed" and self.n is None:
            raise ValueError("fixed mode needs the number of segments")
        return self

    @classmethod
    def parse(cls, text: str) -> "BuildMode":
        """Parse "automatic" or "fixed:<n>" """
        if text == "automatic":
            return cls()
        name, _, count = text.partition(":")
        if name != "fixed" or not count.isdigit():
            raise ValueError(f"Invalid mode '{text}', expected 'automatic' or 'fixed:<n>'")
        return cls(kind="fixed", n=int(count))

    def __str__(self) -> str:
        return "automatic" if self.kind == "automatic" else f"fixed:{self.n}"


def vessel_parameters(segment: Segment, fluid: FluidProperties, wall: WallModel) -> VesselParams:
    """
    Lumped RCL-stenosis parameters of one segment

    Args:
        segment: Segment with its end areas (and S0/Ss for stenosis segments)
        fluid: Blood properties
        wall: Wall stiffness

    Returns:
        VesselParams evaluated with the mean of the end radii
    """
    length = segment.length
    if not (length > 0.0 and segment.area_start > 0.0 and segment.area_end > 0.0):
        raise NonPositiveGeometry(
            f"Segment [{segment.s_start}, {segment.s_end}] has non-positive length or area"
        )
    r = segment.mean_radius
    resistance = 8.0 * fluid.viscosity * length / (math.pi * r ** 4)
    capacitance = 3.0 * length * math.pi * r ** 2 / (2.0 * wall.k0)
    inductance = fluid.density * length / (math.pi * r ** 2)

    k_s = 0.0
    if segment.role == SegmentRole.STENOSIS:
        s0, ss = segment.area_proximal, segment.area_stenosis
        if ss > s0:
            logger.warning(f"Stenosed area {ss:.4g} exceeds healthy area {s0:.4g}, stenosis coefficient clamped to 0")
        else:
            k_s = stenosis_coefficient(s0, ss, fluid.density)
    return VesselParams(
        R_poiseuille=resistance,
        C=capacitance,
        L=inductance,
        stenosis_coefficient=k_s,
    )


def segment_branch(
    profile: BranchProfile,
    mode: BuildMode,
    threshold: float = DEFAULT_STENOSIS_THRESHOLD
) -> Segmentation:
    if mode.kind == "automatic":
        return detect_stenosis(profile, threshold)
    return fit_segments(profile, mode.n, threshold)


@dataclass
class RomBuild:
    network: NetworkModel
    segmentations: Dict[int, Segmentation] = field(default_factory=dict)

    @property
    def n_vessels(self) -> int:
        return sum(len(s.segments) for s in self.segmentations.values())


def inlet_bc_id(branch_id: int) -> str:
    return f"BC{branch_id}_inlet"


def outlet_bc_id(branch_id: int) -> str:
    return f"BC{branch_id}_outlet"


def vessel_id(branch_id: int, k: int) -> str:
    return f"branch{branch_id}_seg{k}"


def build_rom(
    tree: CenterlineTree,
    fluid: Optional[FluidProperties] = None,
    wall: Optional[WallModel] = None,
    mode: Optional[BuildMode] = None,
    threshold: float = DEFAULT_STENOSIS_THRESHOLD
) -> RomBuild:
    """
    Segment every branch and assemble the lumped network

    Args:
        tree: Centerline tree with inflow and outlet boundary conditions
        fluid: Blood properties (defaults to 1.06 g/cm^3, 0.04 P)
        wall: Wall stiffness (defaults to 100 kPa)
        mode: Branch discretization (defaults to automatic)
        threshold: Stenosis area ratio threshold

    Returns:
        RomBuild with the validated network and the per-branch segmentations

    Raises:
        MissingBC: If an outlet branch has no boundary condition
    """
    fluid = fluid or FluidProperties()
    wall = wall or WallModel()
    mode = mode or BuildMode()
    tree.check()

    outlets = tree.outlet_branches()
    for b in outlets:
        if b not in tree.outlets:
            raise MissingBC(b)

    builder = NetworkBuilder(fluid)
    builder.add(inlet_bc_id(tree.inlet_branch), FlowBCParams(Q=tree.inflow))
    for b in outlets:
        builder.add(outlet_bc_id(b), tree.outlets[b])

    segmentations: Dict[int, Segmentation] = {}
    first: Dict[int, str] = {}
    last: Dict[int, str] = {}
    for profile in tree.branches:
        seg = segment_branch(profile, mode, threshold)
        segmentations[profile.branch_id] = seg
        ids = [
            builder.add(vessel_id(profile.branch_id, k), vessel_parameters(s, fluid, wall))
            for k, s in enumerate(seg.segments)
        ]
        builder.chain(*ids)
        first[profile.branch_id] = ids[0]
        last[profile.branch_id] = ids[-1]

    builder.connect(inlet_bc_id(tree.inlet_branch), first[tree.inlet_branch])
    for j in tree.junctions:
        if len(j.inlet_branches) == 1 and len(j.outlet_branches) == 1:
            builder.connect(last[j.inlet_branches[0]], first[j.outlet_branches[0]])
            continue
        jid = builder.add(f"J{j.id}", JunctionParams())
        for b in j.inlet_branches:
            builder.connect(last[b], jid)
        for b in j.outlet_branches:
            builder.connect(jid, first[b])
    for b in outlets:
        builder.connect(last[b], outlet_bc_id(b))

    network = builder.build(inlet_bc_id=inlet_bc_id(tree.inlet_branch))
    n_stenoses = sum(len(s.stenoses) for s in segmentations.values())
    logger.info(
        f"Built network ({mode}): {sum(len(s.segments) for s in segmentations.values())} vessels, "
        f"{n_stenoses} stenoses, {len(network.elements)} elements, {len(network.wires)} wires"
    )
    return RomBuild(network=network, segmentations=segmentations)


def build_network(
    tree: CenterlineTree,
    fluid: Optional[FluidProperties] = None,
    wall: Optional[WallModel] = None,
    mode: Optional[BuildMode] = None,
    threshold: float = DEFAULT_STENOSIS_THRESHOLD
) -> NetworkModel:
    return build_rom(tree, fluid, wall, mode, threshold).network
