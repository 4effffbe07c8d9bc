"""
Tests for time series, the network data model, validation and dof numbering
"""
import numpy as np
import pytest
from pydantic import ValidationError

from zerod_rom.dofmap import SolutionState, build_dof_map
from zerod_rom.exceptions import CountMismatch, DimensionMismatch, NetworkValidationError
from zerod_rom.network import (
    DiagnosticCode,
    ElementSpec,
    NetworkBuilder,
    NetworkModel,
    Wire,
    validate_network,
)
from zerod_rom.parameters import (
    FlowBCParams,
    JunctionParams,
    PressureBCParams,
    VesselParams,
    WindkesselParams,
)
from zerod_rom.timeseries import (
    TimeSeries,
    interpolate_timeseries,
    timeseries_derivative,
    timeseries_mean,
)


def test_interpolate_midpoint():
    ts = TimeSeries.from_samples([0.0, 1.0], [0.0, 10.0])
    assert interpolate_timeseries(ts, 0.5) == pytest.approx(5.0)


def test_interpolate_wraps_periodically():
    ts = TimeSeries.from_samples([0.0, 1.0], [0.0, 10.0])
    assert interpolate_timeseries(ts, 2.5) == pytest.approx(5.0)
    assert interpolate_timeseries(ts, -0.5) == pytest.approx(5.0)


def test_interpolate_at_cycle_ends_returns_last_sample():
    ts = TimeSeries.from_samples([0.0, 1.0], [0.0, 10.0])
    assert interpolate_timeseries(ts, 0.0) == 0.0
    for t in (1.0, 2.0, 3.0, 10.0):
        assert interpolate_timeseries(ts, t) == 10.0
    assert interpolate_timeseries(ts, -1.0) == 0.0
    assert interpolate_timeseries(ts, 2.25) == interpolate_timeseries(ts, 0.25) == 2.5
    assert timeseries_derivative(ts, 2.0) == 10.0


def test_interpolate_inner_sample():
    ts = TimeSeries.from_samples([0.0, 0.4, 1.0], [2.0, 6.0, 2.0])
    assert interpolate_timeseries(ts, 0.2) == pytest.approx(4.0)
    assert timeseries_derivative(ts, 0.2) == pytest.approx(10.0)
    assert timeseries_derivative(ts, 0.7) == pytest.approx(-4.0 / 0.6)


def test_timeseries_mean():
    ts = TimeSeries.from_samples([0.0, 0.4, 1.0], [2.0, 6.0, 2.0])
    assert timeseries_mean(ts) == pytest.approx((0.4 * 4.0 + 0.6 * 4.0) / 1.0)
    assert timeseries_mean(TimeSeries.constant(7.0, period=0.8)) == pytest.approx(7.0)


@pytest.mark.parametrize(
    "times, values",
    [
        ([0.0], [1.0]),
        ([0.1, 1.0], [1.0, 2.0]),
        ([0.0, 0.5, 0.5], [1.0, 2.0, 3.0]),
        ([0.0, 1.0], [1.0, float("nan")]),
        ([0.0, 1.0], [1.0]),
    ],
)
def test_timeseries_validation(times, values):
    with pytest.raises(ValidationError):
        TimeSeries(times=times, values=values)


def _chain(*params):
    builder = NetworkBuilder()
    ids = [builder.add(f"e{k}", p) for k, p in enumerate(params)]
    builder.chain(*ids)
    return builder


def test_resistor_network_counts(resistor_network):
    dofmap = build_dof_map(resistor_network)
    assert dofmap.total_dofs == 4
    assert dofmap.total_equations == 4
    assert dofmap.wire_dofs == {1: (0, 1), 2: (2, 3)}


def test_rcl_windkessel_counts():
    network = _chain(
        FlowBCParams(Q=TimeSeries.constant(1.0)),
        VesselParams(R_poiseuille=1.0, C=1e-5, L=1.0),
        WindkesselParams(R_proximal=100.0, C=1e-4, R_distal=900.0),
    ).build()
    dofmap = build_dof_map(network)
    assert dofmap.total_dofs == 6
    assert dofmap.total_equations == 6
    assert dofmap.internal_dofs == {"e0": (), "e1": (4,), "e2": (5,)}
    assert dofmap.element_equations == {"e0": (0,), "e1": (1, 2, 3), "e2": (4, 5)}


def test_junction_network_counts(split_network):
    dofmap = build_dof_map(split_network)
    assert dofmap.total_dofs == 10
    assert dofmap.total_equations == 10


def test_element_local_dofs_follow_port_order(split_network):
    dofmap = build_dof_map(split_network)
    junction = split_network.element("j")
    assert dofmap.element_local_dofs(junction) == [0, 1, 2, 3, 4, 5]
    assert dofmap.pressure_index(3) == 4
    assert dofmap.flow_index(3) == 5


def test_count_mismatch():
    network = NetworkModel(
        wires=(Wire(id=1), Wire(id=2)),
        elements=(
            ElementSpec(id="in", params=FlowBCParams(Q=TimeSeries.constant(1.0)), outlet_wires=(1,)),
            ElementSpec(id="v", params=VesselParams(R_poiseuille=1.0), inlet_wires=(1,), outlet_wires=(2,)),
            ElementSpec(id="out", params=FlowBCParams(Q=TimeSeries.constant(1.0)), inlet_wires=(2,)),
            ElementSpec(id="extra", params=PressureBCParams(P=0.0), inlet_wires=(2,)),
        ),
        inlet_bc_id="in",
    )
    with pytest.raises(CountMismatch):
        build_dof_map(network)


def test_valid_network_has_no_diagnostics(resistor_network):
    assert validate_network(resistor_network) == []


def test_dangling_wire():
    """Wire 3 leaves the junction but reaches no element"""
    network = NetworkModel(
        wires=(Wire(id=1), Wire(id=2), Wire(id=3), Wire(id=4)),
        elements=(
            ElementSpec(id="in", params=FlowBCParams(Q=TimeSeries.constant(1.0)), outlet_wires=(1,)),
            ElementSpec(id="v", params=VesselParams(R_poiseuille=1.0), inlet_wires=(1,), outlet_wires=(2,)),
            ElementSpec(id="j", params=JunctionParams(), inlet_wires=(2,), outlet_wires=(3, 4)),
            ElementSpec(id="out", params=PressureBCParams(P=0.0), inlet_wires=(4,)),
        ),
        inlet_bc_id="in",
    )
    diagnostics = validate_network(network)
    assert [(d.code, d.entity) for d in diagnostics] == [(DiagnosticCode.DANGLING_WIRE, 3)]
    assert str(diagnostics[0]).startswith("DanglingWire(3)")


def test_multiple_inflows_are_allowed():
    builder = NetworkBuilder()
    builder.add("a", FlowBCParams(Q=TimeSeries.constant(1.0)))
    builder.add("b", FlowBCParams(Q=TimeSeries.constant(2.0)))
    builder.add("j", JunctionParams())
    builder.add("v", VesselParams(R_poiseuille=10.0))
    builder.add("out", PressureBCParams(P=0.0))
    builder.connect("a", "j")
    builder.connect("b", "j")
    builder.chain("j", "v", "out")
    network = builder.build(inlet_bc_id="a")
    assert validate_network(network) == []
    assert network.outlet_wire_ids() == [4]


def test_inlet_must_be_flow_bc(resistor_network):
    network = resistor_network.model_copy(update={"inlet_bc_id": "out"})
    codes = [d.code for d in validate_network(network)]
    assert codes == [DiagnosticCode.BAD_INLET]


def test_unknown_wire_and_bad_ports():
    network = NetworkModel(
        wires=(Wire(id=1), Wire(id=2)),
        elements=(
            ElementSpec(id="in", params=FlowBCParams(Q=TimeSeries.constant(1.0)), outlet_wires=(1,)),
            ElementSpec(id="v", params=VesselParams(R_poiseuille=1.0), inlet_wires=(1,), outlet_wires=(2, 9)),
            ElementSpec(id="out", params=PressureBCParams(P=0.0), inlet_wires=(2,)),
        ),
        inlet_bc_id="in",
    )
    found = {(d.code, d.entity) for d in validate_network(network)}
    assert (DiagnosticCode.BAD_PORT_COUNT, "v") in found
    assert (DiagnosticCode.UNKNOWN_WIRE, 9) in found


def test_disconnected_component():
    elements = (
        ElementSpec(id="in", params=FlowBCParams(Q=TimeSeries.constant(1.0)), outlet_wires=(1,)),
        ElementSpec(id="out", params=PressureBCParams(P=0.0), inlet_wires=(1,)),
        ElementSpec(id="in2", params=FlowBCParams(Q=TimeSeries.constant(1.0)), outlet_wires=(2,)),
        ElementSpec(id="out2", params=PressureBCParams(P=0.0), inlet_wires=(2,)),
    )
    network = NetworkModel(wires=(Wire(id=1), Wire(id=2)), elements=elements, inlet_bc_id="in")
    diagnostics = validate_network(network)
    assert [d.code for d in diagnostics] == [DiagnosticCode.DISCONNECTED]


def test_duplicate_ids():
    network = NetworkModel(
        wires=(Wire(id=1, label="a"), Wire(id=1, label="a")),
        elements=(
            ElementSpec(id="in", params=FlowBCParams(Q=TimeSeries.constant(1.0)), outlet_wires=(1,)),
            ElementSpec(id="in", params=PressureBCParams(P=0.0), inlet_wires=(1,)),
        ),
        inlet_bc_id="in",
    )
    codes = {d.code for d in validate_network(network)}
    assert DiagnosticCode.DUPLICATE_ID in codes
    assert DiagnosticCode.DUPLICATE_LABEL in codes


def test_builder_labels_and_validation():
    builder = NetworkBuilder()
    builder.add("in", FlowBCParams(Q=TimeSeries.constant(1.0)))
    builder.add("v", VesselParams(R_poiseuille=1.0))
    assert builder.chain("in", "v") == [1]
    with pytest.raises(ValueError):
        builder.add("v", VesselParams())
    with pytest.raises(NetworkValidationError) as excinfo:
        builder.build()
    assert any(d.code == DiagnosticCode.BAD_PORT_COUNT for d in excinfo.value.diagnostics)
    network = builder.build(validate=False)
    assert [w.label for w in network.wires] == ["in_v"]


def test_with_parameter_returns_modified_copy(rcr_network):
    network = rcr_network()
    changed = network.with_parameter("out.R_distal", 1800.0)
    assert changed.element("out").params.R_distal == 1800.0
    assert network.element("out").params.R_distal == 900.0
    with pytest.raises(KeyError):
        network.with_parameter("out.R_missing", 1.0)
    with pytest.raises(KeyError):
        network.with_parameter("nowhere.R_distal", 1.0)
    with pytest.raises(ValidationError):
        network.with_parameter("out.C", -1.0)


def test_with_mean_inflow(rcr_network, pulsatile_inflow):
    network = rcr_network(inflow=pulsatile_inflow)
    steady = network.with_mean_inflow()
    q = steady.element("in").params.Q
    assert q.values[0] == q.values[-1] == pytest.approx(timeseries_mean(pulsatile_inflow))
    assert steady.cycle_period == network.cycle_period == 1.0


def test_solution_state_shapes():
    state = SolutionState(t=0.0, y=np.ones(3))
    np.testing.assert_array_equal(state.ydot, np.zeros(3))
    with pytest.raises(DimensionMismatch):
        SolutionState(t=0.0, y=np.ones(3), ydot=np.ones(2))
