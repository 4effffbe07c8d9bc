"""
Tests for the local element equations, the assembled tangent and the linear solve
"""
import numpy as np
import pytest
import scipy.sparse as sp

from zerod_rom.assembly import CompiledNetwork, assemble, solve_linear
from zerod_rom.dofmap import build_dof_map
from zerod_rom.elements import (
    K_T,
    element_local_system,
    stenosis_coefficient,
)
from zerod_rom.exceptions import DimensionMismatch, NonPositiveArea, OutOfRange, SingularTangent
from zerod_rom.network import ElementSpec, NetworkBuilder
from zerod_rom.parameters import (
    CoronaryParams,
    FlowBCParams,
    JunctionParams,
    PressureBCParams,
    ResistanceBCParams,
    VesselParams,
    WindkesselParams,
)
from zerod_rom.timeseries import TimeSeries


def _vessel(**params):
    return ElementSpec(id="v", params=VesselParams(**params), inlet_wires=(1,), outlet_wires=(2,))


def test_resistor_vessel_arrays():
    """A resistor-only vessel has F = [[1, -R, -1, 0], [0, 1, 0, -1]] and no E or c"""
    local = element_local_system(_vessel(R_poiseuille=7.0), np.zeros(4), np.zeros(4), 0.0)
    np.testing.assert_array_equal(local.F, [[1.0, -7.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0]])
    np.testing.assert_array_equal(local.E, np.zeros((2, 4)))
    np.testing.assert_array_equal(local.c, np.zeros(2))


def test_rcl_vessel_has_internal_pressure():
    local = element_local_system(_vessel(R_poiseuille=1.0, C=2.0, L=3.0), np.zeros(5), np.zeros(5), 0.0)
    assert local.F.shape == (3, 5)
    assert local.E[1, 4] == 2.0
    assert local.E[2, 3] == -3.0


def test_junction_constraints_satisfied():
    spec = ElementSpec(id="j", params=JunctionParams(), inlet_wires=(1,), outlet_wires=(2, 3))
    y = np.array([5.0, 4.0, 5.0, 3.0, 5.0, 1.0])
    local = element_local_system(spec, y, np.zeros(6), 0.0)
    np.testing.assert_allclose(local.residual(y, np.zeros(6)), np.zeros(3), atol=0.0)


def test_junction_detects_pressure_jump_and_mass_defect():
    spec = ElementSpec(id="j", params=JunctionParams(), inlet_wires=(1,), outlet_wires=(2, 3))
    y = np.array([5.0, 4.0, 6.0, 3.0, 5.0, 2.0])
    r = element_local_system(spec, y, np.zeros(6), 0.0).residual(y, np.zeros(6))
    np.testing.assert_allclose(r, [-1.0, 0.0, -1.0])


def test_junction_residual_ignores_outlet_order():
    rng = np.random.default_rng(8)
    outlets = (3, 4, 5)
    base = ElementSpec(id="j", params=JunctionParams(), inlet_wires=(1, 2), outlet_wires=outlets)
    for _ in range(10):
        values = {w: rng.uniform(-10.0, 10.0, 2) for w in (1, 2) + outlets}
        y = np.concatenate([values[w] for w in base.wires])
        r = element_local_system(base, y, np.zeros(10), 0.0).residual(y, np.zeros(10))
        order = tuple(int(w) for w in rng.permutation(outlets))
        spec = base.model_copy(update={"outlet_wires": order})
        y_perm = np.concatenate([values[w] for w in spec.wires])
        r_perm = element_local_system(spec, y_perm, np.zeros(10), 0.0).residual(y_perm, np.zeros(10))
        np.testing.assert_allclose(np.sort(r_perm[:-1]), np.sort(r[:-1]), rtol=0.0, atol=0.0)
        assert r_perm[-1] == pytest.approx(r[-1], rel=1e-14, abs=1e-13)


def test_assembled_residual_of_resistor_chain():
    builder = NetworkBuilder()
    builder.add("in", FlowBCParams(Q=TimeSeries.constant(2.0)))
    builder.add("v", VesselParams(R_poiseuille=3.0))
    builder.add("out", PressureBCParams(P=0.0))
    builder.chain("in", "v", "out")
    network = builder.build()
    dofmap = build_dof_map(network)
    zero = np.zeros(4)
    np.testing.assert_array_equal(assemble(network, dofmap, zero, zero, 0.0).residual, [-2.0, 0.0, 0.0, 0.0])
    exact = np.array([6.0, 2.0, 0.0, 2.0])
    np.testing.assert_array_equal(assemble(network, dofmap, exact, zero, 0.0).residual, zero)


def test_stenosis_vessel_steady_pressure_drop():
    """P_in - P_out = (R + K_s |Q|) Q for R=2, K_s=0.5, Q=3"""
    spec = _vessel(R_poiseuille=2.0, stenosis_coefficient=0.5)
    y = np.array([10.5, 3.0, 0.0, 3.0])
    local = element_local_system(spec, y, np.zeros(4), 0.0)
    np.testing.assert_allclose(local.residual(y, np.zeros(4)), np.zeros(2), atol=1e-14)


def test_windkessel_steady_state():
    spec = ElementSpec(
        id="rcr",
        params=WindkesselParams(R_proximal=100.0, C=1e-4, R_distal=900.0, P_distal=10.0),
        inlet_wires=(1,),
    )
    y = np.array([5010.0, 5.0, 4510.0])
    local = element_local_system(spec, y, np.zeros(3), 0.0)
    np.testing.assert_allclose(local.residual(y, np.zeros(3)), np.zeros(2), atol=1e-10)


def test_windkessel_upstream_of_wire_flips_flow_sign():
    """An RCR feeding its wire sees the wire flow leaving it"""
    spec = ElementSpec(
        id="rcr",
        params=WindkesselParams(R_proximal=100.0, C=1e-4, R_distal=900.0, P_distal=10.0),
        outlet_wires=(1,),
    )
    y = np.array([5010.0, -5.0, 4510.0])
    local = element_local_system(spec, y, np.zeros(3), 0.0)
    np.testing.assert_allclose(local.residual(y, np.zeros(3)), np.zeros(2), atol=1e-10)


def test_resistance_bc():
    spec = ElementSpec(id="r", params=ResistanceBCParams(R=50.0, P_distal=100.0), inlet_wires=(1,))
    y = np.array([350.0, 5.0])
    local = element_local_system(spec, y, np.zeros(2), 0.0)
    np.testing.assert_allclose(local.residual(y, np.zeros(2)), [0.0])


def test_coronary_steady_state_with_constant_intramyocardial_pressure():
    params = CoronaryParams(
        R_a=10.0, R_am=20.0, R_v=30.0, C_a=1e-3, C_im=1e-3, P_v_distal=5.0,
        P_im=TimeSeries.constant(100.0),
    )
    spec = ElementSpec(id="cor", params=params, inlet_wires=(1,))
    y = np.array([65.0, 1.0, 55.0, 1.0, 35.0])
    local = element_local_system(spec, y, np.zeros(5), 0.3)
    np.testing.assert_allclose(local.residual(y, np.zeros(5)), np.zeros(4), atol=1e-12)


def test_coronary_forcing_follows_intramyocardial_slope():
    p_im = TimeSeries.from_samples([0.0, 0.5, 1.0], [0.0, 1000.0, 0.0])
    ground = CoronaryParams(R_a=10.0, R_am=20.0, R_v=30.0, C_a=1e-3, C_im=2e-3, P_im=p_im)
    spec = ElementSpec(id="cor", params=ground, inlet_wires=(1,))
    c = element_local_system(spec, np.zeros(5), np.zeros(5), 0.25).c
    # dP_im/dt = 2000 on the rising half
    assert c[1] == 0.0
    assert c[3] == pytest.approx(-30.0 * 2e-3 * 2000.0)

    coupled = ground.model_copy(update={"ca_reference": "intramyocardial"})
    spec = ElementSpec(id="cor", params=coupled, inlet_wires=(1,))
    c = element_local_system(spec, np.zeros(5), np.zeros(5), 0.75).c
    assert c[1] == pytest.approx(1e-3 * 2000.0)


def test_flow_bc_forcing_interpolates_inflow():
    q = TimeSeries.from_samples([0.0, 1.0], [0.0, 10.0])
    spec = ElementSpec(id="in", params=FlowBCParams(Q=q), outlet_wires=(1,))
    local = element_local_system(spec, np.zeros(2), np.zeros(2), 0.5)
    assert local.c[0] == pytest.approx(-5.0)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        element_local_system(_vessel(R_poiseuille=1.0), np.zeros(3), np.zeros(3), 0.0)


def test_stenosis_coefficient_value():
    k_s = stenosis_coefficient(3.0, 1.0, 1.06)
    assert K_T == 1.52
    assert k_s == pytest.approx(1.52 * 1.06 / 18.0 * 4.0, rel=1e-14)
    assert k_s == pytest.approx(0.358044, rel=1e-5)
    # the vessel loses K_s |Q| Q on top of the Poiseuille drop
    spec = _vessel(R_poiseuille=0.0, stenosis_coefficient=k_s)
    for flow, drop in ((20.0, 143.2178), (-20.0, -143.2178)):
        y = np.array([0.0, flow, 0.0, flow])
        r = element_local_system(spec, y, np.zeros(4), 0.0).residual(y, np.zeros(4))
        assert -r[0] == pytest.approx(drop, rel=1e-5)


def test_stenosis_coefficient_poiseuille_limit():
    assert stenosis_coefficient(2.5, 2.5, 1.06) == 0.0


def test_stenosis_coefficient_rejects_bad_areas():
    with pytest.raises(NonPositiveArea):
        stenosis_coefficient(0.0, 1.0, 1.06)
    with pytest.raises(NonPositiveArea):
        stenosis_coefficient(1.0, -1.0, 1.06)
    with pytest.raises(OutOfRange):
        stenosis_coefficient(1.0, 2.0, 1.06)


def _stenosis_tree():
    inflow = TimeSeries.from_samples([0.0, 0.3, 1.0], [10.0, 50.0, 10.0])
    builder = NetworkBuilder()
    builder.add("in", FlowBCParams(Q=inflow))
    builder.add("v0", VesselParams(R_poiseuille=20.0, C=1e-5, L=2.0, stenosis_coefficient=0.4))
    builder.add("j", JunctionParams())
    builder.add("v1", VesselParams(R_poiseuille=50.0, C=2e-5, L=1.0, stenosis_coefficient=1.5))
    builder.add("v2", VesselParams(R_poiseuille=80.0, L=1.5, stenosis_coefficient=0.8))
    builder.add("o1", WindkesselParams(R_proximal=100.0, C=1e-4, R_distal=900.0, P_distal=10.0))
    builder.add("o2", ResistanceBCParams(R=400.0, P_distal=5.0))
    builder.connect("in", "v0")
    builder.connect("v0", "j")
    builder.connect("j", "v1")
    builder.connect("j", "v2")
    builder.connect("v1", "o1")
    builder.connect("v2", "o2")
    return builder.build()


def test_compiled_network_matches_element_assembly():
    network = _stenosis_tree()
    dofmap = build_dof_map(network)
    compiled = CompiledNetwork(network, dofmap)
    rng = np.random.default_rng(3)
    for _ in range(5):
        y = rng.uniform(-50.0, 50.0, dofmap.total_dofs)
        ydot = rng.uniform(-10.0, 10.0, dofmap.total_dofs)
        t = rng.uniform(0.0, 1.0)
        reference = assemble(network, dofmap, y, ydot, t, ydot_coefficient=123.0)
        np.testing.assert_allclose(compiled.residual(y, ydot, t), reference.residual, rtol=1e-12, atol=1e-10)
        np.testing.assert_allclose(
            compiled.tangent(y, 123.0).toarray(), reference.tangent.toarray(), rtol=1e-12, atol=1e-12
        )


def test_tangent_matches_finite_differences():
    """Analytic tangent a*E + F + stenosis terms agrees with central differences"""
    network = _stenosis_tree()
    dofmap = build_dof_map(network)
    compiled = CompiledNetwork(network, dofmap)
    a = 250.0
    rng = np.random.default_rng(11)
    for _ in range(20):
        y0 = rng.uniform(-100.0, 100.0, dofmap.total_dofs)
        ydot0 = rng.uniform(-10.0, 10.0, dofmap.total_dofs)
        t = rng.uniform(0.0, 1.0)

        def r(y):
            return compiled.residual(y, ydot0 + a * (y - y0), t)

        K = compiled.tangent(y0, a).toarray()
        fd = np.zeros_like(K)
        for j in range(dofmap.total_dofs):
            h = 1e-6 * max(1.0, abs(y0[j]))
            e = np.zeros(dofmap.total_dofs)
            e[j] = h
            fd[:, j] = (r(y0 + e) - r(y0 - e)) / (2.0 * h)
        np.testing.assert_allclose(fd, K, rtol=1e-6, atol=1e-6 * np.abs(K).max())


def test_solve_linear_identity_and_diagonal():
    r = np.array([1.0, -2.0, 3.0])
    np.testing.assert_allclose(solve_linear(sp.identity(3), r), r)
    K = sp.csr_matrix(np.array([[2.0, 0.0], [0.0, 4.0]]))
    np.testing.assert_allclose(solve_linear(K, np.array([2.0, 8.0])), [1.0, 2.0])


def test_solve_linear_diagonally_dominant():
    rng = np.random.default_rng(5)
    n = 50
    off = sp.random(n, n, density=0.1, random_state=7, format="csr")
    diag = np.asarray(abs(off).sum(axis=1)).ravel() + 1.0 + rng.uniform(0.0, 1.0, n)
    K = (off + sp.diags(diag)).tocsr()
    rhs = rng.normal(size=n)
    x = solve_linear(K, rhs)
    assert np.linalg.norm(K @ x - rhs) / np.linalg.norm(rhs) < 1e-12


def test_solve_linear_singular():
    with pytest.raises(SingularTangent):
        solve_linear(sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 4.0]])), np.array([1.0, 1.0]))
