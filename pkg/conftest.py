"""
Shared fixtures: small networks used across the test modules
"""
import numpy as np
import pytest

from zerod_rom.network import NetworkBuilder
from zerod_rom.parameters import (
    FlowBCParams,
    JunctionParams,
    PressureBCParams,
    VesselParams,
    WindkesselParams,
)
from zerod_rom.timeseries import TimeSeries


@pytest.fixture
def pulsatile_inflow():
    """Half-sine systole followed by a constant diastolic flow, period 1 s"""
    t = np.linspace(0.0, 1.0, 41)
    q = np.where(t < 0.4, 5.0 + 60.0 * np.sin(np.pi * t / 0.4), 5.0)
    q[-1] = q[0]
    return TimeSeries.from_samples(t, q)


@pytest.fixture
def resistor_network():
    """FlowBC -> resistor-only vessel -> PressureBC"""
    builder = NetworkBuilder()
    builder.add("in", FlowBCParams(Q=TimeSeries.constant(5.0)))
    builder.add("v", VesselParams(R_poiseuille=10.0))
    builder.add("out", PressureBCParams(P=0.0))
    builder.chain("in", "v", "out")
    return builder.build()


@pytest.fixture
def rcr_network():
    """Factory for FlowBC -> WindkesselRCR on a single wire"""

    def make(Q=5.0, R_p=100.0, R_d=900.0, C=1.0e-4, P_d=10.0, inflow=None):
        builder = NetworkBuilder()
        builder.add("in", FlowBCParams(Q=inflow if inflow is not None else TimeSeries.constant(Q)))
        builder.add("out", WindkesselParams(R_proximal=R_p, C=C, R_distal=R_d, P_distal=P_d))
        builder.connect("in", "out")
        return builder.build()

    return make


@pytest.fixture
def split_network():
    """Inflow 4 through a junction into R=100 and R=300 vessels ending at zero pressure"""
    builder = NetworkBuilder()
    builder.add("in", FlowBCParams(Q=TimeSeries.constant(4.0)))
    builder.add("j", JunctionParams())
    builder.add("v1", VesselParams(R_poiseuille=100.0))
    builder.add("v2", VesselParams(R_poiseuille=300.0))
    builder.add("o1", PressureBCParams(P=0.0))
    builder.add("o2", PressureBCParams(P=0.0))
    builder.connect("in", "j")
    builder.connect("j", "v1")
    builder.connect("j", "v2")
    builder.connect("v1", "o1")
    builder.connect("v2", "o2")
    return builder.build()


@pytest.fixture
def stenosis_network():
    """Factory for FlowBC -> stenosis vessel -> PressureBC"""

    def make(Q=20.0, R=2.0, K_s=0.5, C=0.0, L=0.0, P=0.0):
        builder = NetworkBuilder()
        builder.add("in", FlowBCParams(Q=TimeSeries.constant(Q)))
        builder.add("v", VesselParams(R_poiseuille=R, C=C, L=L, stenosis_coefficient=K_s))
        builder.add("out", PressureBCParams(P=P))
        builder.chain("in", "v", "out")
        return builder.build()

    return make
