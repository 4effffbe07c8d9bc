"""
Local governing equations of the lumped elements.

Every element contributes equations of the form

    E(y) * ydot + F(y) * y + c(y, t) = 0

over its local unknowns. Port unknowns come first as (P, Q) pairs, inlet wires
before outlet wires, followed by the element's internal unknowns:

    Vessel, C > 0      [P_in, Q_in, P_out, Q_out, P_c]
    Vessel, C = 0      [P_in, Q_in, P_out, Q_out]
    Junction           [P_1, Q_1, ..., P_m, Q_m]
    Flow/Pressure/Resistance BC   [P, Q]
    WindkesselRCR      [P, Q, P_c]
    CoronaryRCRCR      [P, Q, P_a, Q_am, P_v]
"""
import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Dict, Optional, Sequence

import numpy as np

from .exceptions import DimensionMismatch, NonPositiveArea, OutOfRange, UnknownKind
from .parameters import ElementKind
from .timeseries import periodic_interp, periodic_slope

if TYPE_CHECKING:
    from .network import ElementSpec

logger = logging.getLogger(__name__)

K_T = 1.52
"""Empirical correction factor of the expansion loss"""


@dataclass
class LocalSystem:
    """Local arrays of one element evaluated at one state"""
    E: np.ndarray
    F: np.ndarray
    c: np.ndarray
    dE: np.ndarray
    dF: np.ndarray
    dc: np.ndarray
    dofs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def n_equations(self) -> int:
        return self.F.shape[0]

    @property
    def n_local(self) -> int:
        return self.F.shape[1]

    def residual(self, y_local: np.ndarray, ydot_local: np.ndarray) -> np.ndarray:
        return self.E @ ydot_local + self.F @ y_local + self.c

    def tangent(self, ydot_coefficient: float) -> np.ndarray:
        """Local contribution dE + a*E + dF + F + dc to the global tangent"""
        return self.dE + ydot_coefficient * self.E + self.dF + self.F + self.dc


def _port_count(spec: "ElementSpec") -> int:
    return len(spec.inlet_wires) + len(spec.outlet_wires)


def internal_dof_count(spec: "ElementSpec") -> int:
    kind = spec.kind
    if kind == ElementKind.VESSEL:
        return 1 if spec.params.C > 0.0 else 0
    if kind == ElementKind.WINDKESSEL_RCR:
        return 1
    if kind == ElementKind.CORONARY_RCRCR:
        return 3
    return 0


def equation_count(spec: "ElementSpec") -> int:
    kind = spec.kind
    if kind == ElementKind.VESSEL:
        return 3 if spec.params.C > 0.0 else 2
    if kind == ElementKind.JUNCTION:
        return _port_count(spec)
    if kind == ElementKind.WINDKESSEL_RCR:
        return 2
    if kind == ElementKind.CORONARY_RCRCR:
        return 4
    return 1


def local_dof_count(spec: "ElementSpec") -> int:
    return 2 * _port_count(spec) + internal_dof_count(spec)


def flow_sign(spec: "ElementSpec") -> float:
    """+1 when the boundary block receives the wire's flow, -1 when it feeds the wire"""
    return 1.0 if spec.inlet_wires else -1.0


def forcing_function(spec: "ElementSpec") -> Callable[[float], np.ndarray]:
    """
    Build the time-dependent part c(t) of an element's equations

    Series arrays are extracted once so the returned callable can be evaluated
    every time step without reconverting the samples.

    Args:
        spec: Element specification

    Returns:
        Callable mapping a time in s to the element's c vector
    """
    kind = spec.kind
    params = spec.params
    n_eq = equation_count(spec)

    if kind == ElementKind.FLOW_BC:
        times = np.asarray(params.Q.times)
        values = np.asarray(params.Q.values)
        period = params.Q.period

        def flow_forcing(t: float) -> np.ndarray:
            return np.array([-periodic_interp(times, values, period, t)])

        return flow_forcing

    if kind == ElementKind.CORONARY_RCRCR:
        times = np.asarray(params.P_im.times)
        values = np.asarray(params.P_im.values)
        period = params.P_im.period
        ground = params.ca_reference == "ground"

        def coronary_forcing(t: float) -> np.ndarray:
            dp_im = periodic_slope(times, values, period, t)
            c = np.zeros(4)
            if not ground:
                c[1] = -params.C_a * dp_im
            c[3] = -params.R_v * params.C_im * dp_im - params.P_v_distal
            return c

        return coronary_forcing

    static = np.zeros(n_eq)
    if kind == ElementKind.PRESSURE_BC:
        static[0] = -params.P
    elif kind == ElementKind.RESISTANCE_BC:
        static[0] = -params.P_distal
    elif kind == ElementKind.WINDKESSEL_RCR:
        static[1] = -params.P_distal

    def static_forcing(t: float) -> np.ndarray:
        return static.copy()

    return static_forcing


def is_time_dependent(spec: "ElementSpec") -> bool:
    return spec.kind in (ElementKind.FLOW_BC, ElementKind.CORONARY_RCRCR)


def element_forcing(spec: "ElementSpec", t: float) -> np.ndarray:
    return forcing_function(spec)(t)


def _vessel(spec: "ElementSpec", y: np.ndarray):
    p = spec.params
    q_in = y[1]
    loss = p.stenosis_coefficient * abs(q_in)
    if p.C > 0.0:
        E = np.zeros((3, 5))
        F = np.zeros((3, 5))
        dF = np.zeros((3, 5))
        F[0] = [1.0, -(p.R_poiseuille + loss), 0.0, 0.0, -1.0]
        dF[0, 1] = -loss
        E[1, 4] = p.C
        F[1] = [0.0, -1.0, 0.0, 1.0, 0.0]
        E[2, 3] = -p.L
        F[2] = [0.0, 0.0, -1.0, 0.0, 1.0]
    else:
        E = np.zeros((2, 4))
        F = np.zeros((2, 4))
        dF = np.zeros((2, 4))
        F[0] = [1.0, -(p.R_poiseuille + loss), -1.0, 0.0]
        dF[0, 1] = -loss
        E[0, 3] = -p.L
        F[1] = [0.0, 1.0, 0.0, -1.0]
    return E, F, dF


def _junction(spec: "ElementSpec", y: np.ndarray):
    n_in = len(spec.inlet_wires)
    m = _port_count(spec)
    F = np.zeros((m, 2 * m))
    for k in range(1, m):
        F[k - 1, 0] = 1.0
        F[k - 1, 2 * k] = -1.0
    for k in range(m):
        F[m - 1, 2 * k + 1] = 1.0 if k < n_in else -1.0
    return np.zeros_like(F), F, np.zeros_like(F)


def _flow_bc(spec: "ElementSpec", y: np.ndarray):
    F = np.array([[0.0, 1.0]])
    return np.zeros_like(F), F, np.zeros_like(F)


def _pressure_bc(spec: "ElementSpec", y: np.ndarray):
    F = np.array([[1.0, 0.0]])
    return np.zeros_like(F), F, np.zeros_like(F)


def _resistance_bc(spec: "ElementSpec", y: np.ndarray):
    F = np.array([[1.0, -spec.params.R * flow_sign(spec)]])
    return np.zeros_like(F), F, np.zeros_like(F)


def _windkessel(spec: "ElementSpec", y: np.ndarray):
    p = spec.params
    s = flow_sign(spec)
    E = np.zeros((2, 3))
    F = np.zeros((2, 3))
    F[0] = [1.0, -p.R_proximal * s, -1.0]
    # distal equation multiplied through by R_distal
    E[1, 2] = p.R_distal * p.C
    F[1] = [0.0, -p.R_distal * s, 1.0]
    return E, F, np.zeros_like(F)


def _coronary(spec: "ElementSpec", y: np.ndarray):
    p = spec.params
    s = flow_sign(spec)
    E = np.zeros((4, 5))
    F = np.zeros((4, 5))
    F[0] = [1.0, -p.R_a * s, -1.0, 0.0, 0.0]
    E[1, 2] = p.C_a
    F[1] = [0.0, -s, 0.0, 1.0, 0.0]
    F[2] = [0.0, 0.0, 1.0, -p.R_am, -1.0]
    # venous equation multiplied through by R_v
    E[3, 4] = p.R_v * p.C_im
    F[3] = [0.0, 0.0, 0.0, -p.R_v, 1.0]
    return E, F, np.zeros_like(F)


_LOCAL_MATRICES: Dict[ElementKind, Callable] = {
    ElementKind.VESSEL: _vessel,
    ElementKind.JUNCTION: _junction,
    ElementKind.FLOW_BC: _flow_bc,
    ElementKind.PRESSURE_BC: _pressure_bc,
    ElementKind.RESISTANCE_BC: _resistance_bc,
    ElementKind.WINDKESSEL_RCR: _windkessel,
    ElementKind.CORONARY_RCRCR: _coronary,
}


def element_local_system(
    spec: "ElementSpec",
    y_local: Sequence[float],
    ydot_local: Sequence[float],
    t: float,
    dofs: Optional[Sequence[int]] = None
) -> LocalSystem:
    """
    Evaluate the local arrays of an element

    Args:
        spec: Element specification
        y_local: Local solution values in the element's dof order
        ydot_local: Local time derivatives
        t: Evaluation time in s
        dofs: Global indices of the local dofs (defaults to 0..n_local-1)

    Returns:
        LocalSystem with E, F, c and the tangent blocks dE, dF, dc
    """
    try:
        build = _LOCAL_MATRICES[spec.kind]
    except KeyError:
        raise UnknownKind(f"Element '{spec.id}' has unsupported kind {spec.kind!r}")

    n_local = local_dof_count(spec)
    y_local = np.asarray(y_local, dtype=float)
    ydot_local = np.asarray(ydot_local, dtype=float)
    if y_local.shape != (n_local,) or ydot_local.shape != (n_local,):
        raise DimensionMismatch(
            f"Element '{spec.id}' ({spec.kind.value}) expects {n_local} local dofs, "
            f"got y of shape {y_local.shape} and ydot of shape {ydot_local.shape}"
        )

    E, F, dF = build(spec, y_local)
    c = element_forcing(spec, t)
    if dofs is None:
        dofs = np.arange(n_local)
    return LocalSystem(
        E=E,
        F=F,
        c=c,
        dE=np.zeros_like(E),
        dF=dF,
        dc=np.zeros_like(F),
        dofs=np.asarray(dofs, dtype=int),
    )


def stenosis_coefficient(S0: float, Ss: float, density: float) -> float:
    """
    Expansion loss coefficient of a stenosis

    The pressure loss of the stenosis is K_s * |Q| * Q.

    Args:
        S0: Healthy (proximal) cross-sectional area in cm^2
        Ss: Stenosed cross-sectional area in cm^2
        density: Blood density in g/cm^3

    Returns:
        K_s in dyn s^2/cm^8
    """
    if not (S0 > 0.0 and Ss > 0.0):
        raise NonPositiveArea(f"Areas must be positive, got S0={S0}, Ss={Ss}")
    if Ss > S0:
        raise OutOfRange(f"Stenosed area {Ss} exceeds healthy area {S0}")
    return K_T * density / (2.0 * S0 ** 2) * (S0 / Ss - 1.0) ** 2
