"""
Generalized-alpha time integration of the assembled network
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field
from tqdm import tqdm

from .assembly import CompiledNetwork, factorize
from .dofmap import DofMap, SolutionState, build_dof_map
from .exceptions import ConfigError, NewtonDivergence, SolverError
from .network import NetworkModel
from .results import DEFAULT_PERIODICITY_TOL, ResultSet, relative_delta

logger = logging.getLogger(__name__)


class IntegratorParams(BaseModel):
    """Time-integration and Newton settings"""
    spectral_radius: float = Field(0.0, ge=0.0, le=1.0, description="High-frequency spectral radius rho_inf")
    dt: Optional[float] = Field(None, gt=0.0, description="Time step in s; period / steps_per_cycle if unset")
    steps_per_cycle: int = Field(1000, ge=1, description="Time steps per cardiac cycle")
    max_newton_iters: int = Field(30, ge=1, description="Maximum Newton corrections per step")
    newton_abs_tol: float = Field(1e-8, gt=0.0, description="Absolute residual tolerance (CGS)")
    newton_rel_tol: float = Field(1e-5, ge=0.0, description="Tolerance relative to the first residual")

    @property
    def alpha_m(self) -> float:
        return (3.0 - self.spectral_radius) / (2.0 + 2.0 * self.spectral_radius)

    @property
    def alpha_f(self) -> float:
        return 1.0 / (1.0 + self.spectral_radius)

    @property
    def gamma(self) -> float:
        return 0.5 + self.alpha_m - self.alpha_f

    def time_step(self, period: Optional[float] = None) -> float:
        if self.dt is not None:
            return self.dt
        if period is None:
            raise ConfigError("No time step: set dt or provide the cycle period")
        return period / self.steps_per_cycle


@dataclass
class StepResult:
    state: SolutionState
    iterations: int
    residual_norms: List[float] = field(default_factory=list)


class GenAlphaIntegrator:
    """
    Owns the compiled system and the LU factorization of one simulation.
    Instances must not be shared between concurrently running simulations.
    """

    def __init__(
        self,
        network: NetworkModel,
        params: IntegratorParams,
        dofmap: Optional[DofMap] = None,
        dt: Optional[float] = None
    ):
        self.network = network
        self.params = params
        self.dofmap = dofmap or build_dof_map(network)
        self.system = CompiledNetwork(network, self.dofmap)
        self.dt = dt if dt is not None else params.time_step(network.cycle_period)
        self.alpha_m = params.alpha_m
        self.alpha_f = params.alpha_f
        self.gamma = params.gamma
        self.ydot_coefficient = self.alpha_m / (self.alpha_f * self.gamma * self.dt)
        self._linear_lu = None

    def _solve(self, y_af: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        if self.system.is_linear:
            if self._linear_lu is None:
                self._linear_lu = factorize(self.system.tangent(y_af, self.ydot_coefficient))
            return self._linear_lu.solve(rhs)
        return factorize(self.system.tangent(y_af, self.ydot_coefficient)).solve(rhs)

    def step(self, state: SolutionState) -> StepResult:
        """
        Advance one time step

        Args:
            state: Converged state at t_n

        Returns:
            StepResult with the state at t_n + dt, the number of linear solves and
            the residual norm before each of them plus the final one
        """
        am, af, gamma, dt = self.alpha_m, self.alpha_f, self.gamma, self.dt
        y_n = state.y
        yd_n = state.ydot

        # predictor
        y_next = y_n.copy()
        yd_next = ((gamma - 1.0) / gamma) * yd_n

        # initiator
        y_af = y_n + af * (y_next - y_n)
        yd_am = yd_n + am * (yd_next - yd_n)
        t_af = state.t + af * dt

        norms: List[float] = []
        iterations = 0
        while True:
            r = self.system.residual(y_af, yd_am, t_af)
            norm = float(np.linalg.norm(r))
            norms.append(norm)
            if norm < self.params.newton_abs_tol or norm < self.params.newton_rel_tol * norms[0]:
                break
            if iterations == self.params.max_newton_iters:
                raise NewtonDivergence(iterations, norm)
            dy = self._solve(y_af, -r)
            y_af = y_af + dy
            yd_am = yd_am + self.ydot_coefficient * dy
            iterations += 1

        y_new = y_n + (y_af - y_n) / af
        yd_new = yd_n + (yd_am - yd_n) / am
        return StepResult(
            state=SolutionState(t=state.t + dt, y=y_new, ydot=yd_new),
            iterations=iterations,
            residual_norms=norms,
        )


def gen_alpha_step(
    state_n: SolutionState,
    params: IntegratorParams,
    network: NetworkModel,
    dofmap: Optional[DofMap] = None,
    dt: Optional[float] = None
) -> StepResult:
    """Single generalized-alpha step with a throwaway integrator"""
    return GenAlphaIntegrator(network, params, dofmap=dofmap, dt=dt).step(state_n)


def run_simulation(
    network: NetworkModel,
    params: IntegratorParams,
    n_cycles: int,
    initial: Optional[SolutionState] = None,
    store_all_cycles: bool = True,
    progress: bool = False,
    dofmap: Optional[DofMap] = None
) -> ResultSet:
    """
    Integrate a network over whole cardiac cycles

    Args:
        network: Validated network
        params: Integrator settings
        n_cycles: Number of cycles to simulate
        initial: Starting state at t=0 (zero state if None)
        store_all_cycles: Keep every step; otherwise only the last cycle is stored
        progress: Show a tqdm progress bar
        dofmap: Precomputed numbering of the network

    Returns:
        ResultSet with wire pressures and flows and the Newton statistics

    Raises:
        SolverError: NewtonDivergence or SingularTangent with step and time set
    """
    if n_cycles < 1:
        raise ConfigError(f"n_cycles must be >= 1, got {n_cycles}")
    integrator = GenAlphaIntegrator(network, params, dofmap=dofmap)
    dofmap = integrator.dofmap
    spc = params.steps_per_cycle
    n_steps = n_cycles * spc

    state = initial.copy() if initial is not None else SolutionState.zeros(dofmap.total_dofs)
    state.check_size(dofmap)

    wire_ids = [w.id for w in network.wires]
    p_idx = np.array([dofmap.pressure_index(w) for w in wire_ids], dtype=int)
    q_idx = np.array([dofmap.flow_index(w) for w in wire_ids], dtype=int)

    first_stored = 0 if store_all_cycles else (n_cycles - 1) * spc
    n_stored = n_steps - first_stored + 1
    time = np.empty(n_stored)
    pressure = np.empty((n_stored, len(wire_ids)))
    flow = np.empty((n_stored, len(wire_ids)))
    iterations = np.zeros(n_steps, dtype=int)

    def store(step: int, s: SolutionState) -> None:
        if step >= first_stored:
            i = step - first_stored
            time[i] = s.t
            pressure[i] = s.y[p_idx]
            flow[i] = s.y[q_idx]

    logger.info(
        f"Simulating {n_cycles} cycles x {spc} steps (dt={integrator.dt:.4g} s, "
        f"{dofmap.total_dofs} dofs, {len(network.elements)} elements)"
    )
    store(0, state)
    steps = range(1, n_steps + 1)
    if progress:
        steps = tqdm(steps, desc="Time steps", unit="step")
    for step in steps:
        try:
            result = integrator.step(state)
        except SolverError as e:
            raise e.with_context(step, state.t + integrator.dt)
        state = result.state
        iterations[step - 1] = result.iterations
        store(step, state)
        logger.debug(f"Step {step}: t={state.t:.6g}, {result.iterations} Newton iterations")

    cycle_starts = list(range(0, n_stored - 1, spc))
    logger.info(f"Simulation finished, {int(iterations.sum())} Newton iterations in total")
    return ResultSet(
        time=time,
        wire_ids=wire_ids,
        wire_labels=[w.label for w in network.wires],
        pressure=pressure,
        flow=flow,
        newton_iterations=iterations,
        steps_per_cycle=spc,
        cycle_starts=cycle_starts,
        outlet_wire_ids=network.outlet_wire_ids(),
        final_state=state,
    )


def steady_initial_state(
    network: NetworkModel,
    params: IntegratorParams,
    max_cycles: int = 50,
    tol: float = DEFAULT_PERIODICITY_TOL
) -> SolutionState:
    """
    Warm start: integrate the network with cycle-averaged inflow until the outlet
    pressures stop changing between cycles

    Args:
        network: Network to initialize
        params: Integrator settings (the same time step is used)
        max_cycles: Cycle budget of the warm start
        tol: Periodicity tolerance

    Returns:
        Final state of the steady run, shifted to t=0
    """
    steady = network.with_mean_inflow()
    integrator = GenAlphaIntegrator(steady, params)
    dofmap = integrator.dofmap
    outlet_p = np.array([dofmap.pressure_index(w) for w in network.outlet_wire_ids()], dtype=int)
    state = SolutionState.zeros(dofmap.total_dofs)
    previous: Optional[np.ndarray] = None
    for cycle in range(max_cycles):
        total = np.zeros(outlet_p.size)
        for _ in range(params.steps_per_cycle):
            total += state.y[outlet_p]
            state = integrator.step(state).state
        means = total / params.steps_per_cycle
        if previous is not None:
            deltas = [relative_delta(a, b) for a, b in zip(previous, means)]
            if all(d < tol for d in deltas):
                logger.info(f"Steady warm start converged after {cycle + 1} cycles")
                return SolutionState(t=0.0, y=state.y, ydot=state.ydot)
        previous = means
    logger.warning(f"Steady warm start did not converge within {max_cycles} cycles")
    return SolutionState(t=0.0, y=state.y, ydot=state.ydot)
