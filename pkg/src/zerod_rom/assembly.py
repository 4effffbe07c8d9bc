"""
Global residual and tangent assembly, and the sparse direct solve
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .dofmap import DofMap
from .elements import element_local_system, forcing_function, is_time_dependent, local_dof_count
from .exceptions import DimensionMismatch, SingularTangent
from .network import NetworkModel
from .parameters import ElementKind

logger = logging.getLogger(__name__)


@dataclass
class GlobalSystem:
    """Residual r = E*ydot + F*y + c and tangent K of the assembled network"""
    residual: np.ndarray
    tangent: sp.csr_matrix


def assemble(
    network: NetworkModel,
    dofmap: DofMap,
    y: np.ndarray,
    ydot: np.ndarray,
    t: float,
    ydot_coefficient: float = 0.0
) -> GlobalSystem:
    """
    Scatter every element's local system into the global arrays

    Args:
        network: Validated network
        dofmap: Numbering of the network
        y: Global solution vector
        ydot: Global time derivative
        t: Evaluation time in s
        ydot_coefficient: Factor a multiplying E in the tangent
            (alpha_m / (alpha_f * gamma * dt) inside the time integrator)

    Returns:
        GlobalSystem with residual and tangent dE + a*E + dF + F + dc
    """
    y = np.asarray(y, dtype=float)
    ydot = np.asarray(ydot, dtype=float)
    n = dofmap.total_dofs
    if y.shape != (n,) or ydot.shape != (n,):
        raise DimensionMismatch(f"Expected vectors of length {n}, got {y.shape} and {ydot.shape}")

    residual = np.zeros(n)
    rows: List[np.ndarray] = []
    cols: List[np.ndarray] = []
    vals: List[np.ndarray] = []
    for spec in network.elements:
        dofs = np.asarray(dofmap.element_local_dofs(spec), dtype=int)
        eqs = np.asarray(dofmap.element_equations[spec.id], dtype=int)
        local = element_local_system(spec, y[dofs], ydot[dofs], t, dofs=dofs)
        residual[eqs] += local.residual(y[dofs], ydot[dofs])
        block = local.tangent(ydot_coefficient)
        r_idx, c_idx = np.nonzero(block)
        rows.append(eqs[r_idx])
        cols.append(dofs[c_idx])
        vals.append(block[r_idx, c_idx])

    tangent = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    return GlobalSystem(residual=residual, tangent=tangent)


def solve_linear(K, rhs: np.ndarray) -> np.ndarray:
    """
    Solve K x = rhs with a sparse LU factorization (partial pivoting)

    Raises:
        SingularTangent: If the factorization finds K singular
    """
    return factorize(K).solve(np.asarray(rhs, dtype=float))


class _Factorization:
    def __init__(self, lu):
        self._lu = lu

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x = self._lu.solve(rhs)
        if not np.all(np.isfinite(x)):
            raise SingularTangent("Linear solve produced non-finite values")
        return x


def factorize(K) -> _Factorization:
    K = sp.csc_matrix(K, dtype=float)
    if K.shape[0] != K.shape[1]:
        raise DimensionMismatch(f"Tangent must be square, got shape {K.shape}")
    try:
        return _Factorization(splu(K))
    except RuntimeError as e:
        raise SingularTangent(f"Tangent factorization failed: {e}")


class CompiledNetwork:
    """
    Vectorized residual and tangent of one network.

    E and the linear part of F are assembled once. The only state-dependent
    terms are the stenosis losses, kept as (row, Q_in column, K_s) arrays; the
    only time-dependent terms are the forcings of FlowBC and coronary blocks.
    """

    def __init__(self, network: NetworkModel, dofmap: DofMap):
        self.dofmap = dofmap
        n = dofmap.total_dofs
        self.size = n

        e_triplets: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        f_triplets: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        self._static_c = np.zeros(n)
        self._dynamic: List[Tuple[np.ndarray, Callable[[float], np.ndarray]]] = []
        sten_rows: List[int] = []
        sten_cols: List[int] = []
        sten_k: List[float] = []

        for spec in network.elements:
            dofs = np.asarray(dofmap.element_local_dofs(spec), dtype=int)
            eqs = np.asarray(dofmap.element_equations[spec.id], dtype=int)
            zeros = np.zeros(local_dof_count(spec))
            local = element_local_system(spec, zeros, zeros, 0.0, dofs=dofs)
            for matrix, triplets in ((local.E, e_triplets), (local.F, f_triplets)):
                r_idx, c_idx = np.nonzero(matrix)
                triplets.append((eqs[r_idx], dofs[c_idx], matrix[r_idx, c_idx]))

            if is_time_dependent(spec):
                self._dynamic.append((eqs, forcing_function(spec)))
            else:
                self._static_c[eqs] += local.c

            if spec.kind == ElementKind.VESSEL and spec.params.stenosis_coefficient > 0.0:
                sten_rows.append(int(eqs[0]))
                sten_cols.append(int(dofs[1]))
                sten_k.append(spec.params.stenosis_coefficient)

        self.E = self._to_csr(e_triplets, n)
        self.F = self._to_csr(f_triplets, n)
        self._sten_rows = np.asarray(sten_rows, dtype=int)
        self._sten_cols = np.asarray(sten_cols, dtype=int)
        self._sten_k = np.asarray(sten_k, dtype=float)

    @staticmethod
    def _to_csr(triplets, n: int) -> sp.csr_matrix:
        if not triplets:
            return sp.csr_matrix((n, n))
        rows = np.concatenate([t[0] for t in triplets])
        cols = np.concatenate([t[1] for t in triplets])
        vals = np.concatenate([t[2] for t in triplets])
        return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()

    @property
    def is_linear(self) -> bool:
        return self._sten_k.size == 0

    def forcing(self, t: float) -> np.ndarray:
        c = self._static_c.copy()
        for eqs, fn in self._dynamic:
            c[eqs] += fn(t)
        return c

    def residual(self, y: np.ndarray, ydot: np.ndarray, t: float) -> np.ndarray:
        r = self.E @ ydot + self.F @ y + self.forcing(t)
        if self._sten_k.size:
            q = y[self._sten_cols]
            np.add.at(r, self._sten_rows, -self._sten_k * np.abs(q) * q)
        return r

    def tangent(self, y: np.ndarray, ydot_coefficient: float) -> sp.csc_matrix:
        K = ydot_coefficient * self.E + self.F
        if self._sten_k.size:
            q = y[self._sten_cols]
            K = K + sp.coo_matrix(
                (-2.0 * self._sten_k * np.abs(q), (self._sten_rows, self._sten_cols)),
                shape=(self.size, self.size),
            )
        return sp.csc_matrix(K)
