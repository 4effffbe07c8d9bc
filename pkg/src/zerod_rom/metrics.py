"""
Relative cap error metrics between a reduced-order solution and a reference
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .exceptions import MismatchedCaps, OutOfRange, ZeroFlowAmplitude
from .parameters import ElementKind
from .results import ResultSet

logger = logging.getLogger(__name__)


@dataclass
class CapSeries:
    """Pressure and flow at one cap over one cycle on a uniform grid"""
    cap_id: str
    is_inlet: bool
    pressure: np.ndarray
    flow: np.ndarray
    kind: Optional[str] = None

    def __post_init__(self):
        self.pressure = np.asarray(self.pressure, dtype=float)
        self.flow = np.asarray(self.flow, dtype=float)
        if self.pressure.shape != self.flow.shape or self.pressure.ndim != 1:
            raise MismatchedCaps(f"Cap '{self.cap_id}': pressure and flow must be 1D arrays of equal length")
        if self.pressure.size < 2:
            raise MismatchedCaps(f"Cap '{self.cap_id}': at least 2 samples needed")

    @property
    def n_t(self) -> int:
        return self.pressure.size


@dataclass
class ErrorReport:
    """Averaged, maximum, systolic and diastolic relative errors (fractions)"""
    pressure_avg: float
    flow_avg: float
    pressure_max: float
    flow_max: float
    pressure_sys: float
    flow_sys: float
    pressure_dia: float
    flow_dia: float
    t_sys: int
    t_dia: int
    per_cap: Dict[str, Dict[str, float]] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return asdict(self)


def systole_diastole_indices(inlet_flow: Sequence[float]) -> Tuple[int, int]:
    """Indices of the maximum and minimum inlet flow, first occurrence on ties"""
    q = np.asarray(inlet_flow, dtype=float)
    if q.size == 0:
        raise ValueError("inlet flow series is empty")
    return int(np.argmax(q)), int(np.argmin(q))


def _match(reference: Sequence[CapSeries], test: Sequence[CapSeries]) -> List[Tuple[CapSeries, CapSeries]]:
    ref_ids = [c.cap_id for c in reference]
    test_by_id = {c.cap_id: c for c in test}
    if len(set(ref_ids)) != len(ref_ids) or set(ref_ids) != set(test_by_id) or len(test_by_id) != len(test):
        raise MismatchedCaps(f"Cap ids differ: reference {sorted(ref_ids)}, test {sorted(test_by_id)}")
    pairs = [(r, test_by_id[r.cap_id]) for r in reference]
    grids = {r.n_t for r, _ in pairs} | {t.n_t for _, t in pairs}
    if len(grids) != 1:
        raise MismatchedCaps(f"Series have different lengths {sorted(grids)}; resample first")
    inlets = [r.cap_id for r in reference if r.is_inlet]
    if len(inlets) != 1:
        raise MismatchedCaps(f"Exactly one inlet cap must be flagged, got {inlets}")
    return pairs


def cap_errors(reference: Sequence[CapSeries], test: Sequence[CapSeries]) -> ErrorReport:
    """
    Relative pressure and flow errors at the caps

    Pressure differences are normalized per cap by the sum over time of the
    reference pressure, flow differences by the reference flow amplitude. The
    inlet cap, where flow is prescribed, is left out of all flow errors.

    Args:
        reference: Reference cap series (exactly one flagged as inlet)
        test: Test cap series with the same cap ids and grid

    Returns:
        ErrorReport with the eight metrics and the systole/diastole indices
    """
    pairs = _match(reference, test)
    inlet = next(r for r, _ in pairs if r.is_inlet)
    t_sys, t_dia = systole_diastole_indices(inlet.flow)
    n_t = inlet.n_t

    per_cap: Dict[str, Dict[str, float]] = {}
    p_avg, p_max, p_sys, p_dia = [], [], [], []
    q_avg, q_max, q_sys, q_dia = [], [], [], []
    for ref, tst in pairs:
        dp = np.abs(tst.pressure - ref.pressure)
        p_scale = np.sum(ref.pressure)
        if p_scale == 0.0:
            raise MismatchedCaps(f"Reference pressure at cap '{ref.cap_id}' sums to zero")
        entry = {
            "pressure_avg": float(np.sum(dp) / p_scale),
            "pressure_max": float(np.max(dp) / p_scale),
            "pressure_sys": float(dp[t_sys] / p_scale),
            "pressure_dia": float(dp[t_dia] / p_scale),
        }
        p_avg.append(entry["pressure_avg"])
        p_max.append(entry["pressure_max"])
        p_sys.append(entry["pressure_sys"])
        p_dia.append(entry["pressure_dia"])

        if not ref.is_inlet:
            dq = np.abs(tst.flow - ref.flow)
            amplitude = np.max(ref.flow) - np.min(ref.flow)
            if amplitude == 0.0:
                raise ZeroFlowAmplitude(ref.cap_id)
            entry.update({
                "flow_avg": float(np.sum(dq) / amplitude),
                "flow_max": float(np.max(dq) / amplitude),
                "flow_sys": float(dq[t_sys] / amplitude),
                "flow_dia": float(dq[t_dia] / amplitude),
            })
            q_avg.append(entry["flow_avg"])
            q_max.append(entry["flow_max"])
            q_sys.append(entry["flow_sys"])
            q_dia.append(entry["flow_dia"])
        per_cap[ref.cap_id] = entry

    n_cap = len(pairs)
    n_flow = len(q_avg)

    def flow_mean(values: List[float], factor: float = 1.0) -> float:
        return factor * sum(values) / n_flow if n_flow else 0.0

    notes = []
    if n_flow == 0:
        notes.append("no outlet caps, flow errors are zero")
    if any(r.kind == ElementKind.CORONARY_RCRCR.value for r, _ in pairs):
        notes.append("coronary caps present: systole is taken from the inlet flow peak, coronary flow peaks in diastole")

    report = ErrorReport(
        pressure_avg=sum(p_avg) / n_cap,
        flow_avg=flow_mean(q_avg, 1.0 / n_t),
        pressure_max=n_t * sum(p_max) / n_cap,
        flow_max=flow_mean(q_max),
        pressure_sys=n_t * sum(p_sys) / n_cap,
        flow_sys=flow_mean(q_sys),
        pressure_dia=n_t * sum(p_dia) / n_cap,
        flow_dia=flow_mean(q_dia),
        t_sys=t_sys,
        t_dia=t_dia,
        per_cap=per_cap,
        notes=notes,
    )
    logger.info(
        f"Cap errors over {n_cap} caps: pressure avg {report.pressure_avg:.3%}, flow avg {report.flow_avg:.3%}"
    )
    return report


def branch_interpolate(
    positions: Sequence[float],
    values: Sequence[float],
    query: Sequence[float]
) -> np.ndarray:
    """
    Linear interpolation along the branch path length

    Args:
        positions: Path lengths of the known values, strictly increasing
        values: Pressure or flow at those positions
        query: Path lengths to evaluate, inside the branch extent

    Returns:
        Interpolated values at the query positions
    """
    s = np.asarray(positions, dtype=float)
    v = np.asarray(values, dtype=float)
    q = np.atleast_1d(np.asarray(query, dtype=float))
    if s.size < 2 or s.shape != v.shape or np.any(np.diff(s) <= 0.0):
        raise ValueError("positions must be strictly increasing and match the values")
    if np.any(q < s[0]) or np.any(q > s[-1]):
        raise OutOfRange(f"Query outside branch extent [{s[0]}, {s[-1]}]")
    return np.interp(q, s, v)


def resample_linear(series: CapSeries, n_t: int) -> CapSeries:
    """Linear resampling of a cycle onto n_t uniformly spaced samples, both ends kept"""
    old = np.linspace(0.0, 1.0, series.n_t)
    new = np.linspace(0.0, 1.0, n_t)
    return CapSeries(
        cap_id=series.cap_id,
        is_inlet=series.is_inlet,
        pressure=np.interp(new, old, series.pressure),
        flow=np.interp(new, old, series.flow),
        kind=series.kind,
    )


def cap_series_from_results(
    results: ResultSet,
    caps: Mapping[str, int],
    inlet_cap: str,
    kinds: Optional[Mapping[str, str]] = None
) -> List[CapSeries]:
    """
    Extract the last stored cycle at the cap wires

    Args:
        results: Simulation output
        caps: Cap name to wire id
        inlet_cap: Name of the inlet cap
        kinds: Optional cap name to boundary element kind

    Returns:
        One CapSeries per cap, in mapping order
    """
    s = results.cycle_slice(-1)
    kinds = kinds or {}
    return [
        CapSeries(
            cap_id=name,
            is_inlet=name == inlet_cap,
            pressure=results.pressure_of(wire_id)[s],
            flow=results.flow_of(wire_id)[s],
            kind=kinds.get(name),
        )
        for name, wire_id in caps.items()
    ]
