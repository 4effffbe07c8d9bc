"""
Run and sweep configuration
"""
import logging
import os
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from .exceptions import ConfigError
from .integrator import IntegratorParams
from .units import PressureUnit

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class RunConfig(BaseModel):
    """
    Settings of one simulation run. Unset fields fall back to the model file's
    simulation_parameters.
    """
    model_file: Optional[Path] = Field(None, description="Model file to simulate")
    output_dir: Path = Field(Path("results"), description="Directory for results CSV and manifest")
    n_cycles: Optional[int] = Field(None, ge=1, description="Number of cardiac cycles")
    steps_per_cycle: Optional[int] = Field(None, ge=1, description="Time steps per cycle")
    spectral_radius: Optional[float] = Field(None, ge=0.0, le=1.0)
    newton_abs_tol: Optional[float] = Field(None, gt=0.0)
    newton_rel_tol: Optional[float] = Field(None, ge=0.0)
    max_newton_iters: Optional[int] = Field(None, ge=1)
    store_all_cycles: bool = Field(True, description="Keep all cycles, otherwise only the last one")
    check_periodicity: Optional[float] = Field(None, gt=0.0, description="Periodicity tolerance")
    warm_start: bool = Field(False, description="Initialize from a steady mean-inflow run")
    progress: bool = Field(False, description="Show a progress bar")
    report_units: PressureUnit = Field("cgs", description="Pressure unit of reported summaries")

    def merged(self, other: "RunConfig") -> "RunConfig":
        """Copy where every field explicitly set on ``other`` wins"""
        return self.model_copy(update=other.model_dump(exclude_unset=True))

    def integrator_params(self, base: IntegratorParams) -> IntegratorParams:
        update = {
            name: getattr(self, name)
            for name in ("steps_per_cycle", "spectral_radius", "newton_abs_tol", "newton_rel_tol", "max_newton_iters")
            if getattr(self, name) is not None
        }
        return base.model_copy(update=update)


class SweepRange(BaseModel):
    start: float
    stop: float
    num: int = Field(..., ge=1)


class SweepSpec(BaseModel):
    """One model parameter varied over a list or range of values"""
    parameter: str = Field(..., description="'<element id>.<parameter>', e.g. 'BC1_outlet.R_distal'")
    values: Optional[List[float]] = None
    range: Optional[SweepRange] = None
    parallelism: int = Field(1, ge=1, description="Maximum number of concurrent simulations")

    @model_validator(mode="after")
    def _check_values(self) -> "SweepSpec":
        if (self.values is None) == (self.range is None):
            raise ValueError("give exactly one of 'values' or 'range'")
        if self.values is not None and not self.values:
            raise ValueError("'values' must not be empty")
        return self

    def resolved_values(self) -> List[float]:
        if self.values is not None:
            return list(self.values)
        return [float(v) for v in np.linspace(self.range.start, self.range.stop, self.range.num)]


def _load_mapping(path: PathLike) -> dict:
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"{path}: cannot read file ({e.strerror})")
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def load_run_config(path: PathLike) -> RunConfig:
    """Load a RunConfig from a YAML or JSON file"""
    try:
        return RunConfig.model_validate(_load_mapping(path))
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}")


def load_sweep_spec(path: PathLike) -> SweepSpec:
    """Load a SweepSpec from a YAML or JSON file"""
    try:
        return SweepSpec.model_validate(_load_mapping(path))
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}")


def max_workers(requested: int) -> int:
    """Requested parallelism capped by ZEROD_THREADS when it is set"""
    cap = os.getenv("ZEROD_THREADS")
    if not cap:
        return requested
    try:
        limit = int(cap)
    except ValueError:
        raise ConfigError(f"ZEROD_THREADS must be an integer, got '{cap}'")
    return max(1, min(requested, limit))
