"""
Unit conversion at the file boundaries. Everything inside the solver is CGS:
cm, g, s, pressure in dyn/cm^2, flow in cm^3/s.
"""
from typing import Literal

PressureUnit = Literal["cgs", "mmHg", "kPa"]

MMHG_TO_DYN_PER_CM2 = 1333.22
KPA_TO_DYN_PER_CM2 = 1.0e4

_FACTORS = {
    "cgs": 1.0,
    "mmHg": MMHG_TO_DYN_PER_CM2,
    "kPa": KPA_TO_DYN_PER_CM2,
}


def pressure_factor(unit: str) -> float:
    """Multiplier converting a pressure in ``unit`` to dyn/cm^2"""
    try:
        return _FACTORS[unit]
    except KeyError:
        raise ValueError(f"Unknown pressure unit '{unit}', expected one of {sorted(_FACTORS)}")


def to_cgs_pressure(value: float, unit: str) -> float:
    return value * pressure_factor(unit)


def from_cgs_pressure(value: float, unit: str) -> float:
    return value / pressure_factor(unit)
