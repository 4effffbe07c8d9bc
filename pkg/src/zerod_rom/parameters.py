"""
Parameter records of every lumped element kind. All values are CGS.
"""
from enum import Enum
from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field
from typing_extensions import Annotated

from .timeseries import TimeSeries


class ElementKind(str, Enum):
    """Enumeration of the lumped building blocks"""
    VESSEL = "Vessel"
    JUNCTION = "Junction"
    FLOW_BC = "FlowBC"
    PRESSURE_BC = "PressureBC"
    RESISTANCE_BC = "ResistanceBC"
    WINDKESSEL_RCR = "WindkesselRCR"
    CORONARY_RCRCR = "CoronaryRCRCR"


BOUNDARY_KINDS = frozenset({
    ElementKind.FLOW_BC,
    ElementKind.PRESSURE_BC,
    ElementKind.RESISTANCE_BC,
    ElementKind.WINDKESSEL_RCR,
    ElementKind.CORONARY_RCRCR,
})


class _Params(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class VesselParams(_Params):
    """Resistor (Poiseuille + stenosis), capacitor and inductor of one vessel segment"""
    kind: Literal[ElementKind.VESSEL] = ElementKind.VESSEL
    R_poiseuille: float = Field(0.0, ge=0.0, description="Viscous resistance [dyn s/cm^5]")
    C: float = Field(0.0, ge=0.0, description="Compliance [cm^5/dyn]")
    L: float = Field(0.0, ge=0.0, description="Inductance [dyn s^2/cm^5]")
    stenosis_coefficient: float = Field(0.0, ge=0.0, description="Expansion loss coefficient K_s [dyn s^2/cm^8]")


class JunctionParams(_Params):
    """Static pressure continuity and mass conservation; no parameters"""
    kind: Literal[ElementKind.JUNCTION] = ElementKind.JUNCTION


class FlowBCParams(_Params):
    kind: Literal[ElementKind.FLOW_BC] = ElementKind.FLOW_BC
    Q: TimeSeries = Field(..., description="Prescribed flow in the wire direction [cm^3/s]")


class PressureBCParams(_Params):
    kind: Literal[ElementKind.PRESSURE_BC] = ElementKind.PRESSURE_BC
    P: float = Field(..., description="Prescribed constant pressure [dyn/cm^2]")


class ResistanceBCParams(_Params):
    kind: Literal[ElementKind.RESISTANCE_BC] = ElementKind.RESISTANCE_BC
    R: float = Field(..., ge=0.0, description="Resistance [dyn s/cm^5]")
    P_distal: float = Field(0.0, description="Distal pressure [dyn/cm^2]")


class WindkesselParams(_Params):
    """Three-element Windkessel (RCR) outlet"""
    kind: Literal[ElementKind.WINDKESSEL_RCR] = ElementKind.WINDKESSEL_RCR
    R_proximal: float = Field(..., ge=0.0, description="Proximal resistance [dyn s/cm^5]")
    C: float = Field(..., gt=0.0, description="Compliance [cm^5/dyn]")
    R_distal: float = Field(..., ge=0.0, description="Distal resistance [dyn s/cm^5]")
    P_distal: float = Field(0.0, description="Distal pressure [dyn/cm^2]")


class CoronaryParams(_Params):
    """Open-loop coronary outlet driven by an intramyocardial pressure"""
    kind: Literal[ElementKind.CORONARY_RCRCR] = ElementKind.CORONARY_RCRCR
    R_a: float = Field(..., ge=0.0, description="Arterial resistance [dyn s/cm^5]")
    R_am: float = Field(..., ge=0.0, description="Micro-arterial resistance [dyn s/cm^5]")
    R_v: float = Field(..., ge=0.0, description="Venous resistance [dyn s/cm^5]")
    C_a: float = Field(..., gt=0.0, description="Arterial compliance [cm^5/dyn]")
    C_im: float = Field(..., gt=0.0, description="Intramyocardial compliance [cm^5/dyn]")
    P_v_distal: float = Field(0.0, description="Venous distal pressure [dyn/cm^2]")
    P_im: TimeSeries = Field(..., description="Intramyocardial pressure [dyn/cm^2]")
    ca_reference: Literal["ground", "intramyocardial"] = Field(
        "ground", description="Reference node of the arterial compliance"
    )


ElementParams = Annotated[
    Union[
        VesselParams,
        JunctionParams,
        FlowBCParams,
        PressureBCParams,
        ResistanceBCParams,
        WindkesselParams,
        CoronaryParams,
    ],
    Field(discriminator="kind"),
]
