"""Physical constants and named collapse-model presets."""

from dataclasses import dataclass
from typing import Dict

from scipy import constants as _codata


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA constants shared by every formula; never user-editable."""

    hbar: float  # J·s
    k_B: float  # J/K
    amu: float  # kg, reference mass m_0 of the collapse rate
    c: float  # m/s


CONSTANTS = PhysicalConstants(
    hbar=_codata.hbar,
    k_B=_codata.k,
    amu=_codata.atomic_mass,
    c=_codata.c,
)

GAMMA_GRW = 1e-36  # m³/s
GAMMA_ADLER = 1e-28  # m³/s
NAMED_GAMMAS: Dict[str, float] = {"grw": GAMMA_GRW, "adler": GAMMA_ADLER}

R_C_DEFAULT = 1e-7  # m
DEFAULT_WAVELENGTH = 1064e-9  # m, Nd:YAG pump
DEFAULT_BODY_EDGE = 1e-6  # m, cube edge of the default collapse body


def resolve_gamma(value) -> float:
    """Accept a named preset (grw, adler) or a number in m³/s."""
    if isinstance(value, str):
        key = value.strip().lower()
        if key in NAMED_GAMMAS:
            return NAMED_GAMMAS[key]
        return float(value)
    return float(value)
