"""Physical constants (CODATA 2018 via scipy.constants) and mass/range conversion."""
from dataclasses import dataclass

import numpy as np
from scipy import constants as sc

from .errors import ValidationError


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = sc.hbar
    c: float = sc.c
    k_B: float = sc.k
    mu_0: float = sc.mu_0
    mu_B: float = sc.physical_constants["Bohr magneton"][0]
    m_e: float = sc.m_e
    # electron gyromagnetic ratio / 2pi, Hz/T
    gamma_e: float = sc.physical_constants["electron gyromag. ratio in MHz/T"][0] * 1e6
    nucleon_mass: float = sc.physical_constants["atomic mass constant"][0]
    g: float = sc.g
    eV: float = sc.eV

    def __post_init__(self):
        for name, val in self.__dict__.items():
            if not val > 0:
                raise ValidationError(name, "physical constants must be positive")

    @property
    def hbar_c_eVm(self):
        return self.hbar * self.c / self.eV


CONSTANTS = PhysicalConstants()


def lambda_to_mass(lam):
    """ALP mass in eV for interaction range ``lam`` (m)."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValidationError("lambda", "must be positive")
    out = CONSTANTS.hbar_c_eVm / lam
    return float(out) if out.ndim == 0 else out


def mass_to_lambda(m_a):
    """Interaction range in m for ALP mass ``m_a`` (eV)."""
    m_a = np.asarray(m_a, dtype=float)
    if np.any(m_a <= 0):
        raise ValidationError("m_a", "must be positive")
    out = CONSTANTS.hbar_c_eVm / m_a
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ALPCoupling:
    """Interaction range, ALP mass and coupling product g_s^N g_p^e."""

    lam: float
    m_a: float
    g_product: float = 0.0

    def __post_init__(self):
        if not (self.lam > 0 and self.m_a > 0):
            raise ValidationError("lambda", "range and mass must be positive")
        if abs(self.lam * self.m_a / CONSTANTS.hbar_c_eVm - 1) > 1e-3:
            raise ValidationError("m_a", "inconsistent with lambda")

    @classmethod
    def from_lambda(cls, lam, g_product=0.0):
        return cls(lam, lambda_to_mass(lam), g_product)

    @classmethod
    def from_mass(cls, m_a, g_product=0.0):
        return cls(mass_to_lambda(m_a), m_a, g_product)


def lambda_mass_convert(value, direction="lambda_to_mass"):
    """Convert between range (m) and mass (eV).

    Parameters
    ----------
    value : float
        lambda in m or m_a in eV.
    direction : {'lambda_to_mass', 'mass_to_lambda'}

    Returns
    -------
    ALPCoupling
    """
    if direction == "lambda_to_mass":
        return ALPCoupling.from_lambda(value)
    if direction == "mass_to_lambda":
        return ALPCoupling.from_mass(value)
    raise ValidationError("direction", f"unknown direction {direction!r}")
