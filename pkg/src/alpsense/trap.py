"""One-dimensional magneto-gravitational trap with Casimir attraction.

z is the displacement of the sphere center from its nominal position, so
the surface gap is d + z. The field along the axis is a quadratic
B(z) = B0 + s z + c z^2 / 2; B0 and c are calibrated so that the nominal
position is an equilibrium with the configured omega_z.
"""
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize
from scipy.special import roots_legendre

from .constants import CONSTANTS
from .errors import DomainError, NoEquilibriumError, ValidationError

C = CONSTANTS
_XW = roots_legendre(8)  # exact for the quartic B^2 over sphere slices


def casimir_coefficient(R, eta_c):
    """K in V_cas = -K / gap^2, J m^2 (proximity-force sphere-plate)."""
    return C.hbar * C.c * math.pi**2 / 1440 * 2 * math.pi * R * eta_c


def casimir_potential(gap, R, eta_c):
    """Casimir energy -(hbar c pi^2 / 1440 gap^2) 2 pi R eta_c, J."""
    gap = np.asarray(gap, dtype=float)
    if np.any(gap <= 0):
        raise DomainError("casimir_potential: gap must be > 0")
    out = -casimir_coefficient(R, eta_c) / gap**2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TrapModel:
    m: float
    R: float
    chi: float
    d: float
    B0: float
    slope: float
    curvature: float
    K_cas: float
    g: float = C.g
    window: tuple = (None, 500e-6)
    spin_field: object = None  # callable y -> (B_s, dB_s/dy), y = height above groove floor

    @property
    def volume(self):
        return 4 / 3 * math.pi * self.R**3

    @property
    def z_window(self):
        lo = -0.999 * self.d if self.window[0] is None else self.window[0]
        return lo, self.window[1]

    def with_(self, **kw):
        return replace(self, **kw)

    # field pieces ------------------------------------------------------
    def _slices(self, z):
        x, w = _XW
        y = np.asarray(z, dtype=float)[..., None] + self.R * x
        wt = self.R * w * math.pi * (self.R**2 - (self.R * x) ** 2)
        return y, wt

    def _B(self, y):
        B = self.B0 + self.slope * y + 0.5 * self.curvature * y * y
        dB = self.slope + self.curvature * y
        if self.spin_field is not None:
            Bs, dBs = self.spin_field(self.d + self.R + y)
            B, dB = B + Bs, dB + dBs
        return B, dB

    def check(self, z):
        lo, hi = self.z_window
        z = np.asarray(z, dtype=float)
        if np.any(z < lo) or np.any(z > hi):
            raise DomainError(f"z outside trap window [{lo:.3g}, {hi:.3g}] m")

    def energy(self, z):
        self.check(z)
        y, wt = self._slices(z)
        B, _ = self._B(y)
        E = self.m * self.g * np.asarray(z) + self.chi / (2 * C.mu_0) * np.sum(wt * B * B, axis=-1)
        if self.K_cas:
            E = E - self.K_cas / (self.d + np.asarray(z)) ** 2
        return E

    def energy_difference(self, z, z_ref):
        """E(z) - E(z_ref) without cancellation against the large field energy."""
        self.check(z)
        self.check(z_ref)
        z = np.asarray(z, dtype=float)
        dz = (z - z_ref)[..., None]
        y0, wt = self._slices(z_ref)
        y0 = np.broadcast_to(y0, np.broadcast_shapes(y0.shape, dz.shape))
        B0, _ = self._B(y0)
        # B(y0+dz) - B(y0) written out so no large numbers are subtracted
        dB = dz * (self.slope + self.curvature * (y0 + 0.5 * dz))
        if self.spin_field is not None:
            base = self.d + self.R + y0
            dB = dB + self.spin_field(base + dz)[0] - self.spin_field(base)[0]
        dE = self.m * self.g * (z - z_ref) + self.chi / (2 * C.mu_0) * np.sum(wt * dB * (2 * B0 + dB), axis=-1)
        if self.K_cas:
            g, g0 = self.d + z, self.d + z_ref
            dE = dE + self.K_cas * (g - g0) * (g + g0) / (g * g * g0 * g0)
        return dE

    def force_gradient(self, z):
        """dE/dz, N."""
        self.check(z)
        y, wt = self._slices(z)
        B, dB = self._B(y)
        out = self.m * self.g + self.chi / C.mu_0 * np.sum(wt * B * dB, axis=-1)
        if self.K_cas:
            out = out + 2 * self.K_cas / (self.d + np.asarray(z)) ** 3
        return out


def calibrate_trap(config, omega_z=None, include_casimir=True, spin_field=None):
    """Solve for B0 and the field curvature giving equilibrium at z = 0 with omega_z.

    Returns
    -------
    TrapModel
        ``model.B0 - config.trap.B_pm`` is the external field needed for the
        configured gap.
    """
    sp, tr = config.sphere, config.trap
    w = tr.omega_z if omega_z is None else omega_z
    K = casimir_coefficient(sp.radius, tr.eta_c) if include_casimir else 0.0
    base = TrapModel(sp.mass, sp.radius, sp.susceptibility, config.source.d, tr.B0, tr.dB0z_dz, 0.0, K,
                     spin_field=spin_field)
    target = sp.mass * w * w

    def eqs(u):
        B0, c = u
        mdl = base.with_(B0=B0, curvature=c)
        return [mdl.force_gradient(0.0) / (sp.mass * C.g), (_curv(mdl, 0.0) - target) / target]

    # linear first guess ignoring the small finite-size terms
    V = sp.volume
    B0g = -(sp.mass * C.g + 2 * K / config.source.d**3) * C.mu_0 / (sp.susceptibility * V * tr.dB0z_dz)
    cg = ((target + 6 * K / config.source.d**4) * C.mu_0 / (sp.susceptibility * V) - tr.dB0z_dz**2) / B0g
    sol = optimize.fsolve(eqs, [B0g, cg], xtol=1e-14, full_output=True)
    B0, c = sol[0]
    return base.with_(B0=float(B0), curvature=float(c))


def _curv(model, z):
    """Analytic d^2E/dz^2 (used for calibration)."""
    y, wt = model._slices(z)
    B, dB = model._B(y)
    ddB = model.curvature
    out = model.chi / C.mu_0 * np.sum(wt * (dB * dB + B * ddB), axis=-1)
    if model.K_cas:
        out = out - 6 * model.K_cas / (model.d + z) ** 4
    return float(out)


def _as_model(obj):
    return obj if isinstance(obj, TrapModel) else calibrate_trap(obj)


def trap_potential(z, config):
    """Trap energy E_p(z), J. ``config`` is a TrapModel or an ExperimentConfig."""
    return _as_model(config).energy(z)


def _roots(model, kind, n=4000):
    lo, hi = model.z_window
    gap_lo, gap_hi = model.d + lo, model.d + hi
    z = np.geomspace(gap_lo, gap_hi, n) - model.d
    z[0], z[-1] = lo, hi
    f = model.force_gradient(z)
    out = []
    for i in range(n - 1):
        a, b = f[i], f[i + 1]
        if kind == "min" and a < 0 <= b or kind == "max" and a > 0 >= b:
            out.append(optimize.brentq(model.force_gradient, z[i], z[i + 1], xtol=1e-22, rtol=1e-15, maxiter=500))
    return out


def find_equilibrium(config):
    """Stable root of dE/dz closest to the nominal position, m."""
    model = _as_model(config)
    roots = _roots(model, "min")
    if not roots:
        raise NoEquilibriumError("no equilibrium in window")
    z = min(roots, key=abs)
    if abs(model.force_gradient(z)) >= 1e-20:
        # polish with Newton on the analytic gradient
        z = optimize.newton(model.force_gradient, z, fprime=lambda u: _curv(model, u), tol=1e-22)
    return float(z)


@dataclass
class TrapProfile:
    z: np.ndarray
    E_p: np.ndarray
    z_eq: float
    omega_z: float
    depth: float
    B_ext: float = float("nan")
    barrier_low: float = float("nan")
    barrier_high: float = float("nan")


def resonance_and_depth(config, n_grid=801, step=1e-9, B_pm=None):
    """Equilibrium, omega_z from a Richardson second difference, and depth.

    Depth is the smaller of the barriers toward the surface (Casimir) and
    upward (or the window edge).
    """
    model = _as_model(config)
    if B_pm is None:
        B_pm = getattr(getattr(config, "trap", None), "B_pm", float("nan"))
    z0 = find_equilibrium(model)

    def D2(h):
        return (model.energy_difference(z0 + h, z0) + model.energy_difference(z0 - h, z0)) / h**2

    k = (4 * D2(step / 2) - D2(step)) / 3
    if not k > 0:
        raise NoEquilibriumError("equilibrium is not a minimum")
    w = math.sqrt(k / model.m)
    lo, hi = model.z_window
    maxima = _roots(model, "max")
    below = [r for r in maxima if r < z0]
    above = [r for r in maxima if r > z0]
    zl = max(below) if below else lo
    zh = min(above) if above else hi
    dl = float(model.energy_difference(zl, z0))
    dh = float(model.energy_difference(zh, z0))
    z = np.linspace(max(lo, zl - 0.1 * (z0 - zl)), min(hi, z0 + 2 * (z0 - zl) + 1e-6), n_grid)
    E = model.energy_difference(z, z0)
    return TrapProfile(z, E, z0, w, max(0.0, min(dl, dh)), model.B0 - B_pm, zl, zh)
