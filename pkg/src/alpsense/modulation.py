"""Spin flipping schedule, polarization autocorrelation and its spectrum."""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .constants import CONSTANTS
from .errors import ConvergenceError, ValidationError


@dataclass(frozen=True)
class ModulationSchedule:
    omega_z: float
    tau0: float
    T1: float
    total_time: float
    mw_frequency: float = float("nan")
    pi_pulse_length: float = 0.0
    B1: float = float("nan")

    def __post_init__(self):
        if not (self.omega_z > 0 and self.T1 > 0 and self.total_time > 0):
            raise ValidationError("schedule", "omega_z, T1 and total_time must be positive")
        if abs(self.tau0 * self.omega_z / math.pi - 1) > 1e-12:
            raise ValidationError("tau0", "must equal pi/omega_z")
        if self.pi_pulse_length > self.tau0 / 100:
            warnings.warn(f"pi pulse ({self.pi_pulse_length:.3g} s) is not short compared with tau0 "
                          f"({self.tau0:.3g} s)", RuntimeWarning, stacklevel=2)

    @classmethod
    def from_omega(cls, omega_z, T1=1.0, total_time=1.0):
        return cls(omega_z, math.pi / omega_z, T1, total_time)

    @property
    def n_pulses(self):
        return int(math.floor(self.total_time / self.tau0 * (1 + 1e-15)))

    @property
    def pulse_times(self):
        return self.tau0 * np.arange(1, self.n_pulses + 1)

    @property
    def amplitude(self):
        """Peak of xi(t), 2 / (1 + exp(-tau0/T1))."""
        return 2.0 / (1.0 + math.exp(-self.tau0 / self.T1))

    def with_T1(self, T1):
        return ModulationSchedule(self.omega_z, self.tau0, T1, self.total_time,
                                  self.mw_frequency, self.pi_pulse_length, self.B1)


def pulse_schedule(omega_z, total_time, B_ext, B1, T1=1.0):
    """Pi-pulse timing for flipping at twice the trap frequency.

    Returns
    -------
    ModulationSchedule
        tau0 = pi/omega_z, microwave frequency gamma_e*B_ext and pi-pulse
        length 1/(2 gamma_e B1).
    """
    for name, v in (("omega_z", omega_z), ("total_time", total_time), ("B_ext", B_ext), ("B1", B1)):
        if not v > 0:
            raise ValidationError(name, "must be positive")
    ge = CONSTANTS.gamma_e
    return ModulationSchedule(omega_z, math.pi / omega_z, T1, total_time,
                              ge * B_ext, 1.0 / (2 * ge * B1), B1)


def polarization_fraction(B, T):
    """Thermal two-level polarization tanh(mu_B B / k_B T)."""
    if np.any(np.asarray(T) <= 0):
        raise ValidationError("temperature", "must be positive")
    return np.tanh(CONSTANTS.mu_B * np.asarray(B) / (CONSTANTS.k_B * np.asarray(T)))


@dataclass(frozen=True)
class SpinState:
    p_up: float = 1.0
    p_down: float = 0.0

    def __post_init__(self):
        if abs(self.p_up + self.p_down - 1) > 1e-12 or min(self.p_up, self.p_down) < -1e-15:
            raise ValidationError("p_up", "populations must be non-negative and sum to 1")

    @property
    def P(self):
        return self.p_up - self.p_down

    def relax(self, tau, T1):
        # down -> up with probability p1 over tau
        p1 = 1.0 - math.exp(-tau / T1)
        return SpinState(self.p_up + self.p_down * p1, self.p_down * (1 - p1))

    def flip(self):
        return SpinState(self.p_down, self.p_up)


def _phase_in_period(t, tau0):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t", "must be >= 0")
    tau = np.mod(t, tau0)
    # at a pulse instant report the value just before the flip
    return np.where((tau == 0) & (t > 0), tau0, tau)


def autocorrelation_P(t, schedule):
    """Steady-state polarization sawtooth 1 - 2 exp(-tau/T1) / (1 + exp(-tau0/T1))."""
    tau0, T1 = schedule.tau0, schedule.T1
    tau = _phase_in_period(t, tau0)
    return 1.0 - 2.0 * np.exp(-tau / T1) / (1.0 + math.exp(-tau0 / T1))


def modulation_xi(t, schedule):
    """Square wave A*sign(cos(omega_z t)), A = 2/(1+exp(-tau0/T1))."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t", "must be >= 0")
    return schedule.amplitude * np.where(np.cos(schedule.omega_z * t) >= 0, 1.0, -1.0)


def gtilde(omega, T1, tau0):
    """Single-sided spectrum of the flipped, relaxing polarization.

    Closed form of 4 * int_0^inf exp(-t/T1) xi(t) cos(omega t) dt.
    Only negative exponents are evaluated so large tau0/T1 is safe.

    Parameters
    ----------
    omega : float or ndarray
        Angular frequency, rad/s.
    T1 : float or ndarray
        Relaxation time, s; broadcasts against ``omega``.
    tau0 : float
        Flip interval, s.

    Returns
    -------
    float or ndarray, s
    """
    w = np.asarray(omega, dtype=float)
    T1 = np.asarray(T1, dtype=float)
    if np.any(w < 0) or np.any(T1 <= 0) or not tau0 > 0:
        raise ValidationError("gtilde", "need omega >= 0, T1 > 0, tau0 > 0")
    E = np.exp(-tau0 / T1)
    Eh = np.exp(-tau0 / (2 * T1))
    lor = 1.0 + (T1 * w) ** 2
    den = 1.0 + E * E + 2.0 * E * np.cos(w * tau0)
    num = T1 * (1 + E) * np.cos(w * tau0 / 2) - w * T1**2 * (1 - E) * np.sin(w * tau0 / 2)
    out = 4.0 / (1 + E) * (2 * T1 / lor - 4 * Eh * num / (lor * den))
    return float(out) if out.ndim == 0 else out


def gtilde_printed(omega, T1, tau0):
    """Variant with omega*(1-E)*sin in the second numerator (no T1^2 factor).

    Kept for comparison only; it agrees with :func:`gtilde` just at T1 = 1 s.
    """
    w = np.asarray(omega, dtype=float)
    E = math.exp(-tau0 / T1)
    Eh = math.exp(-tau0 / (2 * T1))
    lor = 1.0 + (T1 * w) ** 2
    den = 1.0 + E * E + 2.0 * E * np.cos(w * tau0)
    num = T1 * (1 + E) * np.cos(w * tau0 / 2) - w * (1 - E) * np.sin(w * tau0 / 2)
    out = 4.0 / (1 + E) * (2 * T1 / lor - 4 * Eh * num / (lor * den))
    return float(out) if out.ndim == 0 else out


def _gtilde_numeric_scalar(w, T1, tau0, rtol, t_max_factor, max_nodes):
    A = 2.0 / (1.0 + math.exp(-tau0 / T1))
    t_end = t_max_factor * T1
    # sign-constant intervals of xi: [0, tau0/2), then length tau0 alternating
    edges = np.concatenate(([0.0], np.arange(tau0 / 2, t_end, tau0), [t_end]))
    edges = np.unique(edges)
    a, b = edges[:-1], edges[1:]
    sign = np.where(np.arange(a.size) % 2 == 0, 1.0, -1.0)
    # enough nodes per interval to resolve oscillations inside it
    n = int(min(max_nodes, max(16, 8 * math.ceil(w * tau0 / math.pi) + 8)))
    prev = None
    while True:
        x, wt = roots_legendre(n)
        half = 0.5 * (b - a)
        tt = 0.5 * (a + b)[:, None] + half[:, None] * x[None, :]
        f = np.exp(-tt / T1) * np.cos(w * tt)
        per = half * (f @ wt)
        val = 4 * A * np.sum(sign * per)
        scale = 4 * A * np.sum(half * (np.abs(f) @ wt))
        if prev is not None:
            err = abs(val - prev)
            if err <= rtol * max(abs(val), 1e-6 * scale) or err <= 1e-300:
                return val
            if 2 * n > max_nodes:
                raise ConvergenceError("gtilde_numeric did not converge", err / max(abs(val), 1e-300))
        prev = val
        n *= 2


def gtilde_numeric(omega, T1, tau0, rtol=1e-8, t_max_factor=20.0, max_nodes=4096):
    """Quadrature oracle for :func:`gtilde`.

    Integrates 4 exp(-t/T1) xi(t) cos(omega t) with Gauss-Legendre rules on
    each sign-constant interval of xi, doubling the node count until two
    successive estimates agree to ``rtol``. Truncated at ``t_max_factor*T1``.
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.array([_gtilde_numeric_scalar(x, T1, tau0, rtol, t_max_factor, max_nodes) for x in w])
    return float(out[0]) if np.ndim(omega) == 0 else out
