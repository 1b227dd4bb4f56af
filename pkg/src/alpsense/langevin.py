"""Time-domain integration of the driven, damped, thermally forced oscillator.

The integrator is BAOAB (half kick, half drift, exact Ornstein-Uhlenbeck
velocity update, half drift, half kick). The spring constant uses
omega_t = (2/dt) sin(omega_z dt / 2), which makes the discrete undamped
oscillation frequency exactly omega_z.
"""
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import signal

from .constants import CONSTANTS
from .errors import IntegrationError, ValidationError
from .noise import thermal_psd
from .spinmass import f_sm_amplitude

C = CONSTANTS


@dataclass(frozen=True)
class SimulationConfig:
    duration: float = 60.0
    dt: float | None = None  # default 2 pi / (50 omega_z)
    seed: int = 0
    thermal: bool = True
    spin_mass: bool = False
    spin_background: bool = False
    g_product: float = 0.0
    f_sm: float | None = None  # direct override of the spin-mass amplitude, N
    F_s: float = 0.0  # modulated background amplitude, N
    F_const: float = 0.0  # static force, N
    decimation: int = 1
    gamma_scale: float = 1.0  # 1e4 for the inflated-damping mode
    z0: float = 0.0
    v0: float = 0.0
    thermal_init: bool = True
    chunk: int = 8192

    def resolve_dt(self, omega_z):
        return 2 * math.pi / (50 * omega_z) if self.dt is None else self.dt

    def validate(self, omega_z):
        dt = self.resolve_dt(omega_z)
        period = 2 * math.pi / omega_z
        if not 0 < dt <= period / 50 * (1 + 1e-12):
            raise ValidationError("dt", f"must be <= 2 pi/(50 omega_z) = {period / 50:.4g} s")
        if self.duration < 100 * period * (1 - 1e-12):
            raise ValidationError("duration", f"must be >= 100 periods ({100 * period:.4g} s)")
        if self.decimation < 1:
            raise ValidationError("decimation", "must be >= 1")
        if self.gamma_scale <= 0:
            raise ValidationError("gamma_scale", "must be positive")


@dataclass
class Trajectory:
    t: np.ndarray
    z: np.ndarray
    v: np.ndarray
    config_hash: str
    seed: object
    meta: dict = field(default_factory=dict)

    @property
    def fs(self):
        return 1.0 / (self.t[1] - self.t[0])


def _drive(t, omega_z):
    # ideal flips: the spin density alternates sign every tau0
    return np.where(np.cos(omega_z * t) >= 0, 1.0, -1.0)


def simulation_params(sim, experiment):
    """Physical parameters used by :func:`simulate` (after inflation)."""
    tr = experiment.trap
    m = experiment.sphere.mass
    gamma = tr.gamma * sim.gamma_scale
    S_ff = thermal_psd(m, gamma, experiment.env.temperature, experiment.convention) if sim.thermal else 0.0
    f = 0.0
    if sim.spin_mass:
        f = sim.f_sm if sim.f_sm is not None else f_sm_amplitude(
            experiment.sphere, experiment.source, experiment.lam, sim.g_product)
    F_mod = f + (sim.F_s if sim.spin_background else 0.0)
    return {"m": m, "omega_z": tr.omega_z, "gamma": gamma, "S_ff": S_ff, "f_sm": f, "F_mod": F_mod,
            "F_const": sim.F_const, "dt": sim.resolve_dt(tr.omega_z), "temperature": experiment.env.temperature,
            "convention": experiment.convention}


def simulate_ensemble(sim, experiment, seeds):
    """Integrate one trajectory per seed, vectorized across seeds.

    Each seed owns its random stream, so a trajectory does not depend on
    which other seeds are run alongside it.

    Returns
    -------
    Trajectory
        ``z`` and ``v`` have shape (n_seeds, n_samples).
    """
    sim.validate(experiment.trap.omega_z)
    p = simulation_params(sim, experiment)
    m, w, gam, dt = p["m"], p["omega_z"], p["gamma"], p["dt"]
    seeds = list(seeds)
    n = len(seeds)
    N = int(math.floor(sim.duration / dt * (1 + 1e-12)))
    dec = sim.decimation
    n_out = N // dec
    wt2 = (2 / dt * math.sin(w * dt / 2)) ** 2
    c = math.exp(-gam * dt)
    var_v = p["S_ff"] / (4 * gam * m * m)  # stationary velocity variance
    sig = math.sqrt(max(0.0, 1 - c * c) * var_v)
    h = dt / 2
    gens = [np.random.default_rng(s) for s in seeds]
    z = np.full(n, float(sim.z0))
    v = np.full(n, float(sim.v0))
    if sim.thermal and sim.thermal_init:
        init = np.array([g.standard_normal(2) for g in gens])
        z = z + init[:, 0] * math.sqrt(var_v / wt2)
        v = v + init[:, 1] * math.sqrt(var_v)
    zs = np.empty((n, n_out))
    vs = np.empty((n, n_out))
    Fm, Fc = p["F_mod"], p["F_const"]
    # steady driven response (resonant square wave plus static offset)
    A = 4 / math.pi * abs(Fm) / (m * gam * w) + abs(Fc) / (m * wt2)
    e_lim = 1e6 * (max(var_v, 1e-300) + wt2 * A * A + sim.z0**2 * wt2 + sim.v0**2)
    k = 0
    while k < N:
        L = min(sim.chunk, N - k)
        t = (k + np.arange(L + 1)) * dt
        acc_F = (Fc + Fm * _drive(t, w)) / m if (Fm or Fc) else np.zeros(L + 1)
        xi = np.array([g.standard_normal(L) for g in gens]).T if sig > 0 else None
        a = -wt2 * z + acc_F[0]
        for i in range(L):
            j = k + i
            if j % dec == 0 and j // dec < n_out:
                zs[:, j // dec] = z
                vs[:, j // dec] = v
            v += h * a
            z += h * v
            v *= c
            if xi is not None:
                v += sig * xi[i]
            z += h * v
            a = -wt2 * z + acc_F[i + 1]
            v += h * a
        k += L
        energy = v * v + wt2 * z * z
        if not np.all(np.isfinite(energy)) or np.any(energy > e_lim):
            raise IntegrationError(f"trajectory energy exceeded 1e6 x equipartition at t = {k * dt:.4g} s")
    tt = np.arange(n_out) * dec * dt
    meta = dict(p, dt_out=dec * dt, duration=sim.duration, n_steps=N, omega_t=math.sqrt(wt2))
    return Trajectory(tt, zs, vs, experiment.config_hash, seeds, meta)


def simulate(sim, experiment):
    """Single trajectory for ``sim.seed``; arrays are 1-D."""
    tr = simulate_ensemble(sim, experiment, [sim.seed])
    return Trajectory(tr.t, tr.z[0], tr.v[0], tr.config_hash, sim.seed, tr.meta)


def estimate_psd(x, fs, nperseg):
    """Welch average of Hann-windowed segments, one-sided density per Hz.

    Parameters
    ----------
    x : ndarray or Trajectory
        Series (or trajectory, using z).
    fs : float
        Sample rate, Hz.
    nperseg : int
        Segment length; at least 8 half-overlapping segments are required.

    Returns
    -------
    f : ndarray, Hz
    S : ndarray, units^2/Hz
    """
    if isinstance(x, Trajectory):
        x = x.z
    x = np.asarray(x, dtype=float)
    nseg = (x.shape[-1] - nperseg) // (nperseg // 2) + 1 if x.shape[-1] >= nperseg else 0
    if nseg < 8:
        raise ValidationError("nperseg", f"series gives {nseg} segments, need >= 8")
    return signal.welch(x, fs=fs, window="hann", nperseg=nperseg, noverlap=nperseg // 2,
                        detrend="constant", scaling="density", return_onesided=True, axis=-1)


@dataclass
class SignalEstimate:
    amplitude: np.ndarray  # square-wave force amplitude, N
    error: float  # 1-sigma statistical error, N
    quadrature: np.ndarray  # orthogonal component (pure noise for a resonant drive)

    @property
    def snr(self):
        return np.abs(self.amplitude) / self.error


def demodulate(z, t, omega_z, dt):
    """Complex envelope 2<z e^{-i omega_z t}> averaged over whole periods."""
    n_w = int(round(2 * math.pi / omega_z / dt))
    if abs(n_w * dt * omega_z / (2 * math.pi) - 1) > 1e-6:
        warnings.warn("sample spacing is not commensurate with the trap period", RuntimeWarning, stacklevel=2)
    z = np.atleast_2d(z)
    n_win = z.shape[-1] // n_w
    y = z[:, : n_win * n_w] * 2 * np.exp(-1j * omega_z * t[: n_win * n_w])
    E = y.reshape(z.shape[0], n_win, n_w).mean(axis=-1)
    tc = t[: n_win * n_w].reshape(n_win, n_w).mean(axis=-1)
    return tc, E, n_w * dt


def recover_signal(traj, schedule=None):
    """Estimate the square-wave force amplitude driving the trajectory.

    The complex envelope of z at omega_z relaxes at rate gamma/2 toward
    -i (4/pi) f / (m gamma omega_z). Thermal noise makes the envelope an
    Ornstein-Uhlenbeck process, so differencing E_{j+1} - rho E_j with
    rho = exp(-gamma Delta/2) whitens it and removes the unknown initial
    state; the amplitude is then a least-squares fit to a constant.

    Returns
    -------
    SignalEstimate
    """
    mt = traj.meta
    m, w, gam = mt["m"], mt["omega_z"], mt["gamma"]
    if schedule is not None and abs(schedule.omega_z - w) > 1e-9 * w:
        raise ValidationError("schedule", "omega_z differs from the simulated trap")
    tc, E, Delta = demodulate(traj.z, traj.t, w, mt["dt_out"])
    rho = math.exp(-gam * Delta / 2)
    s_tilde = -1j * (4 / math.pi) * (1 - rho) / (m * gam * w)
    wd = E[:, 1:] - rho * E[:, :-1]
    proj = wd / s_tilde
    a = proj.real.mean(axis=-1)
    q = proj.imag.mean(axis=-1)
    var_env = mt["S_ff"] / (4 * gam * m * m * w * w)  # variance of each envelope quadrature
    nw = wd.shape[-1]
    err = math.sqrt(var_env * (1 - rho * rho) / nw) / abs(s_tilde) if var_env > 0 else 0.0
    if np.ndim(traj.z) == 1:
        a, q = a[0], q[0]
    return SignalEstimate(a, err, q)


def predicted_amplitude_error(S_ff, duration):
    """Noise floor (pi/4) sqrt(S_ff / T) of the square-wave amplitude, N."""
    return math.pi / 4 * math.sqrt(S_ff / duration)


@dataclass
class MonteCarloResult:
    amplitudes: np.ndarray
    mean: float
    std: float
    predicted_std: float
    histogram: tuple
    seeds: list
    injected: float


def monte_carlo(sim, experiment, n_seeds=100, base_seed=0, seeds=None, bins=20):
    """Recovered amplitudes over independent seeds.

    ``seeds`` overrides the default ``base_seed + arange(n_seeds)``.
    """
    seeds = list(range(base_seed, base_seed + n_seeds)) if seeds is None else list(seeds)
    if len(seeds) < 2:
        raise ValidationError("n_seeds", "need at least 2 seeds")
    tr = simulate_ensemble(sim, experiment, seeds)
    est = recover_signal(tr)
    a = np.asarray(est.amplitude)
    hist = np.histogram(a, bins=bins)
    return MonteCarloResult(a, float(a.mean()), float(a.std(ddof=1)),
                            predicted_amplitude_error(tr.meta["S_ff"], sim.duration), hist, seeds,
                            tr.meta["F_mod"])
