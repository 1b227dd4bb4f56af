"""Spin-induced magnetic force on the diamagnetic sphere.

Geometry: a cylinder (R_s1, L1) with a coaxial cylinder (R_s2, L2) removed
from its top face, leaving a groove whose floor is L1 - L2 thick. Heights
are measured from the groove floor; the sphere center sits at d + R.
Spins point along +z with magnetization rho_e mu_B.
"""
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, optimize
from scipy.special import roots_legendre

from .constants import CONSTANTS
from .errors import DomainError, ValidationError

C = CONSTANTS
GEOM_KEYS = ("L1", "L2", "R_s1", "R_s2")
BUDGET_KEYS = ("L1", "L2", "R_s1", "R_s2", "d", "R")


def dipole_bz(theta, l):
    """z field of one Bohr-magneton spin along z at polar angle theta, distance l."""
    l = np.asarray(l, dtype=float)
    if np.any(l <= 0):
        raise DomainError("dipole_bz: l must be > 0")
    return C.mu_0 * C.mu_B / (4 * math.pi) * (3 * np.cos(theta) ** 2 - 1) / l**3


def _seg(a, b, Rs):
    """On-axis field bracket of a cylinder spanning relative heights [a, b].

    a, b are (source - point) offsets. Returns (bracket, d bracket / d point_z).
    Multiply by mu0 M / 2 for tesla.
    """
    if Rs <= 0 or b <= a:
        z = np.zeros_like(np.asarray(a, dtype=float) + 0.0)
        return z, z
    sb = np.sqrt(Rs * Rs + b * b)
    sa = np.sqrt(Rs * Rs + a * a)
    B = b / sb - a / sa
    G = -(Rs * Rs / sb**3 - Rs * Rs / sa**3)
    return B, G


def cylinder_axis_field(z_above_top, R_s, L, magnetization_density):
    """On-axis B_z and dB_z/dz of a uniformly magnetized cylinder.

    Parameters
    ----------
    z_above_top : float
        Height of the field point above the top face, m.
    R_s, L : float
        Radius and length, m.
    magnetization_density : float
        Magnetization M, A/m.

    Returns
    -------
    (B_z, dBz_dz) in T and T/m.
    """
    z = np.asarray(z_above_top, dtype=float)
    if np.any(z <= 0):
        raise DomainError("cylinder_axis_field: point must be above the top face")
    k = C.mu_0 * magnetization_density / 2
    B, G = _seg(-L - z, -z, R_s)
    return k * B, k * G


def cylinder_axis_field_numeric(z_above_top, R_s, L, magnetization_density, epsrel=1e-10):
    """Dipole-by-dipole volume integration of the on-axis field (oracle)."""
    n = magnetization_density / C.mu_B  # spins per m^3

    def bz(rho, s):
        l = math.hypot(rho, s)
        return 2 * math.pi * rho * n * float(dipole_bz(math.acos(s / l), l))

    def gz(rho, s):
        l2 = rho * rho + s * s
        return 2 * math.pi * rho * n * C.mu_0 * C.mu_B / (4 * math.pi) * -(9 * s / l2**2.5 - 15 * s**3 / l2**3.5)

    a, b = -L - z_above_top, -z_above_top
    B = _dblquad_split(bz, a, b, R_s, epsrel)
    G = _dblquad_split(gz, a, b, R_s, epsrel)
    return B, G


def _dblquad_split(f, a, b, rmax, epsrel, rmin=0.0):
    # split rho near the point, where the kernel varies fastest
    scale = max(min(abs(a), abs(b)), 1e-9) if a * b > 0 else 1e-6
    edges = [rmin] + [x for x in (rmin + scale * k for k in (1, 4, 16, 64)) if rmin < x < rmax] + [rmax]
    tot = 0.0
    for r0, r1 in zip(edges[:-1], edges[1:]):
        tot += integrate.dblquad(lambda r, s: f(r, s), a, b, r0, r1, epsabs=0, epsrel=epsrel)[0]
    return tot


def _check_geometry(p, R, yc):
    L1, L2, R1, R2 = p["L1"], p["L2"], p["R_s1"], p["R_s2"]
    if not (L1 > L2 >= 0 and R1 > R2 >= 0 and R > 0):
        raise ValidationError("geometry", "need L1 > L2 >= 0, R_s1 > R_s2 >= 0, R > 0")
    if yc - R <= 0:
        raise DomainError("sphere touches the groove floor")
    if L2 > 0 and yc - R < L2 and R2 <= R:
        raise DomainError("sphere does not fit inside the groove")


def _material_fields(y, p):
    """Field bracket and gradient on axis at heights y (relative to groove floor)."""
    L1, L2, R1, R2 = p["L1"], p["L2"], p["R_s1"], p["R_s2"]
    t = L1 - L2
    B1, G1 = _seg(-t - y, L2 - y, R1)
    B2, G2 = _seg(-y, L2 - y, R2)
    return B1 - B2, G1 - G2


def zeta_s_params(p, R, field_ratio, center_height=None, epsrel=1e-10):
    """Signed spin-magnetic effective volume for a parameter mapping.

    ``p`` holds L1, L2, R_s1, R_s2 and d. ``center_height`` overrides the
    sphere-center height above the groove floor (default d + R).
    """
    yc = p["d"] + R if center_height is None else center_height
    _check_geometry(p, R, yc)

    def f(w):
        B, G = _material_fields(yc + w, p)
        return math.pi * (R * R - w * w) * (field_ratio * G + B)

    with warnings.catch_warnings():
        # near a null the result is far below the integrand scale
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, -R, R, epsabs=1e-34, epsrel=epsrel, limit=200)
    return val


def zeta_s_direct(p, R, field_ratio, center_height=None, n_slices=24, epsrel=1e-9):
    """Same quantity by dipole-volume integration over floor and wall (oracle)."""
    yc = p["d"] + R if center_height is None else center_height
    _check_geometry(p, R, yc)
    L1, L2, R1, R2 = p["L1"], p["L2"], p["R_s1"], p["R_s2"]
    t = L1 - L2
    M = C.mu_B  # unit spin density
    k = C.mu_0 * M / 2
    x, wt = roots_legendre(n_slices)
    tot = 0.0
    for xi, wi in zip(x, wt):
        y = yc + R * xi
        # floor: heights [-t, 0] over full radius R1
        Bf, Gf = cylinder_axis_field_numeric(y, R1, t, M, epsrel)
        B, G = Bf, Gf
        if L2 > 0:
            Bw, Gw = _ring_numeric(y, R2, R1, L2, M, epsrel)
            B, G = B + Bw, G + Gw
        tot += wi * R * math.pi * (R * R - (R * xi) ** 2) * (field_ratio * G + B) / k
    return tot


def _ring_numeric(y, r_in, r_out, L2, M, epsrel):
    n = M / C.mu_B
    pref = n * C.mu_0 * C.mu_B / (4 * math.pi)

    def bz(rho, s):
        l2 = rho * rho + s * s
        return 2 * math.pi * rho * pref * (3 * s * s / l2 - 1) / l2**1.5

    def gz(rho, s):
        l2 = rho * rho + s * s
        return 2 * math.pi * rho * pref * -(9 * s / l2**2.5 - 15 * s**3 / l2**3.5)

    a, b = -y, L2 - y
    edges = [a] + ([0.0] if a < 0 < b else []) + [b]
    B = G = 0.0
    for s0, s1 in zip(edges[:-1], edges[1:]):
        B += integrate.dblquad(bz, s0, s1, r_in, r_out, epsabs=0, epsrel=epsrel)[0]
        G += integrate.dblquad(gz, s0, s1, r_in, r_out, epsabs=0, epsrel=epsrel)[0]
    return B, G


def _params(geometry, **over):
    p = {"L1": geometry.L1, "L2": geometry.L2, "R_s1": geometry.R_s1, "R_s2": geometry.R_s2, "d": geometry.d}
    p.update(over)
    return p


def zeta_s(geometry, R, trap, center_height=None):
    """Signed effective volume of the spin-induced magnetic force, m^3.

    Parameters
    ----------
    geometry : SpinSourceGeometry
    R : float
        Sphere radius, m.
    trap : TrapConfig or float
        Supplies B0z/(dB0z/dz) at the sphere; a bare float is taken as that ratio.
    """
    ratio = trap if np.isscalar(trap) else trap.field_ratio
    return zeta_s_params(_params(geometry), R, ratio, center_height)


def f_s_amplitude(zeta, rho_e0, chi_m, dB0z_dz, convention="as-written"):
    """Spin-magnetic force amplitude, N.

    ``as-written`` uses rho_e0 mu_B chi_m/2 * dB0z/dz * zeta; ``table-matched``
    halves it.
    """
    if convention not in ("as-written", "table-matched"):
        raise ValidationError("convention", f"unknown convention {convention!r}")
    k = 0.5 if convention == "as-written" else 0.25
    return rho_e0 * C.mu_B * chi_m * k * dB0z_dz * np.asarray(zeta)


@dataclass
class OptimizationReport:
    initial: dict
    optimized: dict
    achieved: float
    iterations: int
    converged: bool
    target: float
    restarts: list = field(default_factory=list)


class _Done(Exception):
    pass


def optimize_geometry(initial, bounds=None, target=1e-23, R=3.2e-6, trap=None, restarts=5,
                      max_evals=500, seed=0, spread=1e-6):
    """Null |zeta_s| by Nelder-Mead over (L1, L2, R_s1, R_s2) with d and R fixed.

    Restart 0 starts at ``initial``; the others start at uniform offsets of
    up to ``spread`` inside ``bounds``. Stops at the first restart reaching
    ``target``; otherwise returns the best point with ``converged=False``.

    Parameters
    ----------
    initial : SpinSourceGeometry
    bounds : dict, optional
        name -> (lo, hi) in m. Defaults to +/-10 um around the start.
    trap : TrapConfig or float
        Field ratio source, see :func:`zeta_s`.
    """
    ratio = 2.0 / 750 if trap is None else (trap if np.isscalar(trap) else trap.field_ratio)
    x0 = np.array([getattr(initial, k) for k in GEOM_KEYS])
    if bounds is None:
        bounds = {k: (max(v - 10e-6, 0.0), v + 10e-6) for k, v in zip(GEOM_KEYS, x0)}
    lo = np.array([bounds[k][0] for k in GEOM_KEYS])
    hi = np.array([bounds[k][1] for k in GEOM_KEYS])
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise ValidationError("bounds", "initial point outside bounds")
    unit = 1e-6
    d = initial.d

    def zs(x):
        p = dict(zip(GEOM_KEYS, x))
        p["d"] = d
        try:
            return zeta_s_params(p, R, ratio)
        except (DomainError, ValidationError):
            return np.inf

    rng = np.random.default_rng(seed)
    starts = [x0] + [np.clip(x0 + rng.uniform(-spread, spread, 4), lo, hi) for _ in range(restarts - 1)]
    best_x, best_v, total = x0, abs(zs(x0)), 1
    log = []
    if best_v <= target:
        return OptimizationReport(initial.params(), initial.params(), best_v, 1, True, target, log)
    for i, s in enumerate(starts):
        state = {"x": s, "v": abs(zs(s)), "n": 1}

        def obj(u):
            x = u * unit
            v = abs(zs(x))
            state["n"] += 1
            if v < state["v"]:
                state["x"], state["v"] = x, v
            if v <= target:
                raise _Done
            return v / target

        try:
            optimize.minimize(obj, s / unit, method="Nelder-Mead",
                              bounds=list(zip(lo / unit, hi / unit)),
                              options={"maxfev": max_evals, "xatol": 1e-9, "fatol": 0.0,
                                       "initial_simplex": _simplex(s / unit, lo / unit, hi / unit)})
        except _Done:
            pass
        total += state["n"]
        log.append({"restart": i, "achieved": state["v"], "evaluations": state["n"]})
        if state["v"] < best_v:
            best_x, best_v = state["x"], state["v"]
        if best_v <= target:
            break
    return OptimizationReport(initial.params(), dict(zip(GEOM_KEYS, map(float, best_x))),
                              float(best_v), total, bool(best_v <= target), target, log)


def _simplex(x, lo, hi, step=0.5):
    pts = [x.copy()]
    for i in range(x.size):
        y = x.copy()
        y[i] = y[i] + step if y[i] + step <= hi[i] else y[i] - step
        pts.append(np.clip(y, lo, hi))
    return np.array(pts)


@dataclass
class BackgroundBudget:
    zeta_s: float
    F_s: float
    rows: dict  # param -> dict(size, sigma, delta_zeta_s, delta_F_s)
    total_delta_zeta: float
    total_delta_F: float
    convention: str
    F_per_zeta: float

    def table(self):
        out = []
        for k, r in self.rows.items():
            out.append({"param": k, "size": r["size"], "sigma": r["sigma"], "zeta_s": self.zeta_s,
                        "delta_zeta_s": r["delta_zeta_s"], "F_s": self.F_s, "delta_F_s": r["delta_F_s"]})
        out.append({"param": "total", "size": float("nan"), "sigma": float("nan"), "zeta_s": self.zeta_s,
                    "delta_zeta_s": self.total_delta_zeta, "F_s": self.F_s, "delta_F_s": self.total_delta_F})
        return out


def _zeta_of(name, value, geometry, R, ratio):
    """zeta_s with one parameter changed. Changing R keeps the sphere center fixed."""
    p = _params(geometry)
    yc = geometry.d + R
    if name == "R":
        return zeta_s_params(p, value, ratio, center_height=yc)
    p[name] = value
    return zeta_s_params(p, R, ratio)


def derivative(name, geometry, R, ratio, sigma):
    """d zeta_s / d param by Richardson-refined central differences."""
    p0 = R if name == "R" else getattr(geometry, name)
    h = max(sigma, 1e-4 * p0)

    def D(h):
        return (_zeta_of(name, p0 + h, geometry, R, ratio) - _zeta_of(name, p0 - h, geometry, R, ratio)) / (2 * h)

    return (4 * D(h / 2) - D(h)) / 3


def propagate_uncertainty(geometry, R, trap, chi_m=-9.1e-6, rho_e0=None, convention="as-written", sigma=None):
    """Table of |d zeta_s/dp| * sigma_p for the six geometry parameters.

    A change of the sphere radius keeps its center height fixed (levitation
    fixes the center; the gap absorbs the change).
    """
    ratio = trap.field_ratio
    sig = dict(geometry.sigma if sigma is None else sigma)
    rho = geometry.effective_rho_e0 if rho_e0 is None else rho_e0
    for k, v in sig.items():
        if v < 0:
            raise ValidationError("sigma_" + k, "must be >= 0")
    z0 = zeta_s(geometry, R, ratio)
    per = float(f_s_amplitude(1.0, rho, chi_m, trap.dB0z_dz, convention))
    rows = {}
    for k in BUDGET_KEYS:
        s = sig.get(k, 0.0)
        dz = 0.0 if s == 0 else abs(derivative(k, geometry, R, ratio, s)) * s
        rows[k] = {"size": R if k == "R" else getattr(geometry, k), "sigma": s,
                   "delta_zeta_s": dz, "delta_F_s": abs(per) * dz}
    tot = math.sqrt(sum(r["delta_zeta_s"] ** 2 for r in rows.values()))
    return BackgroundBudget(z0, per * z0, rows, tot, abs(per) * tot, convention, per)


def sensitivity_sweep(param, deltas, geometry, R, trap, chi_m=-9.1e-6, rho_e0=None, convention="as-written"):
    """Delta F_s as a function of the parameter standard deviation.

    For each deviation D the half-range central difference
    |F_s(p+D) - F_s(p-D)| / 2 is returned; it is even in D, zero at D = 0 and
    equals the budget row when D is the budget sigma (to first order).
    """
    if param not in BUDGET_KEYS:
        raise ValidationError("param", f"must be one of {BUDGET_KEYS}")
    ratio = trap.field_ratio
    rho = geometry.effective_rho_e0 if rho_e0 is None else rho_e0
    per = abs(float(f_s_amplitude(1.0, rho, chi_m, trap.dB0z_dz, convention)))
    p0 = R if param == "R" else getattr(geometry, param)
    deltas = np.asarray(deltas, dtype=float)
    out = np.empty_like(deltas)
    for i, D in enumerate(deltas):
        if D == 0:
            out[i] = 0.0
            continue
        zp = _zeta_of(param, p0 + abs(D), geometry, R, ratio)
        zm = _zeta_of(param, p0 - abs(D), geometry, R, ratio)
        out[i] = per * abs(zp - zm) / 2
    return out


_NULL_CACHE = {}


def nulled_budget(config, convention=None, target=1e-23, seed=0):
    """Re-null the configured geometry, then propagate its tolerances.

    Returns (BackgroundBudget, OptimizationReport, nulled SpinSourceGeometry).
    Results are cached per config hash.
    """
    conv = config.convention if convention is None else convention
    key = (config.config_hash, conv, target, seed)
    if key not in _NULL_CACHE:
        rep = optimize_geometry(config.source, target=target, R=config.sphere.radius, trap=config.trap, seed=seed)
        geo = config.source.with_params(**rep.optimized)
        bud = propagate_uncertainty(geo, config.sphere.radius, config.trap, config.sphere.susceptibility,
                                    convention=conv)
        _NULL_CACHE[key] = (bud, rep, geo)
    return _NULL_CACHE[key]
