"""Monopole-dipole interaction: potential, sphere form factor, effective volume, force."""
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .constants import CONSTANTS
from .errors import ConvergenceError, DomainError, ValidationError
from .modulation import gtilde

C = CONSTANTS


def coupling_prefactor():
    """hbar^2 / (8 pi m_e), J m^2."""
    return C.hbar**2 / (8 * math.pi * C.m_e)


def potential_V(cos_angle, r, lam, g_product):
    """Spin-nucleon potential, J.

    ``cos_angle`` is the cosine between the spin and the separation vector.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("potential_V: r must be > 0")
    if not lam > 0:
        raise ValidationError("lambda", "must be positive")
    if np.any(np.abs(cos_angle) > 1):
        raise ValidationError("cos_angle", "|cos| must be <= 1")
    return coupling_prefactor() * g_product * np.asarray(cos_angle) * (1 / (lam * r) + 1 / r**2) * np.exp(-r / lam)


def _shell_factor(R, lam):
    """2 lam^2 [(R-lam) e^{x} + (R+lam) e^{-x}] e^{-x} with x = R/lam.

    Equals 4 lam^3 (x cosh x - sinh x) e^{-x}, evaluated without
    cancellation for small x and without overflow for large x.
    """
    x = R / lam
    if x < 1e-2:
        s = x**3 / 3 + x**5 / 30 + x**7 / 840 + x**9 / 45360
        return 4 * lam**3 * s * math.exp(-x)
    return 2 * lam**2 * ((R - lam) + (R + lam) * math.exp(-2 * x))


def sphere_form_factor(R, ell, lam):
    """Field factor g(R, ell) of a uniform sphere at distance ell from its center.

    Equals -d/d(ell) of the sphere-integrated Yukawa kernel, m^3-scaled
    (multiply by the number density and the coupling prefactor for a force).

    Raises
    ------
    DomainError
        If ``ell <= R``.
    """
    ell = np.asarray(ell, dtype=float)
    if np.any(ell <= R):
        raise DomainError("sphere_form_factor: ell must exceed R")
    out = math.pi * _shell_factor(R, lam) * (1 / (lam * ell) + 1 / ell**2) * np.exp(-(ell - R) / lam)
    return float(out) if out.ndim == 0 else out


def sphere_form_factor_numeric(R, ell, lam, rtol=1e-10):
    """Direct volume quadrature of the radial Yukawa field over a sphere (oracle)."""
    if ell <= R:
        raise DomainError("sphere_form_factor_numeric: ell must exceed R")

    def f(c, r):
        s = math.sqrt(ell * ell + r * r - 2 * ell * r * c)
        # field kernel along ell-hat: (1/(lam s) + 1/s^2) e^{-s/lam} * (ell - r c)/s
        return 2 * math.pi * r * r * (1 / (lam * s) + 1 / s**2) * math.exp(-s / lam) * (ell - r * c) / s

    val, _ = integrate.dblquad(f, 0, R, -1, 1, epsabs=0, epsrel=rtol)
    return val


def _stable_bracket(R, d, lam):
    """(R-lam) e^{-d/lam} + (R+lam) e^{-(2R+d)/lam}, accurate for all R/lam."""
    x = R / lam
    if x < 1e-2:
        s = x**3 / 3 + x**5 / 30 + x**7 / 840 + x**9 / 45360
        return 2 * lam * s * math.exp(-(R + d) / lam)
    return (R - lam) * math.exp(-d / lam) + (R + lam) * math.exp(-(2 * R + d) / lam)


def zeta_sm(R, d, lam):
    """Spin-mass effective volume (2 pi lam)^2 [(R-lam)e^{-d/lam} + (R+lam)e^{-(2R+d)/lam}], m^3.

    Accepts arrays for ``lam``. Never negative: the bracket equals
    2 lam (x cosh x - sinh x) e^{-(R+d)/lam} >= 0 with x = R/lam.
    """
    if not (R > 0 and d > 0):
        raise ValidationError("zeta_sm", "R and d must be positive")
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0):
        raise ValidationError("lambda", "must be positive")
    out = np.array([(2 * math.pi * l) ** 2 * _stable_bracket(R, d, l) for l in lam_arr.ravel()]).reshape(lam_arr.shape)
    return float(out) if out.ndim == 0 else out


def _source_kernel(rho, u, R, lam):
    """d^2/du^2 of the sphere potential Phi(ell) at ell = sqrt(rho^2+u^2), per unit volume."""
    ell = np.hypot(rho, u)
    sf = math.pi * _shell_factor(R, lam)  # 4 pi lam^2 (R cosh x - lam sinh x) e^{-x}
    e = np.exp(-(ell - R) / lam)
    d1 = -sf * e * (1 / (lam * ell) + 1 / ell**2)
    d2 = sf * e * (1 / (lam**2 * ell) + 2 / (lam * ell**2) + 2 / ell**3)
    c2 = (u / ell) ** 2
    return d2 * c2 + d1 * (1 - c2) / ell


def _integrate_block(R, lam, rho0, rho1, u0, u1, epsrel):
    """Integral of the kernel * 2 pi rho over rho in [rho0,rho1], u in [u0,u1] (u > R)."""
    if rho1 <= rho0 or u1 <= u0:
        return 0.0, 0.0
    scale = lam
    rho_breaks = [b for b in (rho0 + scale * k for k in (1, 4, 16, 64)) if rho0 < b < rho1]
    u_breaks = [b for b in (u0 + scale * k for k in (1, 4, 16, 64)) if u0 < b < u1]
    r_edges = [rho0, *rho_breaks, rho1]
    u_edges = [u0, *u_breaks, u1]
    total = err = 0.0
    for ra, rb in zip(r_edges[:-1], r_edges[1:]):
        for ua, ub in zip(u_edges[:-1], u_edges[1:]):
            v, e = integrate.dblquad(lambda r, u: 2 * math.pi * r * _source_kernel(r, u, R, lam),
                                     ua, ub, ra, rb, epsabs=0, epsrel=epsrel)
            total += v
            err += e
    return total, err


def zeta_sm_bruteforce(sphere_R, source, lam, epsrel=1e-10, rel_target=5e-3):
    """Effective volume by quadrature over the actual spin-source material.

    The sphere is replaced by its exact exterior potential (center-mass
    equivalence); the source integral runs over the groove floor
    (radius R_s1, thickness L1-L2) and the ring wall (R_s2..R_s1, height L2).
    The sphere center sits d+R above the groove floor.

    Returns
    -------
    value, error_estimate : float
    """
    R = getattr(sphere_R, "radius", sphere_R)
    h = source.d + R
    floor_t = source.L1 - source.L2
    v1, e1 = _integrate_block(R, lam, 0.0, source.R_s1, h, h + floor_t, epsrel)
    # ring wall: u from h - L2 (wall top) to h (floor top); u may be negative
    v2, e2 = _integrate_wall(R, lam, source.R_s2, source.R_s1, h - source.L2, h, epsrel)
    val, err = v1 + v2, e1 + e2
    if not np.isfinite(val) or err > rel_target * abs(val):
        raise ConvergenceError("zeta_sm_bruteforce did not reach tolerance", err / max(abs(val), 1e-300))
    return val, err


def _integrate_wall(R, lam, r_in, r_out, u0, u1, epsrel):
    if r_out <= r_in or u1 <= u0 or r_in <= R:
        if r_out > r_in and u1 > u0 and r_in <= R:
            raise DomainError("ring wall intersects the sphere")
        return 0.0, 0.0
    # kernel is smooth away from the axis; split u at zero where it peaks
    edges = sorted({u0, u1, *(x for x in (0.0,) if u0 < x < u1)})
    rb = [b for b in (r_in + lam * k for k in (1, 4, 16, 64)) if r_in < b < r_out]
    r_edges = [r_in, *rb, r_out]
    total = err = 0.0
    for ua, ub in zip(edges[:-1], edges[1:]):
        for ra, rc in zip(r_edges[:-1], r_edges[1:]):
            v, e = integrate.dblquad(lambda r, u: 2 * math.pi * r * _source_kernel(r, u, R, lam),
                                     ua, ub, ra, rc, epsabs=0, epsrel=epsrel)
            total += v
            err += e
    return total, err


def zeta_sm_montecarlo(R, source, lam, n=2_000_000, seed=0, batch=200_000):
    """Six-dimensional Monte Carlo of the pair force over sphere x groove floor.

    Sphere points are uniform; source points are drawn with exponential
    depth and gamma(2) lateral profiles on the scale lam. Returns
    (estimate, standard_error). The ring wall is ignored (its weight is
    ~exp(-R_s2/lam)).
    """
    rng = np.random.default_rng(seed)
    h = source.d + R
    t = source.L1 - source.L2
    V = 4 / 3 * math.pi * R**3
    Rs = source.R_s1
    norm_u = 1 - math.exp(-t / lam)
    norm_r = 1 - math.exp(-Rs / lam) * (1 + Rs / lam)
    acc = []
    left = n
    while left > 0:
        k = min(batch, left)
        left -= k
        # sphere point
        p = rng.normal(size=(k, 3))
        p *= (R * rng.random(k) ** (1 / 3) / np.linalg.norm(p, axis=1))[:, None]
        # source depth below the floor top, truncated exponential
        w = -lam * np.log(1 - rng.random(k) * norm_u)
        # lateral radius, truncated gamma(2, lam) by rejection-free inversion on a grid
        r = _sample_gamma2(rng, k, lam, Rs)
        phi = 2 * math.pi * rng.random(k)
        q_u = np.exp(-w / lam) / (lam * norm_u)
        q_r = r * np.exp(-r / lam) / (lam**2 * norm_r)
        q = q_u * q_r / (2 * math.pi * r)  # density per unit volume
        dx = p[:, 0] - r * np.cos(phi)
        dy = p[:, 1] - r * np.sin(phi)
        dz = (h + p[:, 2]) + w
        rr = np.sqrt(dx * dx + dy * dy + dz * dz)
        c2 = (dz / rr) ** 2
        # -(dV/dx_z)/k for a spin along z at the source point, summed per pair
        kern = np.exp(-rr / lam) * (1 / (lam * rr**2) + 1 / rr**3
                                    - c2 * (1 / (lam**2 * rr) + 3 / (lam * rr**2) + 3 / rr**3))
        acc.append(-kern * V / q)
    vals = np.concatenate(acc)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))


def _sample_gamma2(rng, k, lam, rmax):
    # inverse CDF of r e^{-r/lam} on [0, rmax], tabulated
    x = np.linspace(0, rmax / lam, 20001)
    cdf = 1 - np.exp(-x) * (1 + x)
    cdf /= cdf[-1]
    return lam * np.interp(rng.random(k), cdf, x)


def f_sm_amplitude(sphere, source, lam, g_product, zeta=None):
    """Peak spin-mass force at full polarization, N."""
    z = zeta_sm(sphere.radius, source.d, lam) if zeta is None else zeta
    return source.effective_rho_e0 * coupling_prefactor() * g_product * sphere.nucleon_density * z


def s_ff_sm(omega, sphere, source, lam, g_product, schedule):
    """Spin-mass force PSD f_sm^2 * Gtilde(omega), N^2/Hz."""
    f = f_sm_amplitude(sphere, source, lam, g_product)
    return f**2 * gtilde(omega, schedule.T1, schedule.tau0)


def coupling_from_psd(S_sm, gtilde_value, zeta, rho_m, rho_e0):
    """Invert S = (rho_e0 rho_m hbar^2 g zeta / 8 pi m_e)^2 Gtilde for g."""
    return math.sqrt(S_sm / gtilde_value) / (coupling_prefactor() * zeta * rho_m * rho_e0)


@dataclass(frozen=True)
class SpinMassResult:
    zeta_sm: float
    F_sm_per_g: float
    F_sm_amplitude: float
    S_ff_sm_at_resonance: float


def spin_mass_result(sphere, source, lam, g_product, schedule):
    z = zeta_sm(sphere.radius, source.d, lam)
    per_g = f_sm_amplitude(sphere, source, lam, 1.0, zeta=z)
    F = per_g * g_product
    return SpinMassResult(z, per_g, F, F**2 * gtilde(schedule.omega_z, schedule.T1, schedule.tau0))
