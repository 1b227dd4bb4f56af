"""Force-noise budget, coupling limits and exclusion curves."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .background import nulled_budget
from .config import CONVENTIONS
from .constants import CONSTANTS, lambda_to_mass
from .errors import ValidationError
from .modulation import gtilde
from .spinmass import coupling_prefactor, zeta_sm, zeta_sm_bruteforce

C = CONSTANTS

# reference values quoted for the default design (lambda = 2 um, T1 = 1 s)
REFERENCE_TABLE = {
    "spin_background": (2.59e-41, 4.3e-22),
    "thermal": (5.14e-43, 9.1e-24),
    "backaction_imprecision": (9.36e-49, 1.2e-26),
    "total": (2.59e-41, 4.3e-22),
}
REFERENCE_DELTA_F_S = 5.03e-20


def susceptibility(omega, omega_z, gamma):
    """|chi| = 1/sqrt((omega_z^2 - omega^2)^2 + gamma^2 omega^2), s^2 (divide by m for m/N)."""
    w = np.asarray(omega, dtype=float)
    return 1.0 / np.sqrt((omega_z**2 - w**2) ** 2 + (gamma * w) ** 2)


def thermal_psd(m, gamma, T, convention="as-written"):
    """Thermal force PSD: 4 m gamma k_B T (as-written) or half of it (table-matched)."""
    if convention not in CONVENTIONS:
        raise ValidationError("convention", f"unknown convention {convention!r}")
    if m <= 0 or gamma <= 0 or T < 0:
        raise ValidationError("thermal_psd", "need m > 0, gamma > 0, T >= 0")
    k = 4.0 if convention == "as-written" else 2.0
    return k * m * gamma * C.k_B * T


def quantum_limited_psd(m, omega_z, gamma, eta):
    """Back-action plus imprecision at their optimum, 2 m gamma omega_z hbar / sqrt(eta)."""
    if not 0 < eta <= 1:
        raise ValidationError("efficiency", "must lie in (0, 1]")
    return 2 * m / float(susceptibility(omega_z, omega_z, gamma)) * C.hbar / math.sqrt(eta)


def g_limit(S_flu, S_s, gtilde_at_res, zeta, rho_m, rho_e0):
    """Minimum detectable g_s^N g_p^e from force noise and the signal spectrum."""
    return np.sqrt((S_flu + S_s) / gtilde_at_res) / (coupling_prefactor() * zeta * rho_m * rho_e0)


def limit_factor(zeta, rho_m, rho_e0):
    """8 pi m_e / (zeta hbar^2 rho_m rho_e0): coupling per newton of amplitude."""
    return 1.0 / (coupling_prefactor() * zeta * rho_m * rho_e0)


@dataclass
class NoiseBudget:
    S_ff_th: float
    S_ff_sum: float
    S_ff_s: float
    S_ff_flu: float
    gtilde_res: float
    delta_F_s: float
    F_s: float
    zeta_sm: float
    g_contributions: dict
    convention_tag: str
    lam: float
    T1: float
    S_ff_th_variants: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def g_total(self):
        return self.g_contributions["total"]

    def rows(self):
        """Rows in reference-table layout with computed/reference ratios."""
        out = []
        for key, S in (("spin_background", self.S_ff_s), ("thermal", self.S_ff_th),
                       ("backaction_imprecision", self.S_ff_sum), ("total", self.S_ff_flu + self.S_ff_s)):
            pS, pg = REFERENCE_TABLE[key]
            g = self.g_contributions[key]
            out.append({"source": key, "S_ff_N2_per_Hz": S, "g_contribution": g, "reference_value": pS,
                        "ratio": S / pS, "reference_g": pg, "g_ratio": g / pg, "convention": self.convention_tag})
        for tag, S in self.S_ff_th_variants.items():
            pS, pg = REFERENCE_TABLE["thermal"]
            g = math.sqrt(S / self.gtilde_res) * limit_factor(self.zeta_sm, *self._dens)
            out.append({"source": f"thermal[{tag}]", "S_ff_N2_per_Hz": S, "g_contribution": g,
                        "reference_value": pS, "ratio": S / pS, "reference_g": pg, "g_ratio": g / pg, "convention": tag})
        return out


def build_budget(config, lam=None, T1=None, convention=None, delta_F_s=None, F_s=None, m=None):
    """Assemble the force-noise budget and coupling limits at one (lambda, T1).

    The spin-background amplitude |F_s| + Delta F_s comes from re-nulling the
    configured geometry and propagating its tolerances unless given.
    """
    conv = config.convention if convention is None else convention
    lam = config.lam if lam is None else lam
    T1 = config.T1 if T1 is None else T1
    m = config.sphere.mass if m is None else m
    tr, env = config.trap, config.env
    if delta_F_s is None or F_s is None:
        bud, _, _ = nulled_budget(config, conv)
        delta_F_s = bud.total_delta_F if delta_F_s is None else delta_F_s
        F_s = bud.F_s if F_s is None else F_s
    variants = {c: thermal_psd(m, tr.gamma, env.temperature, c) for c in CONVENTIONS}
    S_th = variants[conv]
    S_sum = quantum_limited_psd(m, tr.omega_z, tr.gamma, env.efficiency)
    G = gtilde(tr.omega_z, T1, math.pi / tr.omega_z)
    amp = abs(F_s) + delta_F_s
    S_s = amp**2 * G
    z = zeta_sm(config.sphere.radius, config.source.d, lam)
    rho_m, rho_e = config.sphere.nucleon_density, config.source.effective_rho_e0
    fac = limit_factor(z, rho_m, rho_e)
    gc = {
        "thermal": math.sqrt(S_th / G) * fac,
        "backaction_imprecision": math.sqrt(S_sum / G) * fac,
        "spin_background": math.sqrt(S_s / G) * fac,
        "fluctuation": math.sqrt((S_th + S_sum) / G) * fac,
        "total": float(g_limit(S_th + S_sum, S_s, G, z, rho_m, rho_e)),
        "chain_reference_delta_F_s": REFERENCE_DELTA_F_S * fac,
    }
    nb = NoiseBudget(S_th, S_sum, S_s, S_th + S_sum, G, delta_F_s, F_s, z, gc, conv, lam, T1, variants)
    nb._dens = (rho_m, rho_e)
    nb.notes.append(
        f"Reference Delta F_s = {REFERENCE_DELTA_F_S:.3g} N through the same chain gives g = "
        f"{gc['chain_reference_delta_F_s']:.3g}, against the reference 4.3e-22; the factor "
        f"{gc['chain_reference_delta_F_s'] / 4.3e-22:.2f} is unexplained.")
    nb.notes.append(
        f"Reference S_ff^s = 2.59e-41 N^2/Hz is not (Delta F_s)^2 Gtilde = {S_s:.3g}; Gtilde cancels in the "
        "limit, so only force amplitudes matter.")
    return nb


def g_limit_vs_T1(config, T1_grid, lam=None, convention=None):
    """Fluctuation-limited, background-limited and total coupling limits vs T1.

    Returns
    -------
    dict with arrays ``T1``, ``fluctuation``, ``background``, ``total`` and the
    crossover T1 where the first two are equal (nan if none in range).
    """
    T1_grid = np.asarray(T1_grid, dtype=float)
    if np.any(T1_grid <= 0) or np.any(np.diff(T1_grid) <= 0):
        raise ValidationError("T1", "grid must be positive and ascending")
    base = build_budget(config, lam=lam, convention=convention)
    fac = limit_factor(base.zeta_sm, *base._dens)
    tau0 = math.pi / config.trap.omega_z
    G = np.atleast_1d(gtilde(config.trap.omega_z, T1_grid, tau0))
    amp = abs(base.F_s) + base.delta_F_s
    flu = np.sqrt(base.S_ff_flu / G) * fac
    bg = np.full_like(flu, amp * fac)
    tot = np.sqrt(base.S_ff_flu / G + amp**2) * fac

    def diff(lt):
        return math.log(math.sqrt(base.S_ff_flu / gtilde(config.trap.omega_z, math.exp(lt), tau0)) / amp)

    cross = float("nan")
    lo, hi = math.log(1e-7), math.log(1e3)
    if diff(lo) * diff(hi) < 0:
        cross = math.exp(optimize.brentq(diff, lo, hi, xtol=1e-12))
    return {"T1": T1_grid, "fluctuation": flu, "background": bg, "total": tot, "crossover_T1": cross,
            "convention": base.convention_tag}


def worst_case_g_limit(lam, budget, sigma_R, sigma_d, R, d, rho_m, rho_e0, n_grid=21):
    """Limit with the smallest spin-mass effective volume over the (R, d) box.

    ``budget`` is a NoiseBudget supplying the noise terms and the
    background amplitude. The minimum of zeta_sm is found on a grid and
    polished with a bounded optimizer.
    """
    z_plain = zeta_sm(R, d, lam)
    if sigma_R == 0 and sigma_d == 0:
        z_min = z_plain
    else:
        Rg = np.linspace(R - sigma_R, R + sigma_R, n_grid)
        dg = np.linspace(max(d - sigma_d, 1e-12), d + sigma_d, n_grid)
        vals = np.array([[zeta_sm(r, dd, lam) for dd in dg] for r in Rg])
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        res = optimize.minimize(lambda u: zeta_sm(u[0], u[1], lam), [Rg[i], dg[j]], method="L-BFGS-B",
                                bounds=[(Rg[0], Rg[-1]), (dg[0], dg[-1])])
        z_min = min(vals[i, j], float(res.fun), z_plain)
    amp = abs(budget.F_s) + budget.delta_F_s
    return float(math.sqrt(budget.S_ff_flu / budget.gtilde_res + amp**2) * limit_factor(z_min, rho_m, rho_e0))


@dataclass
class ExclusionCurve:
    lam: np.ndarray
    m_a: np.ndarray
    g_limit: np.ndarray
    worst_case: bool
    T1: float
    delta_F_s: float
    delta_F_s_provenance: str
    convention: str
    zeta_method: str = "closed"

    def rows(self):
        return [{"lambda_m": float(l), "m_a_eV": float(m), "g_limit": float(g), "worst_case_flag": int(self.worst_case)}
                for l, m, g in zip(self.lam, self.m_a, self.g_limit)]


def exclusion_curve(config, lambda_grid, T1=None, worst_case=False, convention=None, zeta_method="closed"):
    """Coupling limit over a grid of interaction ranges.

    ``zeta_method='bruteforce'`` replaces the half-space effective volume by
    quadrature over the finite spin source.
    """
    lam = np.sort(np.asarray(lambda_grid, dtype=float))
    if np.any(lam < 0.1e-6) or np.any(lam > 100e-6):
        raise ValidationError("lambda", "grid must lie within [0.1, 100] um")
    b = build_budget(config, T1=T1, convention=convention)
    R, d = config.sphere.radius, config.source.d
    rho_m, rho_e = config.sphere.nucleon_density, config.source.effective_rho_e0
    amp = abs(b.F_s) + b.delta_F_s
    S_over_G = b.S_ff_flu / b.gtilde_res + amp**2
    out = np.empty_like(lam)
    for i, l in enumerate(lam):
        if worst_case:
            sg = config.source.sigma
            out[i] = worst_case_g_limit(l, b, sg.get("R", 0.0), sg.get("d", 0.0), R, d, rho_m, rho_e)
        else:
            if zeta_method == "bruteforce":
                z = zeta_sm_bruteforce(R, config.source, l)[0]
            else:
                z = zeta_sm(R, d, l)
            out[i] = math.sqrt(S_over_G) * limit_factor(z, rho_m, rho_e)
    return ExclusionCurve(lam, lambda_to_mass(lam), out, worst_case, b.T1, b.delta_F_s,
                          "re-nulled geometry, propagated tolerances", b.convention_tag, zeta_method)


@dataclass
class PSDComponents:
    S_zz_imp: float = 0.0
    S_ff_ba: float = 0.0
    S_ff_th: float = 0.0


def total_displacement_psd(omega, m, omega_z, gamma, components, S_ff_s=0.0, S_ff_sm=0.0):
    """S_zz^imp + |chi|^2/m^2 (S_ba + S_th + S_s + S_sm), m^2/Hz.

    ``S_ff_s`` and ``S_ff_sm`` may be arrays matching ``omega``.
    """
    chi2 = susceptibility(omega, omega_z, gamma) ** 2 / m**2
    return components.S_zz_imp + chi2 * (components.S_ff_ba + components.S_ff_th + S_ff_s + S_ff_sm)


def optimum_components(m, omega_z, gamma, eta, S_th=0.0):
    """Split the quantum-limited sum equally between back-action and imprecision."""
    S_sum = quantum_limited_psd(m, omega_z, gamma, eta)
    chi2 = float(susceptibility(omega_z, omega_z, gamma)) ** 2 / m**2
    return PSDComponents(S_zz_imp=0.5 * S_sum * chi2, S_ff_ba=0.5 * S_sum, S_ff_th=S_th)
