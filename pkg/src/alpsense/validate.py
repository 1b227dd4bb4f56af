"""Oracle-equivalence suites: closed forms against brute-force numerics."""
import math
from dataclasses import dataclass

import numpy as np

from .background import (cylinder_axis_field, cylinder_axis_field_numeric, zeta_s_direct, zeta_s_params)
from .config import default_config
from .constants import CONSTANTS
from .modulation import gtilde, gtilde_numeric
from .spinmass import sphere_form_factor, sphere_form_factor_numeric, zeta_sm, zeta_sm_bruteforce


@dataclass
class CheckResult:
    suite: str
    name: str
    value: float
    tolerance: float
    passed: bool

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.suite}: {self.name}  err={self.value:.3g} (tol {self.tolerance:.3g})"


def gtilde_suite(omega_z=148.9, T1s=(1e-3, 0.1, 1.0, 10.0), n=50, tol=5e-3):
    """Closed form vs quadrature on n frequencies in [0.1, 10] omega_z for each T1."""
    tau0 = math.pi / omega_z
    w = np.linspace(0.1 * omega_z, 10 * omega_z, n)
    out = []
    for T1 in T1s:
        a = gtilde(w, T1, tau0)
        b = gtilde_numeric(w, T1, tau0)
        # relative error, with an absolute floor for points sitting on a zero crossing
        floor = 1e-6 * np.max(np.abs(b))
        err = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))
        out.append(CheckResult("gtilde", f"T1={T1:g} s ({n} points)", err, tol, err <= tol))
    return out


def zeta_sm_suite(config=None, lams=(0.5e-6, 2e-6, 10e-6), tol=1e-2):
    cfg = config or default_config()
    R, d = cfg.sphere.radius, cfg.source.d
    out = []
    for lam in lams:
        bf, _ = zeta_sm_bruteforce(R, cfg.source, lam)
        cf = zeta_sm(R, d, lam)
        err = abs(bf - cf) / cf
        out.append(CheckResult("zeta_sm", f"lambda={lam * 1e6:g} um", err, tol, err <= tol))
    return out


def random_geometries(n=5, seed=0):
    """Two-cylinder geometries around the default design (L in um, R_s in um)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        L1 = rng.uniform(40, 80)
        L2 = rng.uniform(15, L1 - 10)
        R1 = rng.uniform(200, 600)
        R2 = rng.uniform(0.5, 0.98) * R1
        out.append({"L1": L1 * 1e-6, "L2": L2 * 1e-6, "R_s1": R1 * 1e-6, "R_s2": R2 * 1e-6})
    return out


def zeta_s_suite(config=None, n=5, seed=0, tol=5e-3):
    cfg = config or default_config()
    R, ratio = cfg.sphere.radius, cfg.trap.field_ratio
    out = []
    for i, p in enumerate(random_geometries(n, seed)):
        p = dict(p, d=cfg.source.d)
        a = zeta_s_params(p, R, ratio)
        b = zeta_s_direct(p, R, ratio)
        err = abs(a - b) / abs(b)
        out.append(CheckResult("zeta_s", f"geometry {i}", err, tol, err <= tol))
    return out


def cylinder_suite(tol=1e-3):
    M = 2.3e27 * CONSTANTS.mu_B
    a = cylinder_axis_field(5e-6, 460e-6, 59.7e-6, M)
    b = cylinder_axis_field_numeric(5e-6, 460e-6, 59.7e-6, M)
    err = max(abs(a[0] - b[0]) / abs(b[0]), abs(a[1] - b[1]) / abs(b[1]))
    return [CheckResult("cylinder", "on-axis field and gradient", err, tol, err <= tol)]


def form_factor_suite(tol=1e-3):
    a = sphere_form_factor(3.2e-6, 6e-6, 2e-6)
    b = sphere_form_factor_numeric(3.2e-6, 6e-6, 2e-6)
    err = abs(a - b) / b
    return [CheckResult("form_factor", "(R, ell, lambda) = (3.2, 6, 2) um", err, tol, err <= tol)]


SUITES = {
    "gtilde": gtilde_suite,
    "zeta_sm": zeta_sm_suite,
    "zeta_s": zeta_s_suite,
    "cylinder": cylinder_suite,
    "form_factor": form_factor_suite,
}


def run_all(names=None, config=None):
    results = []
    for name in names or SUITES:
        fn = SUITES[name]
        results.extend(fn(config) if name in ("zeta_sm", "zeta_s") else fn())
    return results
