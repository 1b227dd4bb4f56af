import math

import numpy as np
import pytest

from alpsense.errors import ValidationError
from alpsense.noise import (REFERENCE_TABLE, PSDComponents, build_budget, exclusion_curve, g_limit, g_limit_vs_T1,
                            limit_factor, optimum_components, quantum_limited_psd, susceptibility, thermal_psd,
                            total_displacement_psd, worst_case_g_limit)
from alpsense.spinmass import zeta_sm

M, G, W = 1.5e-13, 2 * math.pi * 1e-6, 148.9


def test_thermal_psd():
    assert thermal_psd(M, G, 0.02) == pytest.approx(1.04098482134066e-42, rel=1e-10)
    assert thermal_psd(M, G, 0.02, "table-matched") == pytest.approx(5.14e-43, rel=0.02)
    assert thermal_psd(M, G, 0.0) == 0.0
    with pytest.raises(ValidationError):
        thermal_psd(M, G, 0.02, "nope")
    with pytest.raises(ValidationError):
        thermal_psd(M, 0.0, 0.02)


def test_quantum_limited_psd():
    assert quantum_limited_psd(M, W, G, 1e-3) == pytest.approx(9.35991665587592e-49, rel=1e-9)
    assert quantum_limited_psd(M, W, G, 1.0) == pytest.approx(9.35991665587592e-49 * math.sqrt(1e-3))
    with pytest.raises(ValidationError):
        quantum_limited_psd(M, W, G, 0.0)


def test_susceptibility_peak():
    w = np.linspace(0.9 * W, 1.1 * W, 20001)
    chi = susceptibility(w, W, G)
    assert w[np.argmax(chi)] == pytest.approx(W, rel=1e-6)
    assert susceptibility(W, W, G) == pytest.approx(1 / (G * W))
    assert susceptibility(0.0, W, G) == pytest.approx(1 / W**2)


def test_limit_factor():
    z = zeta_sm(3.2e-6, 1.46e-6, 2e-6)
    assert limit_factor(z, 6.62435482903411e29, 2.3e27) == pytest.approx(0.0125746786606022, rel=1e-6)


def test_g_limit_scaling():
    a = g_limit(1e-42, 0.0, 2.5, 1e-16, 6.6e29, 2.3e27)
    assert g_limit(4e-42, 0.0, 2.5, 1e-16, 6.6e29, 2.3e27) == pytest.approx(2 * a)
    assert g_limit(1e-42, 0.0, 2.5, 2e-16, 6.6e29, 2.3e27) == pytest.approx(a / 2)


@pytest.fixture(scope="module")
def budget(cfg):
    return build_budget(cfg)


def test_budget_shape(budget):
    rows = budget.rows()
    assert [r["source"] for r in rows][:4] == list(REFERENCE_TABLE)
    assert budget.S_ff_flu == pytest.approx(budget.S_ff_th + budget.S_ff_sum)
    # background-limited at T1 = 1 s
    assert budget.g_contributions["spin_background"] > 10 * budget.g_contributions["fluctuation"]
    gc = budget.g_contributions
    assert gc["total"] == pytest.approx(math.hypot(gc["fluctuation"], gc["spin_background"]), rel=1e-12)
    assert len(budget.notes) == 2


def test_budget_injected_background(cfg):
    b = build_budget(cfg, delta_F_s=0.0, F_s=0.0)
    assert b.g_total == pytest.approx(b.g_contributions["fluctuation"])
    b2 = build_budget(cfg, delta_F_s=5.03e-20, F_s=0.0)
    assert b2.g_contributions["spin_background"] == pytest.approx(b2.g_contributions["chain_reference_delta_F_s"])


def test_table_matched_halves_background(cfg):
    a = build_budget(cfg, convention="as-written")
    b = build_budget(cfg, convention="table-matched")
    amp_a, amp_b = abs(a.F_s) + a.delta_F_s, abs(b.F_s) + b.delta_F_s
    assert amp_b == pytest.approx(amp_a / 2, rel=1e-3)
    assert b.S_ff_th == pytest.approx(a.S_ff_th / 2)


def test_t1_dependence(cfg):
    T1 = np.geomspace(1e-6, 10, 60)
    r = g_limit_vs_T1(cfg, T1)
    assert np.all(np.diff(r["fluctuation"]) < 0)
    assert np.ptp(r["background"]) == 0
    assert np.all(r["total"] >= r["background"])
    assert np.all(r["total"] >= r["fluctuation"])
    c = r["crossover_T1"]
    assert 1e-6 < c < 10
    i = np.searchsorted(T1, c)
    assert r["fluctuation"][i - 1] > r["background"][i - 1] and r["fluctuation"][i] < r["background"][i]
    with pytest.raises(ValidationError):
        g_limit_vs_T1(cfg, [1.0, 0.5])


def test_worst_case(cfg, budget):
    sp, src = cfg.sphere, cfg.source
    args = (sp.radius, src.d, sp.nucleon_density, src.rho_e0)
    plain = worst_case_g_limit(2e-6, budget, 0.0, 0.0, *args)
    assert plain == pytest.approx(budget.g_total, rel=1e-9)
    worst = worst_case_g_limit(2e-6, budget, 1e-7, 1e-9, *args)
    assert plain < worst < 1.1 * plain
    # largest gap and smallest radius give the smallest effective volume here
    z = zeta_sm(sp.radius - 1e-7, src.d + 1e-9, 2e-6)
    assert worst == pytest.approx(plain * zeta_sm(sp.radius, src.d, 2e-6) / z, rel=1e-6)


def test_exclusion_curve(cfg):
    grid = np.geomspace(0.5e-6, 50e-6, 9)
    c = exclusion_curve(cfg, grid)
    assert np.all(np.diff(c.g_limit) < 0)
    assert c.m_a[0] == pytest.approx(0.39465, rel=1e-4)
    assert c.m_a[-1] == pytest.approx(0.0039465, rel=1e-4)
    w = exclusion_curve(cfg, grid, worst_case=True)
    assert np.all(w.g_limit >= c.g_limit)
    assert [set(r) for r in c.rows()][0] == {"lambda_m", "m_a_eV", "g_limit", "worst_case_flag"}
    with pytest.raises(ValidationError):
        exclusion_curve(cfg, [0.05e-6])


def test_displacement_psd():
    comp = optimum_components(M, W, G, 1e-3, S_th=1e-42)
    assert comp.S_ff_ba == pytest.approx(0.5 * quantum_limited_psd(M, W, G, 1e-3))
    S = total_displacement_psd(np.array([W]), M, W, G, comp)
    chi2 = susceptibility(W, W, G) ** 2 / M**2
    assert S[0] == pytest.approx(comp.S_zz_imp + chi2 * (comp.S_ff_ba + 1e-42))
    # imprecision and back-action contributions are equal on resonance
    assert comp.S_zz_imp == pytest.approx(chi2 * comp.S_ff_ba)
    far = total_displacement_psd(np.array([1e4 * W]), M, W, G, PSDComponents(S_zz_imp=1e-30))
    assert far[0] == pytest.approx(1e-30)
