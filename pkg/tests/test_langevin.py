import math

import numpy as np
import pytest

from alpsense.config import default_config
from alpsense.errors import ValidationError
from alpsense.langevin import (SimulationConfig, estimate_psd, monte_carlo, predicted_amplitude_error,
                               recover_signal, simulate, simulate_ensemble, simulation_params)

W = 148.9
P = 2 * math.pi / W


@pytest.fixture(scope="module")
def exp():
    return default_config()


def test_validation(exp):
    with pytest.raises(ValidationError):
        SimulationConfig(duration=50 * P).validate(W)
    with pytest.raises(ValidationError):
        SimulationConfig(dt=P / 10).validate(W)
    with pytest.raises(ValidationError):
        SimulationConfig(gamma_scale=0).validate(W)
    SimulationConfig(duration=100 * P).validate(W)


def test_undamped_frequency_exact(exp):
    sim = SimulationConfig(duration=200 * P, thermal=False, z0=1e-9, gamma_scale=1e-9)
    tr = simulate(sim, exp)
    # one full period after each sample the position repeats
    n = 50
    assert np.max(np.abs(tr.z[n:] - tr.z[:-n])) < 1e-6 * 1e-9


def test_ring_down_rate(exp):
    g = exp.trap.gamma * 1e4
    sim = SimulationConfig(duration=300 * P, thermal=False, z0=1e-9, gamma_scale=1e4)
    tr = simulate(sim, exp)
    A = np.hypot(tr.z, tr.v / W)
    slope = np.polyfit(tr.t, np.log(A), 1)[0]
    assert slope == pytest.approx(-g / 2, rel=1e-3)


def test_deterministic_and_seed_independent(exp):
    sim = SimulationConfig(duration=100 * P, seed=7)
    a, b = simulate(sim, exp), simulate(sim, exp)
    assert np.array_equal(a.z, b.z)
    ens = simulate_ensemble(sim, exp, [3, 7, 9])
    assert np.array_equal(ens.z[1], a.z)
    assert not np.array_equal(ens.z[0], a.z)
    assert a.config_hash == exp.config_hash


def test_static_force_offset(exp):
    F = 1e-18
    sim = SimulationConfig(duration=2000 * P, thermal=False, F_const=F, gamma_scale=1e4, decimation=10)
    tr = simulate(sim, exp)
    tail = tr.z[tr.z.size // 2:]
    assert tail.mean() == pytest.approx(F / (exp.sphere.mass * W**2), rel=1e-3)


def test_psd_calibration_white_and_sine():
    rng = np.random.default_rng(1)
    fs, sigma = 1000.0, 0.3
    x = sigma * rng.standard_normal(2**18)
    f, S = estimate_psd(x, fs, 4096)
    assert np.median(S[5:-5]) * fs / 2 == pytest.approx(sigma**2, rel=0.03)
    t = np.arange(2**16) / fs
    A, f0 = 2.0, 125.0
    f, S = estimate_psd(A * np.sin(2 * math.pi * f0 * t), fs, 4096)
    assert f[np.argmax(S)] == pytest.approx(f0)
    # integrated power = A^2/2
    assert np.sum(S) * (f[1] - f[0]) == pytest.approx(A * A / 2, rel=1e-3)


def test_psd_segment_requirement():
    with pytest.raises(ValidationError):
        estimate_psd(np.zeros(4000), 1.0, 1024)
    f, S = estimate_psd(np.zeros(4608), 1.0, 1024)
    assert S.shape == f.shape


def test_thermal_variance_inflated(exp):
    sim = SimulationConfig(duration=400.0, gamma_scale=1e4, decimation=5)
    tr = simulate_ensemble(sim, exp, range(16))
    p = tr.meta
    var_z = p["S_ff"] / (4 * p["gamma"] * p["m"] ** 2 * W**2)
    assert np.var(tr.z) / var_z == pytest.approx(1.0, rel=0.1)


def test_signal_recovery_noiseless(exp):
    sim = SimulationConfig(duration=2000 * P, thermal=False, spin_mass=True, f_sm=1e-18, gamma_scale=1e4)
    est = recover_signal(simulate(sim, exp))
    assert est.amplitude == pytest.approx(1e-18, rel=0.01)
    assert abs(est.quadrature) < 0.02e-18
    assert est.error == 0.0


def test_recovery_sign_and_linearity(exp):
    out = []
    for f in (-2e-18, 1e-18, 3e-18):
        sim = SimulationConfig(duration=2000 * P, thermal=False, spin_mass=True, f_sm=f, gamma_scale=1e4)
        out.append(recover_signal(simulate(sim, exp)).amplitude)
    assert np.allclose(np.array(out) / np.array([-2, 1, 3]), out[1], rtol=1e-9)


def test_g_product_path(exp):
    sim = SimulationConfig(spin_mass=True, g_product=1e-20)
    p = simulation_params(sim, exp)
    assert p["f_sm"] > 0 and p["F_mod"] == p["f_sm"]
    p = simulation_params(SimulationConfig(spin_background=True, F_s=2e-20), exp)
    assert p["F_mod"] == 2e-20


def test_monte_carlo_null_and_error(exp):
    sim = SimulationConfig(duration=60.0, gamma_scale=1e4, decimation=5)
    mc = monte_carlo(sim, exp, n_seeds=24)
    assert abs(mc.mean) < 4 * mc.predicted_std / math.sqrt(24)
    assert mc.std == pytest.approx(mc.predicted_std, rel=0.4)
    same = monte_carlo(sim, exp, seeds=[5, 5, 5])
    assert same.std == 0.0
    with pytest.raises(ValidationError):
        monte_carlo(sim, exp, seeds=[1])


def test_predicted_error_halves_with_4x_time():
    assert predicted_amplitude_error(1e-38, 4.0) == pytest.approx(predicted_amplitude_error(1e-38, 1.0) / 2)


def test_snr_near_one_at_predicted_floor(exp):
    base = SimulationConfig(duration=60.0, gamma_scale=1e4, decimation=5)
    S = simulation_params(base, exp)["S_ff"]
    f = predicted_amplitude_error(S, base.duration)
    sim = SimulationConfig(duration=60.0, gamma_scale=1e4, decimation=5, spin_mass=True, f_sm=f)
    mc = monte_carlo(sim, exp, n_seeds=100, base_seed=500)
    snr = mc.mean / mc.std
    assert 0.5 < snr < 2.0


def test_std_shrinks_with_duration(exp):
    a = monte_carlo(SimulationConfig(duration=30.0, gamma_scale=1e4, decimation=5), exp, n_seeds=100, base_seed=7)
    b = monte_carlo(SimulationConfig(duration=60.0, gamma_scale=1e4, decimation=5), exp, n_seeds=100, base_seed=7)
    assert a.std / b.std == pytest.approx(math.sqrt(2), rel=0.2)
