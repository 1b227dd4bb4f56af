import math

import numpy as np
import pytest

from alpsense.errors import ValidationError
from alpsense.modulation import (ModulationSchedule, SpinState, autocorrelation_P, gtilde, gtilde_numeric,
                                 gtilde_printed, modulation_xi, polarization_fraction, pulse_schedule)

WZ = 148.9
TAU0 = math.pi / WZ


def test_pulse_schedule():
    s = pulse_schedule(WZ, 1.0, 1.85, 1e-3)
    assert s.tau0 == pytest.approx(21.1e-3, rel=1e-3)
    assert s.n_pulses == 47
    assert s.pulse_times[0] == pytest.approx(s.tau0)
    assert s.mw_frequency == pytest.approx(51.8e9, rel=1e-3)
    assert s.pi_pulse_length == pytest.approx(17.8e-9, rel=1e-2)
    with pytest.raises(ValidationError):
        pulse_schedule(-1.0, 1.0, 1.85, 1e-3)


def test_long_pulse_warns():
    with pytest.warns(RuntimeWarning):
        pulse_schedule(WZ, 1.0, 1.85, 1e-9)


def test_polarization_fraction():
    assert polarization_fraction(2.0, 0.02) == pytest.approx(1.0, abs=1e-29)
    assert polarization_fraction(0.0, 3.0) == 0.0
    assert polarization_fraction(1.0, 1e6) == pytest.approx(6.717e-7, rel=1e-3)
    with pytest.raises(ValidationError):
        polarization_fraction(1.0, 0.0)


def test_autocorrelation_sawtooth():
    s = ModulationSchedule.from_omega(WZ, T1=1.0)
    assert autocorrelation_P(s.tau0, s) == pytest.approx(0.0105489459963534, rel=1e-9)
    assert autocorrelation_P(0.0, s) == pytest.approx(1 - 2 / (1 + math.exp(-s.tau0)))
    t = np.linspace(0, 3, 5001)
    assert np.all(np.abs(autocorrelation_P(t, s)) <= 1)
    slow = s.with_T1(1e9)
    assert np.max(np.abs(autocorrelation_P(np.linspace(1e-4, s.tau0 * 0.999, 50), slow))) < 1e-9


def test_spin_state_steady_state_matches_sawtooth():
    st_ = SpinState()
    for _ in range(3000):
        st_ = st_.relax(TAU0, 1.0).flip()
    s = ModulationSchedule.from_omega(WZ)
    for tau in (0.2 * TAU0, TAU0):
        assert st_.relax(tau, 1.0).P == pytest.approx(float(autocorrelation_P(tau, s)), abs=1e-12)


def test_xi():
    s = ModulationSchedule.from_omega(WZ, T1=1e6)
    assert modulation_xi(0.0, s) == pytest.approx(1.0, rel=0.01)
    t = np.linspace(0, 1, 997)
    assert np.array_equal(modulation_xi(t, s), modulation_xi(t + 2 * math.pi / WZ, s)) or \
        np.mean(modulation_xi(t, s) != modulation_xi(t + 2 * math.pi / WZ, s)) < 0.01
    tt = np.linspace(0, 2 * math.pi / WZ, 200001)[:-1]
    assert abs(modulation_xi(tt, s).mean()) < 1e-4
    s1 = ModulationSchedule.from_omega(WZ, T1=1.0)
    assert np.max(np.abs(modulation_xi(t, s1))) == 2 / (1 + math.exp(-s1.tau0))


def test_gtilde_values():
    assert gtilde(WZ, 1.0, TAU0) == pytest.approx(2.57336027959777, rel=1e-10)
    assert gtilde(WZ, 0.1, TAU0) == pytest.approx(0.281614656213886, rel=1e-10)
    assert gtilde(WZ, 1.0, TAU0) == pytest.approx(2.572, rel=1e-3)
    assert gtilde(WZ, 1.0, TAU0) == pytest.approx(8 / math.pi, rel=0.015)


def test_gtilde_harmonics():
    # the response is linear in the harmonic amplitude 4/(pi k), which alternates in sign
    r3 = gtilde(3 * WZ, 10.0, TAU0) / gtilde(WZ, 10.0, TAU0)
    assert r3 == pytest.approx(-1 / 3, rel=0.05)
    assert abs(gtilde(2 * WZ, 1.0, TAU0) / gtilde(WZ, 1.0, TAU0)) < 0.02


def test_gtilde_numeric_examples():
    assert gtilde_numeric(WZ, 1.0, TAU0) == pytest.approx(2.572, rel=5e-3)
    assert abs(gtilde_numeric(2 * WZ, 1.0, TAU0)) < 0.02 * gtilde(WZ, 1.0, TAU0)
    assert gtilde_numeric(WZ, 1e-6, TAU0) < 1e-5


@pytest.mark.parametrize("T1", [1e-3, 0.1, 1.0, 10.0])
def test_closed_form_matches_quadrature(T1):
    w = np.linspace(0.1 * WZ, 10 * WZ, 50)
    a, b = gtilde(w, T1, TAU0), gtilde_numeric(w, T1, TAU0)
    floor = 1e-6 * np.abs(b).max()
    assert np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)) < 5e-3


def test_printed_variant_only_agrees_at_unit_T1():
    w = np.linspace(0.5 * WZ, 2 * WZ, 7)
    assert np.allclose(gtilde_printed(w, 1.0, TAU0), gtilde(w, 1.0, TAU0), rtol=1e-12)
    assert not np.allclose(gtilde_printed(w, 0.1, TAU0), gtilde(w, 0.1, TAU0), rtol=1e-2)


def test_peak_scaling():
    for T1 in (100 * TAU0, 1000 * TAU0):
        assert gtilde(WZ, T1, TAU0) / T1 == pytest.approx(8 / math.pi, rel=0.02)


def test_overflow_safe():
    v = gtilde(np.array([WZ, 3 * WZ]), TAU0 / 1e4, TAU0)
    assert np.all(np.isfinite(v))
