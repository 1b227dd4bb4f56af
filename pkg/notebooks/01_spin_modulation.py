# coding: utf-8

# # Spin flipping and the modulation spectrum
#
# The spin source is flipped by pi pulses every half trap period. Between
# pulses the polarization relaxes toward zero with time constant T1, so the
# spin signal is a decaying square wave. Here we look at the pulse train,
# the autocorrelation and the resulting spectrum Gtilde.

# In[1]:

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from alpsense.modulation import (ModulationSchedule, autocorrelation_P, gtilde, gtilde_numeric,
                                 modulation_xi, pulse_schedule)

wz = 148.9


# In[2]:

sched = pulse_schedule(wz, total_time=1.0, B_ext=1.85, B1=1e-3, T1=1.0)
print("tau0 = %.4g ms, %d pulses in 1 s" % (sched.tau0 * 1e3, sched.n_pulses))
print("microwave %.4g GHz, pi pulse %.3g ns" % (sched.mw_frequency / 1e9, sched.pi_pulse_length * 1e9))


# Two periods of the drive for a long and a short T1.

# In[3]:

t = np.linspace(0, 4 * math.pi / wz, 2000)
fig, ax = plt.subplots(1, 2, figsize=(9, 3))
for T1 in (1.0, 5e-3):
    s = sched.with_T1(T1)
    ax[0].plot(t * 1e3, modulation_xi(t, s), label="T1 = %g s" % T1)
    ax[1].plot(t * 1e3, autocorrelation_P(t, s), label="T1 = %g s" % T1)
ax[0].set_xlabel("t (ms)"); ax[0].set_ylabel("xi")
ax[1].set_xlabel("tau (ms)"); ax[1].set_ylabel("P(tau)")
ax[1].legend()
fig.tight_layout()
fig.savefig("modulation_drive.png", dpi=120)


# The closed form against direct quadrature of the transform.

# In[4]:

w = np.linspace(0.1 * wz, 10 * wz, 400)
tau0 = math.pi / wz
G = gtilde(w, 1.0, tau0)
Gn = gtilde_numeric(w[::20], 1.0, tau0)
print("max relative difference:", np.max(np.abs(G[::20] - Gn) / np.abs(Gn).max()))

plt.figure(figsize=(5, 3))
plt.plot(w / wz, G, label="closed form")
plt.plot(w[::20] / wz, Gn, "o", ms=3, label="quadrature")
plt.xlabel("omega / omega_z"); plt.ylabel("Gtilde (s)")
plt.legend(); plt.tight_layout()
plt.savefig("gtilde.png", dpi=120)


# Odd harmonics alternate in sign and fall off as 1/k; even ones vanish.

# In[5]:

for k in (1, 2, 3, 5):
    print(k, gtilde(k * wz, 10.0, tau0) / gtilde(wz, 10.0, tau0))


# For T1 much shorter than the flip interval the peak grows linearly in T1;
# for long T1 it saturates at (8/pi) T1.

# In[6]:

T1 = np.geomspace(1e-5, 10, 60)
Gr = gtilde(wz, T1, tau0)
plt.figure(figsize=(5, 3))
plt.loglog(T1, Gr)
plt.loglog(T1, 8 * T1, "--", label="8 T1")
plt.loglog(T1, 8 / math.pi * T1, ":", label="(8/pi) T1")
plt.xlabel("T1 (s)"); plt.ylabel("Gtilde(omega_z) (s)")
plt.legend(); plt.tight_layout()
plt.savefig("gtilde_vs_T1.png", dpi=120)
