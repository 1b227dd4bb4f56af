# coding: utf-8

# # Time-domain simulation and signal recovery
#
# The physical damping gives ring-down times of days, so the runs below
# inflate gamma by 1e4 and rescale comparisons with it.

# In[1]:

import math

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from alpsense import default_config
from alpsense.langevin import (SimulationConfig, estimate_psd, monte_carlo, recover_signal,
                               simulate_ensemble)
from alpsense.noise import total_displacement_psd, PSDComponents

cfg = default_config()
m, wz = cfg.sphere.mass, cfg.trap.omega_z


# In[2]:

sim = SimulationConfig(duration=400.0, gamma_scale=1e4, decimation=5)
tr = simulate_ensemble(sim, cfg, range(32))
var_eq = 1.380649e-23 * cfg.env.temperature / (m * wz**2)
print("<z^2> / (kT / m w^2) = %.4f" % (np.mean(tr.z**2) / var_eq))


# Simulated spectrum against the analytic one.

# In[3]:

f, S = estimate_psd(tr.z, tr.fs, 2**13)
S = S.mean(axis=0)
p = tr.meta
Sa = total_displacement_psd(2 * math.pi * f, m, wz, p["gamma"], PSDComponents(S_ff_th=p["S_ff"])) * 2 * math.pi
sel = (f > 20) & (f < 28)
plt.figure(figsize=(5, 3))
plt.semilogy(f[sel], S[sel], label="simulated")
plt.semilogy(f[sel], Sa[sel], "--", label="analytic")
plt.xlabel("f (Hz)"); plt.ylabel("S_zz (m^2/Hz)")
plt.legend(); plt.tight_layout()
plt.savefig("psd.png", dpi=120)


# Inject a square-wave force and get it back.

# In[4]:

for f_in in (0.0, 2e-20, 1e-18):
    s = SimulationConfig(duration=60.0, gamma_scale=1e4, spin_mass=True, f_sm=f_in, decimation=5)
    mc = monte_carlo(s, cfg, n_seeds=50, base_seed=10)
    print("injected %.1e  mean %.3e  std %.2e  (floor %.2e)" % (f_in, mc.mean, mc.std, mc.predicted_std))
