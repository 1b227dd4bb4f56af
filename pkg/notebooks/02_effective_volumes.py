# coding: utf-8

# # Spin-mass effective volume
#
# zeta_sm folds the Yukawa range of the monopole-dipole potential into an
# effective volume. The closed form treats the source as a half-space;
# brute-force quadrature over the finite source shows where that holds.

# In[1]:

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from alpsense import default_config
from alpsense.spinmass import zeta_sm, zeta_sm_bruteforce, zeta_sm_montecarlo, f_sm_amplitude

cfg = default_config()
R, d = cfg.sphere.radius, cfg.source.d


# In[2]:

lams = np.geomspace(0.1e-6, 100e-6, 200)
z = zeta_sm(R, d, lams)

checks = [0.5e-6, 2e-6, 10e-6, 50e-6]
bf = [zeta_sm_bruteforce(R, cfg.source, l)[0] for l in checks]
for l, b in zip(checks, bf):
    print("lambda %5.1f um   closed %.4e   finite source %.4e   ratio %.3f"
          % (l * 1e6, zeta_sm(R, d, l), b, b / zeta_sm(R, d, l)))


# The ratio tracks 1 - exp(-t/lambda) with t the floor thickness under the
# sphere; once lambda passes ~t the half-space picture overstates the force.

# In[3]:

t = cfg.source.L1 - cfg.source.L2
plt.figure(figsize=(5, 3.2))
plt.loglog(lams * 1e6, z, label="half-space")
plt.loglog(np.array(checks) * 1e6, bf, "o", label="finite source")
plt.xlabel("lambda (um)"); plt.ylabel("zeta_sm (m^3)")
plt.legend(); plt.tight_layout()
plt.savefig("zeta_sm.png", dpi=120)
print("floor thickness %.1f um" % (t * 1e6))


# Monte Carlo check at 2 um (importance sampled in depth).

# In[4]:

m, se = zeta_sm_montecarlo(R, cfg.source, 2e-6, n=1_000_000, seed=1)
print("MC %.5e +/- %.1e" % (m, se))


# Force per unit coupling at 2 um.

# In[5]:

print("F_sm / g = %.4g N" % f_sm_amplitude(cfg.sphere, cfg.source, 2e-6, 1.0))
