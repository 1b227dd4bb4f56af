# coding: utf-8

# # Magneto-gravitational trap with Casimir attraction

# In[1]:

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from alpsense import default_config
from alpsense.trap import calibrate_trap, casimir_potential, find_equilibrium, resonance_and_depth

cfg = default_config()
kT = 1.380649e-23 * cfg.env.temperature


# Calibrate offset field and curvature so that the sphere sits at the
# nominal gap with the chosen trap frequency.

# In[2]:

model = calibrate_trap(cfg)
prof = resonance_and_depth(model, B_pm=cfg.trap.B_pm)
print("B0 = %.5f T (external %.5f T), curvature %.4g T/m^2" % (model.B0, prof.B_ext, model.curvature))
print("omega_z = %.6g rad/s, depth %.3g J = %.0f kT" % (prof.omega_z, prof.depth, prof.depth / kT))
print("Casimir energy at the gap: %.4g J" % casimir_potential(cfg.source.d, cfg.sphere.radius, cfg.trap.eta_c))


# In[3]:

plt.figure(figsize=(5, 3))
plt.plot(prof.z * 1e6, prof.E_p / kT)
plt.axvline(prof.barrier_low * 1e6, ls=":", c="k")
plt.xlabel("z (um)"); plt.ylabel("E - E_eq (kT)")
plt.tight_layout()
plt.savefig("trap_profile.png", dpi=120)


# Switching Casimir off moves the equilibrium by about F_cas/(m w^2).

# In[4]:

z_off = find_equilibrium(model.with_(K_cas=0.0))
print("shift without Casimir: %.1f nm" % (z_off * 1e9))
