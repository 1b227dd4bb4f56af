# coding: utf-8

# # Nulling the spin-induced magnetic force
#
# The polarized electrons also magnetize the source. A groove cut into the
# top cylinder lets the field and its gradient cancel at the sphere. We
# null |zeta_s| and then propagate the machining tolerances.

# In[1]:

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from alpsense import default_config
from alpsense.background import (f_s_amplitude, optimize_geometry, propagate_uncertainty,
                                 sensitivity_sweep, zeta_s)

cfg = default_config()
R = cfg.sphere.radius


# In[2]:

z0 = zeta_s(cfg.source, R, cfg.trap)
print("nominal zeta_s = %.3e m^3, F_s = %.3e N" % (z0, f_s_amplitude(z0, 2.3e27, -9.1e-6, 750)))

rep = optimize_geometry(cfg.source, target=1e-23, R=R, trap=cfg.trap)
print("nulled to %.3e m^3 in %d evaluations" % (rep.achieved, rep.iterations))
for k in ("L1", "L2", "R_s1", "R_s2"):
    print("  %-5s %.5f -> %.5f um" % (k, rep.initial[k] * 1e6, rep.optimized[k] * 1e6))


# In[3]:

geo = cfg.source.with_params(**rep.optimized)
bud = propagate_uncertainty(geo, R, cfg.trap)
print("%-6s %10s %14s %12s" % ("param", "sigma", "dzeta_s", "dF_s"))
for row in bud.table():
    print("%-6s %10.3g %14.3e %12.3e" % (row["param"], row["sigma"], row["delta_zeta_s"], row["delta_F_s"]))


# Sensitivity to the groove depth tolerance.

# In[4]:

D = np.linspace(0, 20e-9, 21)
plt.figure(figsize=(5, 3))
for p in ("L2", "R_s2", "d"):
    plt.plot(D * 1e9, sensitivity_sweep(p, D, geo, R, cfg.trap), label=p)
plt.xlabel("sigma (nm)"); plt.ylabel("Delta F_s (N)")
plt.legend(); plt.tight_layout()
plt.savefig("sensitivity.png", dpi=120)
