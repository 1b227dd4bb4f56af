# coding: utf-8

# # Noise budget, T1 dependence and exclusion curve

# In[1]:

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from alpsense import default_config
from alpsense.noise import build_budget, exclusion_curve, g_limit_vs_T1

cfg = default_config()


# In[2]:

for conv in ("as-written", "table-matched"):
    b = build_budget(cfg, convention=conv)
    print(conv)
    for r in b.rows()[:4]:
        print("  %-24s S = %.3e  g = %.3e" % (r["source"], r["S_ff_N2_per_Hz"], r["g_contribution"]))
    for n in b.notes:
        print("  note:", n)


# The background term does not depend on T1 because Gtilde multiplies both
# signal and background; only the fluctuation term improves with T1.

# In[3]:

T1 = np.geomspace(1e-6, 10, 120)
r = g_limit_vs_T1(cfg, T1)
plt.figure(figsize=(5, 3.2))
for k in ("fluctuation", "background", "total"):
    plt.loglog(T1, r[k], label=k)
plt.axvline(r["crossover_T1"], ls=":", c="k")
plt.xlabel("T1 (s)"); plt.ylabel("g_s g_p")
plt.legend(); plt.tight_layout()
plt.savefig("g_vs_T1.png", dpi=120)
print("crossover at T1 = %.3g s" % r["crossover_T1"])


# In[4]:

lam = np.geomspace(0.5e-6, 50e-6, 80)
plain = exclusion_curve(cfg, lam)
worst = exclusion_curve(cfg, lam, worst_case=True)
plt.figure(figsize=(5, 3.2))
plt.loglog(plain.m_a, plain.g_limit, label="nominal")
plt.loglog(worst.m_a, worst.g_limit, "--", label="worst case")
plt.xlabel("m_a (eV)"); plt.ylabel("g_s g_p")
plt.legend(); plt.tight_layout()
plt.savefig("exclusion.png", dpi=120)
print("worst/nominal at 2 um: %.4f" % (worst.g_limit[np.argmin(abs(lam - 2e-6))] / plain.g_limit[np.argmin(abs(lam - 2e-6))]))
