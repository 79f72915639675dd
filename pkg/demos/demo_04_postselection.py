"""
Post-selection on the in-loop readout
=====================================

Keep only runs whose readout record says "not in |gg>" and see how much
the fidelity improves, and at what cost in discarded runs.
"""

import numpy as np

from bellstab import DriveParams, SystemParams, build_model, steady_state
from bellstab.analysis import basis_weights, bell_diagonal_state, fidelity
from bellstab.readout import ReadoutModel, condition_on_m1, reweighted_fidelity

############################################################
# A fully separating readout on a Bell-diagonal mixture just removes the
# |gg> weight and renormalizes.

rho = bell_diagonal_state(gg=0.15, ee=0.10, phi_plus=0.08, phi_minus=0.67)
perfect = ReadoutModel(mu_gg=20.0, mu_not=-20.0, sigma_gg_ratio=1.0, threshold=0.0)
print(f"F before {fidelity(rho):.3f}, after {fidelity(condition_on_m1(rho, perfect).rho):.4f}")

############################################################
# The realistic in-loop readout overlaps, so the kept ensemble still holds
# some |gg>. Apply it to the simulated steady state.

ss = steady_state(build_model(SystemParams(), DriveParams()), 10.0)
m1 = ReadoutModel.m1()
cond = condition_on_m1(ss.rho, m1)
print(f"steady state F = {fidelity(ss.rho):.4f}")
print(f"conditioned F = {fidelity(cond.rho):.4f}, kept fraction = {cond.kept_fraction:.3f}")

############################################################
# Moving the threshold trades kept fraction for fidelity.

for th in np.arange(-3.0, 0.5, 0.5):
    c = condition_on_m1(ss.rho, m1, threshold=th)
    flag = "" if c.usable else "  (below kept floor)"
    print(f"threshold {th:4.1f} sigma: F = {fidelity(c.rho):.4f}, kept = {c.kept_fraction:.4f}{flag}")

############################################################
# Reweighting the four basis populations by the readout tail masses gives a
# closed-form estimate that ignores coherences between |gg> and the rest.

weights = basis_weights(ss.rho)
print(f"reweighted estimate {reweighted_fidelity(weights, m1):.4f} vs conditioned {fidelity(cond.rho):.4f}")
