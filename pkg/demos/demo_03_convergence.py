"""
Approach to the steady state
============================

Sample the fidelity along one trajectory and fit the exponential rise.
"""

import numpy as np

from bellstab import DriveParams, SystemParams, build_model, evolve, initial_state
from bellstab.analysis import fidelity, fit_exponential

############################################################
# One run, snapshots every 100 ns. Snapshots land exactly on the requested
# times, so the series is directly comparable with a stroboscopic experiment.

system = SystemParams()
times = np.round(np.arange(101) * 0.1, 10)
traj = evolve(build_model(system, DriveParams()), initial_state(system), 10.0, times=times)
f = np.array([fidelity(rho) for rho in traj.states])

for t, value in zip(traj.times[::10], f[::10]):
    print(f"t = {t:4.1f} us   F = {value:.4f}")

############################################################
# Fit F(t) = F_inf - (F_inf - F_0) exp(-t / tau). The residual ripple comes
# from the periodic drives and sets the fit rms.

fit = fit_exponential(traj.times, f)
print(f"tau = {fit.tau:.3f} us, F_inf = {fit.f_inf:.4f}, F_0 = {fit.f_0:.4f}, rms = {fit.rms:.4f}")
print(f"rate 1/tau = {1 / fit.tau:.3f} /us against kappa = {2 * np.pi * system.kappa:.1f} /us")
