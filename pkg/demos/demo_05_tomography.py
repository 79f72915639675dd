"""
Simulated two-qubit tomography
==============================

Reconstruct the Pauli vector from joint |gg> readout after 16 pairs of
pre-rotations, with shot noise and assignment errors.
"""

import numpy as np

from bellstab import DriveParams, SystemParams, build_model, steady_state
from bellstab.analysis import PAULI_LABELS, fidelity, pauli_averages
from bellstab.readout import ReadoutModel
from bellstab.tomography import clifford_suite, default_design, reconstruct, simulate_tomography

############################################################
# The design matrix maps the 16 Pauli averages to the 16 outcome
# probabilities. Its condition number sets how noise is amplified.

design = default_design()
print(f"{len(design.settings)} settings, condition number {design.condition_number:.2f}")

############################################################
# Exact probabilities invert to the true Pauli vector.

ss = steady_state(build_model(SystemParams(), DriveParams()), 10.0)
exact = pauli_averages(ss.rho)
recon = reconstruct(simulate_tomography(ss.rho))
print("exact-mode round trip error:", np.max(np.abs(recon.values - exact.values)))

############################################################
# 5e5 shots per setting, realistic readout. Assignment errors bias the
# reconstruction; shot noise adds about 0.2 % scatter per Pauli average.

readout = ReadoutModel.tomography()
rng = np.random.default_rng(1)
runs = np.array([reconstruct(simulate_tomography(ss.rho, readout, 500_000, rng)).values for _ in range(20)])
for i, label in enumerate(PAULI_LABELS):
    if label in ("XX", "YY", "ZZ", "ZI", "IZ"):
        print(f"<{label}> exact {exact[label]: .4f}  measured {runs[:, i].mean(): .4f} +- {runs[:, i].std(ddof=1):.4f}")
print(f"F exact {fidelity(ss.rho):.4f}")

############################################################
# Calibration check: all 36 product states of the cardinal single-qubit
# states, reconstructed through the same imperfect readout.

fids = np.array(list(clifford_suite(readout).values()))
print(f"product-state fidelity: mean {fids.mean():.4f}, min {fids.min():.4f}, max {fids.max():.4f}")
