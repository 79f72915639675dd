"""
Error budget
============

Switch the imperfections on one at a time, keeping the drives fixed, to see
what each costs in fidelity.
"""

from bellstab import DriveParams, SystemParams
from bellstab.analysis import budget_systems, error_budget

############################################################
# The five configurations: everything ideal, only the dispersive-shift
# mismatch, only T1, only dephasing, and the full model.

for name, sys in budget_systems(SystemParams()).items():
    print(f"{name:13s} chi_A={sys.chi_A} T1=({sys.T1_A}, {sys.T1_B}) Tphi=({sys.Tphi_A:.4g}, {sys.Tphi_B:.4g})")

############################################################
# Each entry is an independent 10 us run; ``workers`` spreads them over
# processes without changing the numbers.

budget = error_budget(SystemParams(), DriveParams(), workers=1)
for name, f, delta in budget.rows():
    print(f"{name:13s} F = {f:.4f}   loss vs ideal = {delta:.4f}")
