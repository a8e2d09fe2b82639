"""
Capital and diversification in the homogeneous one-factor portfolio.

The walk-through: fix a typical cell risk (sigma = 107%) and a conservative
uniform correlation (rho = 10%), evaluate the large-portfolio conditional
loss at the 99.9% systemic-factor quantile, and compare it against the sum
of stand-alone capital charges.  The diversification index lands at 17.5%,
and capital stays sub-additive until the cell risk exceeds sigma* = 4.70.
"""

import numpy as np

from opriskcap import (
    HomogeneousModel,
    conditional_loss_homogeneous,
    diversification_index,
    factor_quantile,
    stand_alone_expectation,
    superadditivity_threshold,
)

SIGMA, RHO, Q = 1.07, 0.1, 0.999

fq = factor_quantile(Q)
print(f"systemic factor quantile F_q at q={Q:.1%}: {fq:.6f}  (negative: losses")
print("grow as the factor falls)\n")

model = HomogeneousModel(sigma=SIGMA, rho=RHO)
report = diversification_index(model, Q)

print(f"per-cell conditional loss L(F_q)      : {report.conditional_loss_at_fq:.4f}")
print(f"per-cell stand-alone charge E[e^-sF_q]: {report.stand_alone_expectation:.4f}")
print(f"diversification index DI              : {report.diversification_index:.4f}"
      f"  (17.5% of the undiversified capital)\n")

# The bank total is N x L(F_q): scale-free core, trivial client-side multiply.
n_cells = 21
print(f"a {n_cells}-cell bank would hold {n_cells * report.conditional_loss_at_fq:.2f}"
      f" per unit cell size instead of {n_cells * report.stand_alone_expectation:.2f}\n")

star = superadditivity_threshold(RHO, Q)
print(f"super-additivity threshold sigma* = {star:.4f}")
for sigma in (1.07, 3.0, star, 5.5):
    di = diversification_index(HomogeneousModel(sigma, RHO), Q).diversification_index
    marker = "sub-additive" if di < 1 else ("boundary" if abs(di - 1) < 1e-9
                                            else "SUPER-additive")
    print(f"  sigma = {sigma:4.2f} -> DI = {di:8.4f}  ({marker})")

print("\nconditional loss against the factor (capital sits at the left tail):")
for f in np.linspace(-4, 1, 6):
    print(f"  F = {f:+.1f} -> L(F) = {conditional_loss_homogeneous(model, f):8.4f}")

print(f"\nsanity: stand-alone charge from the formula {stand_alone_expectation(model, Q):.4f}"
      f" equals e^(-sigma F_q) = {np.exp(-SIGMA * fq):.4f}")
