"""
What dispersion in cell risk does to capital.

Cells are not clones: letting the lognormal scale vary across cells as
N(sigma, v) thickens the portfolio tail.  At sigma = 107%, rho = 10% the
jump from v = 0 to v = 0.1764 raises capital by about +62% -- the same
order as doubling the average correlation.  Diversification, measured
against the (also larger) stand-alone charges, improves with v.

The closed form stops being monotone in the factor beyond F* = sigma/(v
sqrt(rho)), far outside the region that matters for capital.
"""

import numpy as np

from opriskcap import (
    HeteroSigmaModel,
    HomogeneousModel,
    conditional_loss_hetero_sigma,
    conditional_loss_homogeneous,
    diversification_index,
    dispersion_impact_curve,
    factor_quantile,
    monotonicity_threshold,
)

SIGMA, RHO, Q = 1.07, 0.1, 0.999
fq = factor_quantile(Q)

base = conditional_loss_homogeneous(HomogeneousModel(SIGMA, RHO), fq)
print(f"no-dispersion capital L(F_q) = {base:.4f}\n")

print("capital impact of cell-risk dispersion v:")
for v in (0.0, 0.04, 0.1, 0.1764, 0.18, 0.25):
    loss = conditional_loss_hetero_sigma(HeteroSigmaModel(SIGMA, v, RHO), fq)
    di = diversification_index(HeteroSigmaModel(SIGMA, v, RHO), Q).diversification_index
    print(f"  v = {v:6.4f} (sqrt v = {np.sqrt(v):5.3f}) -> capital x{loss / base:6.4f}, "
          f"DI = {di:.4f}")

print("\ndoubling the average correlation instead:")
lifted = conditional_loss_hetero_sigma(HeteroSigmaModel(SIGMA, 0.1764, 0.2), fq)
at_ten = conditional_loss_hetero_sigma(HeteroSigmaModel(SIGMA, 0.1764, 0.1), fq)
print(f"  rho 10% -> 20% at v = 0.1764: capital x{lifted / at_ten:.4f}")

f_star = monotonicity_threshold(SIGMA, 0.18, RHO)
print(f"\nmonotonicity threshold F* = {f_star:.2f}: the loss only turns in F")
print("eighteen standard deviations into the boom region, irrelevant for the")
print("capital tail at F_q =", f"{fq:.3f}")

print("\ndiversification-index ratio curve (the data behind `figures 2`):")
for point in dispersion_impact_curve("sigma", [0.0, 0.1, 0.2, 0.3, 0.42, 0.5]):
    print(f"  sqrt v = {point.x:4.2f} -> DI(v)/DI(0) = {point.y['di_ratio']:.4f}")
