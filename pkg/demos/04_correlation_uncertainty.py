"""
Correlation uncertainty is a second-order effect on capital.

Nobody knows the pairwise correlations; treat the factor loading B as
random with mean beta = sqrt(10%) and variance w.  Mapping an (already
conservative) 3% standard deviation of the pairwise correlations through
var(rho_ij) = w(w + 2 beta^2) gives w = 0.44%, i.e. a 6.6% standard
deviation of the loading.

The punchline: at sigma = 107% that moves capital by under 2%, at a very
conservative sigma = 200% by about 5%, and the normal and uniform loading
laws give nearly identical curves -- the correlation-dispersion *shape*
does not matter either.  Uniform correlation is a robust modeling shortcut.
"""

import numpy as np

from opriskcap import (
    HomogeneousModel,
    UncertainBetaModel,
    conditional_loss_homogeneous,
    conditional_loss_uncertain_beta,
    dispersion_impact_curve,
    factor_quantile,
    rho_variance_from_w,
    w_from_rho_variance,
)

Q = 0.999
fq = factor_quantile(Q)
beta = np.sqrt(0.1)

w = w_from_rho_variance(beta, 0.03 ** 2)
print(f"stdev(rho_ij) = 3% with beta^2 = 10% -> loading variance w = {w:.4%}")
print(f"  (stdev of the loading itself: {np.sqrt(w):.2%};"
      f" inverse check var(rho_ij) = {rho_variance_from_w(beta, w):.6f})\n")

for sigma in (1.07, 2.00):
    base = conditional_loss_homogeneous(HomogeneousModel(sigma, beta ** 2), fq)
    lifted = conditional_loss_uncertain_beta(
        UncertainBetaModel(sigma, beta, w, "normal"), fq)
    print(f"sigma = {sigma:.2f}: capital x{lifted / base:.4f} with w = {w:.4%}"
          f"  ({(lifted / base - 1):+.2%})")

print("\ncapital-ratio curves, normal vs uniform loading law (figures 3 data):")
print("  sqrt w   normal    uniform   gap")
for point in dispersion_impact_curve("beta", [0.0, 0.02, 0.044, 0.066, 0.08, 0.1]):
    rn, ru = point.y["ratio_normal"], point.y["ratio_uniform"]
    print(f"  {point.x:5.3f}   {rn:.5f}   {ru:.5f}   {abs(rn - ru):.2e}")

print("\nthe two laws stay within half a percentage point of each other over")
print("the whole sweep: the distributional shape of correlation uncertainty")
print("is not a capital driver.")
