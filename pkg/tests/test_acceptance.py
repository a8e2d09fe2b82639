"""
Acceptance battery.

Each test covers one numbered acceptance criterion at its stated tolerance
and prints one PASS/FAIL line (run with ``pytest -s tests/test_acceptance.py``
to see the lines as they appear; ``-v`` lists the per-criterion outcome).

The Monte-Carlo criteria use fixed seeds, so the whole battery is
deterministic end to end.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from opriskcap import asrf, calibration, correlation, mcsim
from opriskcap.numerics import factor_quantile, integrate_gaussian_weighted

F_Q999 = factor_quantile(0.999)
BETA01 = math.sqrt(0.1)


def report(criterion: int, description: str, ok: bool, detail: str = ""):
    line = f"ACCEPTANCE {criterion:02d} {'PASS' if ok else 'FAIL'}  {description}"
    if detail:
        line += f"  [{detail}]"
    print(line)
    assert ok, line


def mixture_moment_normal(p, c, mean, var):
    """E[exp(p X + c X^2)] for X ~ N(mean, var); needs 2 c var < 1."""
    u = (p + 2.0 * c * mean) * math.sqrt(var)
    a = c * var
    return math.exp(p * mean + c * mean * mean
                    + 0.5 * u * u / (1.0 - 2.0 * a)) / math.sqrt(1.0 - 2.0 * a)


def test_criterion_01_diversification_index():
    di = asrf.diversification_index(
        asrf.HomogeneousModel(1.07, 0.1), 0.999).diversification_index
    report(1, f"DI(sigma=1.07, rho=0.1, q=0.999) = {di:.6f} vs 0.175 +/- 0.002",
           abs(di - 0.175) <= 0.002)


def test_criterion_02_superadditivity_threshold():
    star = asrf.superadditivity_threshold(0.1, 0.999)
    di_at_star = asrf.diversification_index(
        asrf.HomogeneousModel(star, 0.1), 0.999).diversification_index
    ok = abs(star - 4.70) <= 0.01 and abs(di_at_star - 1.0) <= 1e-10
    report(2, f"sigma* = {star:.6f} vs 4.70 +/- 0.01, DI(sigma*) - 1 = "
              f"{di_at_star - 1.0:.2e} vs 1e-10", ok)


def test_criterion_03_copula_inversion():
    rho = correlation.copula_from_loss_corr(0.04, 1.07, 1.07)
    worst = 0.0
    for lc in (0.005, 0.02, 0.04, 0.1, 0.3):
        for s_i, s_j in [(0.7, 1.07), (1.07, 1.07), (2.0, 0.9)]:
            r = correlation.copula_from_loss_corr(lc, s_i, s_j)
            back = correlation.loss_corr_from_copula(correlation.CopulaPair(s_i, s_j, r))
            worst = max(worst, abs(back - lc))
    ok = abs(rho - 0.072) <= 0.001 and worst <= 1e-12
    report(3, f"rho_ij = {rho:.6f} vs 0.072 +/- 0.001, round-trip error {worst:.2e}", ok)


def test_criterion_04_r_bound_law():
    law = correlation.RBoundLaw(2.35)
    mean = correlation.r_bound_mean(law)
    mass, quad_err = quad(lambda r: correlation.r_bound_pdf(r, law), 1e-300, 1.0,
                          epsabs=1e-12, epsrel=1e-12, limit=500)
    rng = np.random.Generator(np.random.Philox(key=np.array([2026, 4], dtype=np.uint64)))
    draws = np.sort(np.exp(-2.35 * np.abs(rng.standard_normal(1_000_000)) / math.sqrt(2)))
    n = draws.size
    cdf_vals = 2.0 * norm.cdf(math.sqrt(2) * np.log(draws) / 2.35)
    spot = all(abs(correlation.r_bound_cdf(float(r), law) - c) < 1e-12
               for r, c in [(draws[10], cdf_vals[10]), (draws[n // 2], cdf_vals[n // 2])])
    ks = float(np.max(np.maximum(np.arange(1, n + 1) / n - cdf_vals,
                                 cdf_vals - np.arange(0, n) / n)))
    ok = abs(mean - 0.385) <= 0.001 and abs(mass - 1.0) <= 1e-8 and ks < 0.002 and spot
    report(4, f"E[R] = {mean:.6f} vs 0.385 +/- 0.001, pdf mass - 1 = "
              f"{mass - 1.0:.2e}, KS = {ks:.5f} vs 0.002", ok)


def test_criterion_05_loss_correlation_transfer():
    analytic = correlation.loss_corr_from_freq_corr(0.385, 1.5, 1.5)
    fit = calibration.FrequencySeverityFit("cell", 20.0, 0.0, 1.5, 0)
    sim = mcsim.simulate_compound_lda(fit, fit, 7.7, 1_000_000, seed=50505)
    gap = abs(sim.loss_corr - analytic)
    ok = abs(analytic - 0.0406) <= 0.0005 and gap <= 4.0 * sim.loss_corr_se
    report(5, f"transfer formula = {analytic:.6f} vs 0.0406 +/- 0.0005, simulated "
              f"{sim.loss_corr:.6f} within {gap / sim.loss_corr_se:.2f} SE (<= 4)", ok)


def test_criterion_06_hetero_sigma_sensitivity():
    base = asrf.conditional_loss_homogeneous(asrf.HomogeneousModel(1.07, 0.1), F_Q999)
    ratios = {v: asrf.conditional_loss_hetero_sigma(
        asrf.HeteroSigmaModel(1.07, v, 0.1), F_Q999) / base for v in (0.1764, 0.18)}
    rho_shift = (asrf.conditional_loss_hetero_sigma(
        asrf.HeteroSigmaModel(1.07, 0.1764, 0.2), F_Q999)
        / asrf.conditional_loss_hetero_sigma(
            asrf.HeteroSigmaModel(1.07, 0.1764, 0.1), F_Q999))
    ok = all(1.60 <= r <= 1.65 for r in ratios.values()) and 1.60 <= rho_shift <= 1.65
    report(6, "capital ratios v=0.1764: %.4f, v=0.18: %.4f, rho 0.1->0.2: %.4f, "
              "all in [1.60, 1.65]" % (ratios[0.1764], ratios[0.18], rho_shift), ok)


def test_criterion_07_uncertain_correlation_robustness():
    base = asrf.conditional_loss_homogeneous(asrf.HomogeneousModel(1.07, 0.1), F_Q999)
    r_normal = asrf.conditional_loss_uncertain_beta(
        asrf.UncertainBetaModel(1.07, BETA01, 0.0044, "normal"), F_Q999) / base
    base2 = asrf.conditional_loss_homogeneous(asrf.HomogeneousModel(2.0, 0.1), F_Q999)
    r_sigma2 = asrf.conditional_loss_uncertain_beta(
        asrf.UncertainBetaModel(2.0, BETA01, 0.0044, "normal"), F_Q999) / base2
    curve = asrf.dispersion_impact_curve("beta", np.linspace(0.0, 0.1, 51))
    gap = max(abs(p.y["ratio_normal"] - p.y["ratio_uniform"]) for p in curve)
    ok = 1.01 <= r_normal <= 1.02 and 1.03 <= r_sigma2 <= 1.06 and gap < 0.005
    report(7, f"normal-law ratio {r_normal:.4f} in [1.01, 1.02], sigma=2 ratio "
              f"{r_sigma2:.4f} in [1.03, 1.06], law gap {gap:.5f} < 0.005", ok)


def test_criterion_08_loading_variance_mapping():
    w = correlation.w_from_rho_variance(BETA01, 0.03 ** 2)
    worst = 0.0
    for beta in (0.0, 0.2, BETA01, 0.8):
        for var in (0.0, 1e-6, 9e-4, 0.01):
            back = correlation.rho_variance_from_w(
                beta, correlation.w_from_rho_variance(beta, var))
            worst = max(worst, abs(back - var))
    ok = abs(w - 0.0044) <= 1e-5 and worst <= 1e-14
    report(8, f"w = {w:.7f} vs 0.0044 +/- 1e-5, round-trip error {worst:.2e}", ok)


def test_criterion_09_monotonicity_threshold():
    f_star = asrf.monotonicity_threshold(1.07, 0.18, 0.1)
    model = asrf.HeteroSigmaModel(1.07, 0.18, 0.1)
    h = 1e-5

    def slope(f):
        return (asrf.conditional_loss_hetero_sigma(model, f + h)
                - asrf.conditional_loss_hetero_sigma(model, f - h)) / (2 * h)

    lo, hi = 0.9 * f_star, 1.1 * f_star
    bracketed = slope(lo) < 0 < slope(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if slope(mid) < 0:
            lo = mid
        else:
            hi = mid
    located = 0.5 * (lo + hi)
    ok = abs(f_star - 18.8) <= 0.05 and bracketed and abs(located - f_star) <= 1e-4
    report(9, f"F* = {f_star:.4f} vs 18.8 +/- 0.05, slope sign change at "
              f"{located:.4f}", ok)


def _quadrature_worst_error():
    worst = 0.0
    grid_f = (-5.0, F_Q999, -1.0, 0.0, 1.0)
    for f in grid_f:
        for sigma in (0.5, 1.07, 2.0):
            for rho in (0.05, 0.1, 0.3):
                closed = asrf.conditional_loss_homogeneous(
                    asrf.HomogeneousModel(sigma, rho), f)
                oracle = integrate_gaussian_weighted(
                    lambda t: math.exp(-sigma * (math.sqrt(rho) * f
                                                 + math.sqrt(1 - rho) * t)))
                worst = max(worst, abs(closed - oracle) / abs(oracle))
                for v in (0.0, 0.03, 0.18):
                    closed = asrf.conditional_loss_hetero_sigma(
                        asrf.HeteroSigmaModel(sigma, v, rho), f)
                    if v == 0.0:
                        oracle = asrf.conditional_loss_homogeneous(
                            asrf.HomogeneousModel(sigma, rho), f)
                    else:
                        sd = math.sqrt(v)
                        oracle = integrate_gaussian_weighted(
                            lambda t: math.exp(
                                -(sigma + sd * t) * math.sqrt(rho) * f
                                + 0.5 * (1 - rho) * (sigma + sd * t) ** 2))
                    worst = max(worst, abs(closed - oracle) / abs(oracle))
            for w in (0.0044, 0.01):
                sd = math.sqrt(w)
                closed = asrf.conditional_loss_uncertain_beta(
                    asrf.UncertainBetaModel(sigma, BETA01, w, "normal"), f)
                oracle = integrate_gaussian_weighted(
                    lambda t: math.exp(-(BETA01 + sd * t) * sigma * f
                                       + 0.5 * (1 - (BETA01 + sd * t) ** 2) * sigma ** 2))
                worst = max(worst, abs(closed - oracle) / abs(oracle))
                half = math.sqrt(3.0 * w)
                closed = asrf.conditional_loss_uncertain_beta(
                    asrf.UncertainBetaModel(sigma, BETA01, w, "uniform"), f)
                oracle = asrf.conditional_loss_generic(
                    sigma, lambda x: 1.0 / (2.0 * half), f,
                    support=(BETA01 - half, BETA01 + half))
                worst = max(worst, abs(closed - oracle) / abs(oracle))
    return worst


def test_criterion_10_oracle_equivalence():
    worst = _quadrature_worst_error()

    fq = F_Q999
    configs = []
    target = asrf.conditional_loss_homogeneous(asrf.HomogeneousModel(1.07, 0.1), fq)
    second = math.exp(-2 * 1.07 * BETA01 * fq + 2 * 1.07 ** 2 * 0.9)
    configs.append(("homogeneous", mcsim.PopulationSpec(sigma=1.07, beta=BETA01),
                    target, second, 101))
    target = asrf.conditional_loss_hetero_sigma(asrf.HeteroSigmaModel(1.07, 0.1764, 0.1), fq)
    second = mixture_moment_normal(-2 * BETA01 * fq, 2 * 0.9, 1.07, 0.1764)
    configs.append(("hetero_sigma",
                    mcsim.PopulationSpec(sigma=1.07, beta=BETA01, sigma_var=0.1764),
                    target, second, 102))
    target = asrf.conditional_loss_uncertain_beta(
        asrf.UncertainBetaModel(1.07, BETA01, 0.0044, "normal"), fq)
    second = math.exp(2 * 1.07 ** 2) * mixture_moment_normal(
        -2 * 1.07 * fq, -2 * 1.07 ** 2, BETA01, 0.0044)
    configs.append(("uncertain_beta_normal",
                    mcsim.PopulationSpec(sigma=1.07, beta=BETA01, beta_var=0.0044,
                                         beta_law="normal"),
                    target, second, 103))
    target = asrf.conditional_loss_uncertain_beta(
        asrf.UncertainBetaModel(1.07, BETA01, 0.0044, "uniform"), fq)
    half = math.sqrt(3 * 0.0044)
    second, _ = quad(lambda b: math.exp(-2 * 1.07 * b * fq + 2 * 1.07 ** 2 * (1 - b * b))
                     / (2 * half), BETA01 - half, BETA01 + half,
                     epsabs=1e-12, epsrel=1e-12)
    configs.append(("uncertain_beta_uniform",
                    mcsim.PopulationSpec(sigma=1.07, beta=BETA01, beta_var=0.0044,
                                         beta_law="uniform"),
                    target, second, 104))

    mc_lines = []
    mc_ok = True
    for name, pop, target, second, seed in configs:
        res = mcsim.simulate_portfolio(
            pop, mcsim.SimConfig(n_cells=1_000_000, n_scenarios=1, seed=seed),
            fixed_factor=fq)
        se = math.sqrt(max(second - target * target, 0.0) / 1_000_000)
        z = abs(res.mean_cell_loss[0] - target) / se
        mc_ok = mc_ok and z <= 4.0
        mc_lines.append(f"{name} {z:.2f}SE")
    ok = worst <= 1e-8 and mc_ok
    report(10, f"quadrature worst rel err {worst:.2e} <= 1e-8; portfolio means: "
               + ", ".join(mc_lines) + " (all <= 4 SE)", ok)


def test_criterion_11_calibration_round_trip(tmp_path):
    worst = 0.0
    for q in (0.95, 0.975, 0.99, 0.995, 0.999):
        fq = factor_quantile(q)
        for sigma in np.arange(0.0, 4.0001, 0.1):
            sigma = float(sigma)
            ratio = calibration.ev_var_ratio(sigma, q)
            if sigma <= -fq:
                worst = max(worst, abs(calibration.sigma_from_ratio(
                    ratio, q, "minus_root") - sigma))
            if sigma >= -fq:
                worst = max(worst, abs(calibration.sigma_from_ratio(
                    ratio, q, "plus_root") - sigma))

    generating = [
        calibration.FrequencySeverityFit("ops-exec", 40.0, 1.2, 0.8, 0),
        calibration.FrequencySeverityFit("fraud-int", 12.0, 2.0, 1.1, 0),
        calibration.FrequencySeverityFit("damage", 6.0, 2.5, 1.6, 0),
    ]
    window = 25
    events = mcsim.generate_loss_events(generating, window_years=window, seed=1111)
    csv_path = tmp_path / "events.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("cell_id,year,amount\n")
        for e in events:
            fh.write(f"{e.cell_id},{e.year},{e.amount!r}\n")
    loaded = calibration.load_loss_events(csv_path)

    recovered_ok = True
    details = []
    for gen in generating:
        fit = calibration.fit_frequency_severity(loaded, gen.cell_id, window)
        n = fit.n_events
        lam_ok = abs(fit.lam - gen.lam) <= 4 * math.sqrt(gen.lam / window)
        m_ok = abs(fit.m - gen.m) <= 4 * gen.s / math.sqrt(n)
        s_ok = abs(fit.s - gen.s) <= 4 * gen.s / math.sqrt(2 * n)
        agg = calibration.implied_aggregate_sigma(fit, 0.999, n_scenarios=100_000,
                                                  seed=2222)
        recovered_ok = recovered_ok and lam_ok and m_ok and s_ok and agg.sigma > 0
        details.append(f"{gen.cell_id}: lam {fit.lam:.2f}, m {fit.m:.3f}, "
                       f"s {fit.s:.3f}, sigma999 {agg.sigma:.3f}")
    ok = worst <= 1e-10 and recovered_ok
    report(11, f"round-trip worst error {worst:.2e} <= 1e-10; synthetic recovery: "
               + "; ".join(details), ok)
