"""
Self-verification batteries: analytic identities and Monte-Carlo agreement.

Two suites are exposed:

* ``run_analytic_checks`` -- deterministic: reproduces the reference capital
  figures (diversification index 17.5%, super-additivity threshold 4.70,
  copula parameter 7.2%, R-bound mean 38.5%, dispersion ratios, thresholds)
  and checks every closed-form conditional loss against adaptive quadrature
  of its defining mixture integral on a parameter grid.
* ``run_mc_checks`` -- seeded: Kolmogorov-Smirnov agreement of the R-bound
  law with simulation, count- and loss-correlation targets of the
  common-shock simulators, and cross-sectional portfolio means against every
  closed form at one million cells.

Each check returns a :class:`CheckResult`; a band is always [lo, hi] and the
check passes when the value falls inside it.  MC bands are four standard
errors wide, with the standard error taken from the exact population moments
where they are available in closed form and from the sample otherwise.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad

from . import asrf, calibration, correlation, mcsim
from .numerics import factor_quantile, integrate_gaussian_weighted

__all__ = ["CheckResult", "run_analytic_checks", "run_mc_checks", "run_checks"]


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one verification band."""

    name: str
    value: float
    lo: float
    hi: float
    passed: bool
    target: float = float("nan")
    se: float = float("nan")
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _band(name, value, lo, hi, target=float("nan"), se=float("nan"), detail="") -> CheckResult:
    return CheckResult(name=name, value=float(value), lo=float(lo), hi=float(hi),
                       passed=bool(lo <= value <= hi), target=float(target),
                       se=float(se), detail=detail)


def _within(name, value, target, tol, se=float("nan"), detail="") -> CheckResult:
    return _band(name, value, target - tol, target + tol, target=target, se=se, detail=detail)


# ---------------------------------------------------------------------------
# analytic suite
# ---------------------------------------------------------------------------

_GRID_F = (-5.0, -3.090232306167813, -1.0, 0.0, 1.0)
_GRID_SIGMA = (0.5, 1.07, 2.0)
_GRID_RHO = (0.05, 0.1, 0.3)
_GRID_V = (0.0, 0.03, 0.18)
_GRID_W = (0.0, 0.0044, 0.01)


def _quadrature_equivalence() -> float:
    """Worst relative disagreement between closed forms and quadrature."""
    worst = 0.0
    for f in _GRID_F:
        for s in _GRID_SIGMA:
            for rho in _GRID_RHO:
                model = asrf.HomogeneousModel(s, rho)
                closed = asrf.conditional_loss_homogeneous(model, f)
                sq = math.sqrt(rho)
                oracle = integrate_gaussian_weighted(
                    lambda t, s=s, sq=sq, f=f: math.exp(-s * (sq * f + math.sqrt(1 - sq * sq) * t)))
                worst = max(worst, abs(closed - oracle) / abs(oracle))
                for v in _GRID_V:
                    hmodel = asrf.HeteroSigmaModel(s, v, rho)
                    closed = asrf.conditional_loss_hetero_sigma(hmodel, f)
                    if v == 0.0:
                        oracle = asrf.conditional_loss_homogeneous(model, f)
                    else:
                        sd = math.sqrt(v)
                        oracle = integrate_gaussian_weighted(
                            lambda t, s=s, sd=sd, rho=rho, sq=sq, f=f: math.exp(
                                -(s + sd * t) * sq * f + 0.5 * (1 - rho) * (s + sd * t) ** 2))
                    worst = max(worst, abs(closed - oracle) / abs(oracle))
            beta = math.sqrt(0.1)
            for w in _GRID_W:
                nmodel = asrf.UncertainBetaModel(s, beta, w, "normal")
                closed_n = asrf.conditional_loss_uncertain_beta(nmodel, f)
                if w == 0.0:
                    oracle_n = asrf.conditional_loss_homogeneous(
                        asrf.HomogeneousModel(s, beta * beta), f)
                    worst = max(worst, abs(closed_n - oracle_n) / abs(oracle_n))
                    continue
                sd = math.sqrt(w)
                oracle_n = integrate_gaussian_weighted(
                    lambda t, s=s, b=beta, sd=sd, f=f: math.exp(
                        -(b + sd * t) * s * f + 0.5 * (1 - (b + sd * t) ** 2) * s * s))
                worst = max(worst, abs(closed_n - oracle_n) / abs(oracle_n))

                umodel = asrf.UncertainBetaModel(s, beta, w, "uniform")
                closed_u = asrf.conditional_loss_uncertain_beta(umodel, f)
                half = math.sqrt(3.0 * w)
                oracle_u = asrf.conditional_loss_generic(
                    s, lambda x, half=half: 1.0 / (2.0 * half), f,
                    support=(beta - half, beta + half))
                worst = max(worst, abs(closed_u - oracle_u) / abs(oracle_u))
    return worst


def _calibration_round_trip() -> float:
    """Worst round-trip error of the sigma <-> EV/VaR-ratio inversion."""
    worst = 0.0
    for q in (0.95, 0.975, 0.99, 0.995, 0.999):
        fq = factor_quantile(q)
        for sigma in np.arange(0.0, 4.0001, 0.1):
            sigma = float(sigma)
            ratio = calibration.ev_var_ratio(sigma, q)
            if sigma <= -fq:
                worst = max(worst, abs(
                    calibration.sigma_from_ratio(ratio, q, "minus_root") - sigma))
            if sigma >= -fq:
                worst = max(worst, abs(
                    calibration.sigma_from_ratio(ratio, q, "plus_root") - sigma))
    return worst


def _derivative_sign_change(model: asrf.HeteroSigmaModel, f_star: float) -> float:
    """Locate the sign change of dL/dF around f_star by bisection."""
    h = 1e-4

    def slope(f):
        return (asrf.conditional_loss_hetero_sigma(model, f + h)
                - asrf.conditional_loss_hetero_sigma(model, f - h)) / (2 * h)

    lo, hi = 0.9 * f_star, 1.1 * f_star
    if slope(lo) >= 0 or slope(hi) <= 0:
        return float("nan")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if slope(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def run_analytic_checks() -> list:
    """Deterministic battery: reference figures plus quadrature equivalence."""
    fq = factor_quantile(0.999)
    checks = []

    report = asrf.diversification_index(asrf.HomogeneousModel(1.07, 0.1), 0.999)
    checks.append(_within("di_homogeneous", report.diversification_index,
                          0.175, 0.002, detail="sigma=1.07 rho=0.1 q=0.999"))

    sigma_star = asrf.superadditivity_threshold(0.1, 0.999)
    checks.append(_within("superadditivity_sigma_star", sigma_star, 4.70, 0.01))
    di_star = asrf.diversification_index(
        asrf.HomogeneousModel(sigma_star, 0.1), 0.999).diversification_index
    checks.append(_within("di_at_sigma_star", di_star, 1.0, 1e-10))

    rho_ij = correlation.copula_from_loss_corr(0.04, 1.07, 1.07)
    checks.append(_within("copula_inversion", rho_ij, 0.072, 0.001))
    worst = 0.0
    for lc in (0.005, 0.01, 0.04, 0.1, 0.3):
        for s_i in (0.7, 1.07, 2.0):
            rho = correlation.copula_from_loss_corr(lc, s_i, 1.07)
            back = correlation.loss_corr_from_copula(correlation.CopulaPair(s_i, 1.07, rho))
            worst = max(worst, abs(back - lc))
    checks.append(_band("copula_round_trip", worst, 0.0, 1e-12))

    law = correlation.RBoundLaw(2.35)
    checks.append(_within("r_bound_mean", correlation.r_bound_mean(law), 0.385, 0.001))
    mass, _ = quad(lambda r: correlation.r_bound_pdf(r, law), 1e-300, 1.0,
                   epsabs=1e-12, epsrel=1e-12, limit=500)
    checks.append(_within("r_bound_pdf_normalization", mass, 1.0, 1e-8))
    mean_quad, _ = quad(lambda r: r * correlation.r_bound_pdf(r, law), 1e-300, 1.0,
                        epsabs=1e-13, epsrel=1e-13, limit=500)
    checks.append(_within("r_bound_mean_vs_quadrature",
                          correlation.r_bound_mean(law) - mean_quad, 0.0, 1e-8))

    checks.append(_within("loss_corr_transfer",
                          correlation.loss_corr_from_freq_corr(0.385, 1.5, 1.5),
                          0.0406, 0.0005))

    base = asrf.conditional_loss_homogeneous(asrf.HomogeneousModel(1.07, 0.1), fq)
    for v in (0.1764, 0.18):
        ratio = asrf.conditional_loss_hetero_sigma(
            asrf.HeteroSigmaModel(1.07, v, 0.1), fq) / base
        checks.append(_band(f"hetero_capital_ratio_v{v}", ratio, 1.60, 1.65))
    rho_shift = (asrf.conditional_loss_hetero_sigma(asrf.HeteroSigmaModel(1.07, 0.1764, 0.2), fq)
                 / asrf.conditional_loss_hetero_sigma(asrf.HeteroSigmaModel(1.07, 0.1764, 0.1), fq))
    checks.append(_band("rho_shift_capital_ratio", rho_shift, 1.60, 1.65))

    beta = math.sqrt(0.1)
    ratio_n = asrf.conditional_loss_uncertain_beta(
        asrf.UncertainBetaModel(1.07, beta, 0.0044, "normal"), fq) / base
    checks.append(_band("uncertain_beta_ratio_normal", ratio_n, 1.01, 1.02))
    base2 = asrf.conditional_loss_homogeneous(asrf.HomogeneousModel(2.0, 0.1), fq)
    ratio2 = asrf.conditional_loss_uncertain_beta(
        asrf.UncertainBetaModel(2.0, beta, 0.0044, "normal"), fq) / base2
    checks.append(_band("uncertain_beta_ratio_sigma2", ratio2, 1.03, 1.06))
    curve = asrf.dispersion_impact_curve("beta", np.linspace(0.0, 0.1, 51))
    gap = max(abs(p.y["ratio_normal"] - p.y["ratio_uniform"]) for p in curve)
    checks.append(_band("normal_uniform_curve_gap", gap, 0.0, 0.005))

    w = correlation.w_from_rho_variance(beta, 0.03 ** 2)
    checks.append(_within("w_from_rho_stdev_3pct", w, 0.0044, 1e-5))
    back = correlation.rho_variance_from_w(beta, w)
    checks.append(_within("w_mapping_round_trip", back - 0.03 ** 2, 0.0, 1e-14))

    f_star = asrf.monotonicity_threshold(1.07, 0.18, 0.1)
    checks.append(_within("monotonicity_threshold", f_star, 18.8, 0.05))
    located = _derivative_sign_change(asrf.HeteroSigmaModel(1.07, 0.18, 0.1), f_star)
    checks.append(_within("monotonicity_sign_change", located, f_star, 1e-4,
                          detail="bisection on the finite-difference slope"))

    checks.append(_band("quadrature_equivalence", _quadrature_equivalence(),
                        0.0, 1e-8, detail="worst relative error over the grid"))
    checks.append(_band("calibration_round_trip", _calibration_round_trip(),
                        0.0, 1e-10, detail="worst |sigma - roundtrip| over the grid"))
    return checks


# ---------------------------------------------------------------------------
# Monte-Carlo suite
# ---------------------------------------------------------------------------

def _mixture_moment_normal(p: float, c: float, mean: float, var: float) -> float:
    """E[exp(p X + c X^2)] for X ~ N(mean, var), valid while 2 c var < 1."""
    if 2.0 * c * var >= 1.0:
        raise ValueError("moment does not exist: 2 c var >= 1")
    u = (p + 2.0 * c * mean) * math.sqrt(var)
    a = c * var
    return math.exp(p * mean + c * mean * mean
                    + 0.5 * u * u / (1.0 - 2.0 * a)) / math.sqrt(1.0 - 2.0 * a)


def _portfolio_mean_check(name, pop, target, second_moment, seed, n_cells=1_000_000):
    cfg = mcsim.SimConfig(n_cells=n_cells, n_scenarios=1, seed=seed)
    res = mcsim.simulate_portfolio(pop, cfg, fixed_factor=factor_quantile(0.999))
    est = float(res.mean_cell_loss[0])
    if second_moment is not None:
        se = math.sqrt(max(second_moment - target * target, 0.0) / n_cells)
    else:
        se = float(res.std_cell_loss[0]) / math.sqrt(n_cells)
    return _within(name, est, target, 4.0 * se, se=se,
                   detail=f"{n_cells} cells at fixed F_q, seed {seed}")


def run_mc_checks(seed: int = 20260808) -> list:
    """Seeded Monte-Carlo battery; bit-reproducible for a given seed."""
    fq = factor_quantile(0.999)
    checks = []

    # R-bound law vs 1e6 simulated draws of exp(-gamma |X| / sqrt(2)).
    gamma = 2.35
    law = correlation.RBoundLaw(gamma)
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 1], dtype=np.uint64)))
    draws = np.exp(-gamma * np.abs(rng.standard_normal(1_000_000)) / math.sqrt(2.0))
    draws.sort()
    n = draws.size
    cdf_vals = np.vectorize(lambda r: correlation.r_bound_cdf(r, law))(draws)
    ks = float(np.max(np.maximum(np.arange(1, n + 1) / n - cdf_vals,
                                 cdf_vals - np.arange(0, n) / n)))
    checks.append(_band("r_bound_ks_distance", ks, 0.0, 0.002,
                        detail="1e6 draws vs closed-form CDF"))

    bp = mcsim.simulate_bivariate_poisson(1.0, 4.0, 1.0, 1_000_000, seed + 2)
    checks.append(_within("bivariate_poisson_corr", bp.corr, 0.5, 4.0 * bp.corr_se,
                          se=bp.corr_se, detail="lambda=(1,4), r=1, 1e6 draws"))

    fit1 = calibration.FrequencySeverityFit("cell-a", 20.0, 0.0, 1.5, 0)
    fit2 = calibration.FrequencySeverityFit("cell-b", 20.0, 0.0, 1.5, 0)
    lda = mcsim.simulate_compound_lda(fit1, fit2, 7.7, 1_000_000, seed + 3)
    target = correlation.loss_corr_from_freq_corr(0.385, 1.5, 1.5)
    checks.append(_within("compound_lda_loss_corr", lda.loss_corr, target,
                          4.0 * lda.loss_corr_se, se=lda.loss_corr_se,
                          detail="lambda=20, r=7.7, s=1.5, 1e6 years"))

    beta = math.sqrt(0.1)
    hom = asrf.HomogeneousModel(1.07, 0.1)
    target = asrf.conditional_loss_homogeneous(hom, fq)
    m2 = math.exp(-2 * 1.07 * beta * fq + 2 * 1.07 ** 2 * (1 - 0.1))
    checks.append(_portfolio_mean_check(
        "portfolio_mean_homogeneous",
        mcsim.PopulationSpec(sigma=1.07, beta=beta), target, m2, seed + 4))

    het = asrf.HeteroSigmaModel(1.07, 0.1764, 0.1)
    target = asrf.conditional_loss_hetero_sigma(het, fq)
    m2 = _mixture_moment_normal(-2.0 * math.sqrt(0.1) * fq, 2.0 * (1 - 0.1), 1.07, 0.1764)
    checks.append(_portfolio_mean_check(
        "portfolio_mean_hetero_sigma",
        mcsim.PopulationSpec(sigma=1.07, beta=beta, sigma_var=0.1764), target, m2, seed + 5))

    unb = asrf.UncertainBetaModel(1.07, beta, 0.0044, "normal")
    target = asrf.conditional_loss_uncertain_beta(unb, fq)
    m2 = math.exp(2 * 1.07 ** 2) * _mixture_moment_normal(
        -2.0 * 1.07 * fq, -2.0 * 1.07 ** 2, beta, 0.0044)
    checks.append(_portfolio_mean_check(
        "portfolio_mean_uncertain_beta_normal",
        mcsim.PopulationSpec(sigma=1.07, beta=beta, beta_var=0.0044, beta_law="normal"),
        target, m2, seed + 6))

    unu = asrf.UncertainBetaModel(1.07, beta, 0.0044, "uniform")
    target = asrf.conditional_loss_uncertain_beta(unu, fq)
    half = math.sqrt(3.0 * 0.0044)
    m2_int, _ = quad(lambda b: math.exp(-2 * 1.07 * b * fq + 2 * 1.07 ** 2 * (1 - b * b))
                     / (2 * half), beta - half, beta + half,
                     epsabs=1e-12, epsrel=1e-12)
    checks.append(_portfolio_mean_check(
        "portfolio_mean_uncertain_beta_uniform",
        mcsim.PopulationSpec(sigma=1.07, beta=beta, beta_var=0.0044, beta_law="uniform"),
        target, m2_int, seed + 7))

    return checks


def run_checks(suite: str = "all", seed: int = 20260808) -> list:
    """Run the requested suite(s); suite is one of analytic, mc, all."""
    if suite not in ("analytic", "mc", "all"):
        raise ValueError(f"unknown suite {suite!r}")
    checks = []
    if suite in ("analytic", "all"):
        checks.extend(run_analytic_checks())
    if suite in ("mc", "all"):
        checks.extend(run_mc_checks(seed))
    return checks
