"""
Monte-Carlo oracles for the analytic results.

Three simulators, all reproducible to the bit from a 64-bit seed:

* ``simulate_portfolio`` -- finite-N one-factor portfolios with optional
  dispersion in cell risk and factor loading, conditioned on a fixed factor
  value or drawing the factor per scenario.  The cross-sectional mean of a
  big portfolio at fixed F is the estimator that must agree with the
  closed-form conditional losses.
* ``simulate_bivariate_poisson`` -- common-shock Poisson count pairs whose
  empirical correlation targets r / sqrt(lambda1 lambda2).
* ``simulate_compound_lda`` -- full compound-Poisson annual losses on two
  cells with correlated counts and independent lognormal severities, the
  oracle for the frequency-to-loss correlation transfer.

Randomness contract: scenario i draws from a counter-based Philox stream
keyed by (seed, i), so every scenario's stream is a pure function of the
seed and the scenario index, with no sequential dependence between
scenarios.  Results are therefore independent of any evaluation order or
parallelism.  Within a scenario the draw order is: factor (when random),
cell sigmas (when dispersed), cell loadings (when random), specific factors.

Loading draws with |B| > 1 under the normal law (which would make
sqrt(1 - B^2) undefined) are rejected and redrawn; the rejection count is
reported so the induced bias can be bounded (the rejection probability is
below 1e-20 at the parameter scales of interest).  Negative sigma draws are
kept, matching the analytic treatment.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .calibration import FrequencySeverityFit, LossEvent
from .correlation import FrequencyPair

__all__ = [
    "SimConfig",
    "PopulationSpec",
    "ScenarioResult",
    "SimulationResult",
    "BivariatePoissonResult",
    "CompoundLdaResult",
    "SimulationWarning",
    "simulate_portfolio",
    "portfolio_quantile",
    "simulate_bivariate_poisson",
    "simulate_compound_lda",
    "empirical_quantile",
    "empirical_corr",
    "pearson_corr_se",
    "generate_loss_events",
]


class SimulationWarning(UserWarning):
    """A simulation was configured below its recommended resolution."""


def _stream(seed: int, index: int) -> np.random.Generator:
    # Counter-based stream: a pure function of (seed, index).
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SimConfig:
    """Scenario count, portfolio size, seed and the antithetic switch."""

    n_cells: int
    n_scenarios: int
    seed: int
    antithetic: bool = False

    def __post_init__(self):
        if self.n_cells < 1 or self.n_scenarios < 1:
            raise ValueError("n_cells and n_scenarios must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class PopulationSpec:
    """Cross-sectional laws of the cell parameters.

    sigma is constant when sigma_var = 0, otherwise normal(sigma, sigma_var).
    The loading law is "constant" (B = beta), "normal" (mean beta, variance
    beta_var, |B| > 1 draws rejected) or "uniform" (beta +/- sqrt(3 beta_var)).
    mu shifts every cell's log-loss and defaults to 0.
    """

    sigma: float
    beta: float
    sigma_var: float = 0.0
    beta_var: float = 0.0
    beta_law: str = "constant"
    mu: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be strictly positive")
        if self.sigma_var < 0 or self.beta_var < 0:
            raise ValueError("variances must be nonnegative")
        if self.beta_law not in ("constant", "normal", "uniform"):
            raise ValueError(f"unknown beta law {self.beta_law!r}")
        if self.beta_law == "constant":
            if self.beta_var != 0.0:
                raise ValueError("constant beta law requires beta_var = 0")
            if not 0.0 <= self.beta <= 1.0:
                raise ValueError("constant beta must lie in [0, 1]")
        else:
            if not -1.0 <= self.beta <= 1.0:
                raise ValueError("beta mean must lie in [-1, 1]")
        if self.beta_law == "uniform" and self.beta_var > 0:
            half = math.sqrt(3.0 * self.beta_var)
            if abs(self.beta) + half > 1.0:
                raise ValueError(
                    "uniform loading bounds escape [-1, 1]; the simulator "
                    "cannot evaluate sqrt(1 - B^2) outside that range")
        if not math.isfinite(self.mu):
            raise ValueError("mu must be finite")


@dataclass(frozen=True)
class ScenarioResult:
    """One scenario: factor draw, cross-sectional loss mean and its spread."""

    factor: float
    mean_cell_loss: float
    std_cell_loss: float
    stream: tuple


@dataclass(frozen=True)
class SimulationResult:
    """Arrays over scenarios plus provenance; iterate for ScenarioResult views."""

    factor: np.ndarray
    mean_cell_loss: np.ndarray
    std_cell_loss: np.ndarray
    n_cells: int
    seed: int
    beta_rejections: int

    def __len__(self):
        return self.mean_cell_loss.size

    def scenario(self, i: int) -> ScenarioResult:
        return ScenarioResult(
            factor=float(self.factor[i]),
            mean_cell_loss=float(self.mean_cell_loss[i]),
            std_cell_loss=float(self.std_cell_loss[i]),
            stream=(self.seed, i),
        )

    def scenarios(self):
        return (self.scenario(i) for i in range(len(self)))


def _mirrored_normal(rng: np.random.Generator, n: int, antithetic: bool) -> np.ndarray:
    if not antithetic:
        return rng.standard_normal(n)
    half = (n + 1) // 2
    z = rng.standard_normal(half)
    return np.concatenate([z, -z])[:n]


def _mirrored_uniform(rng: np.random.Generator, n: int, antithetic: bool) -> np.ndarray:
    if not antithetic:
        return rng.random(n)
    half = (n + 1) // 2
    u = rng.random(half)
    return np.concatenate([u, 1.0 - u])[:n]


def _draw_betas(pop: PopulationSpec, rng: np.random.Generator, n: int,
                antithetic: bool) -> tuple:
    """Loading draws plus the count of rejected |B| > 1 normals."""
    if pop.beta_law == "constant" or pop.beta_var == 0.0:
        return np.full(n, pop.beta), 0
    if pop.beta_law == "uniform":
        half = math.sqrt(3.0 * pop.beta_var)
        u = _mirrored_uniform(rng, n, antithetic)
        return pop.beta + half * (2.0 * u - 1.0), 0
    sd = math.sqrt(pop.beta_var)
    b = pop.beta + sd * _mirrored_normal(rng, n, antithetic)
    rejected = 0
    bad = np.abs(b) > 1.0
    while np.any(bad):
        rejected += int(bad.sum())
        b[bad] = pop.beta + sd * rng.standard_normal(int(bad.sum()))
        bad = np.abs(b) > 1.0
    return b, rejected


def simulate_portfolio(pop: PopulationSpec, cfg: SimConfig,
                       fixed_factor: Optional[float] = None) -> SimulationResult:
    """Cross-sectional loss means of a finite one-factor portfolio.

    Each scenario draws its own cell population (sigmas, loadings, specific
    factors) from the scenario's keyed stream and reports the mean and
    standard deviation of the cell losses.  ``fixed_factor`` conditions every
    scenario on that factor value; otherwise the factor is drawn standard
    normal per scenario.
    """
    if fixed_factor is not None and not math.isfinite(fixed_factor):
        raise ValueError("fixed_factor must be finite")
    n = cfg.n_cells
    factors = np.empty(cfg.n_scenarios)
    means = np.empty(cfg.n_scenarios)
    stds = np.empty(cfg.n_scenarios)
    rejections = 0
    sigma_sd = math.sqrt(pop.sigma_var) if pop.sigma_var > 0 else 0.0

    for i in range(cfg.n_scenarios):
        rng = _stream(cfg.seed, i)
        f = rng.standard_normal() if fixed_factor is None else fixed_factor
        if sigma_sd > 0:
            sig = pop.sigma + sigma_sd * _mirrored_normal(rng, n, cfg.antithetic)
        else:
            sig = pop.sigma
        betas, rej = _draw_betas(pop, rng, n, cfg.antithetic)
        rejections += rej
        eps = _mirrored_normal(rng, n, cfg.antithetic)
        losses = np.exp(pop.mu - sig * (betas * f + np.sqrt(1.0 - betas * betas) * eps))
        factors[i] = f
        means[i] = losses.mean()
        stds[i] = losses.std(ddof=1) if n > 1 else 0.0

    return SimulationResult(factor=factors, mean_cell_loss=means,
                            std_cell_loss=stds, n_cells=n, seed=cfg.seed,
                            beta_rejections=rejections)


def portfolio_quantile(pop: PopulationSpec, cfg: SimConfig, q: float) -> float:
    """Empirical q-quantile of the per-scenario mean loss under a random factor.

    For large portfolios this converges to the closed-form L(F_q) because
    the conditional loss is monotone in the factor.  Warns when the scenario
    count is below the 10 / (1 - q) rule of thumb for tail estimation.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    recommended = 10.0 / (1.0 - q)
    if cfg.n_scenarios < recommended:
        warnings.warn(
            f"{cfg.n_scenarios} scenarios is below the recommended "
            f"{recommended:.0f} for q = {q}; the tail estimate will be noisy",
            SimulationWarning, stacklevel=2)
    result = simulate_portfolio(pop, cfg, fixed_factor=None)
    return empirical_quantile(result.mean_cell_loss, q)


@dataclass(frozen=True)
class BivariatePoissonResult:
    """Common-shock count pairs with their empirical correlation."""

    counts1: np.ndarray
    counts2: np.ndarray
    corr: float
    corr_se: float
    seed: int


def simulate_bivariate_poisson(lambda1: float, lambda2: float, r: float,
                               n_draws: int, seed: int) -> BivariatePoissonResult:
    """Draw correlated Poisson counts N_i = Z + Y_i from the common shock Z.

    Marginals are Poisson(lambda_i); the count correlation targets
    r / sqrt(lambda1 lambda2).
    """
    pair = FrequencyPair(lambda1, lambda2, r)  # validates the invariants
    if n_draws < 2:
        raise ValueError("n_draws must be at least 2")
    rng = _stream(seed, 0)
    z = rng.poisson(pair.r, n_draws)
    y1 = rng.poisson(pair.lambda1 - pair.r, n_draws)
    y2 = rng.poisson(pair.lambda2 - pair.r, n_draws)
    counts1 = z + y1
    counts2 = z + y2
    c1 = counts1.astype(float)
    c2 = counts2.astype(float)
    return BivariatePoissonResult(
        counts1=counts1, counts2=counts2,
        corr=empirical_corr(c1, c2),
        corr_se=pearson_corr_se(c1, c2),
        seed=seed,
    )


@dataclass(frozen=True)
class CompoundLdaResult:
    """Paired annual losses with empirical frequency and loss correlations."""

    losses1: np.ndarray
    losses2: np.ndarray
    loss_corr: float
    loss_corr_se: float
    freq_corr: float
    seed: int


def simulate_compound_lda(fit1: FrequencySeverityFit, fit2: FrequencySeverityFit,
                          r: float, n_years: int, seed: int) -> CompoundLdaResult:
    """Simulate two cells' annual losses with common-shock counts.

    Counts come from the trivariate reduction at intensity r; severities are
    independent lognormals LN(m_i, s_i).  The empirical loss correlation is
    the oracle for corr(N) * exp(-s1^2/2 - s2^2/2).
    """
    pair = FrequencyPair(fit1.lam, fit2.lam, r)
    if n_years < 2:
        raise ValueError("n_years must be at least 2")
    rng = _stream(seed, 0)
    z = rng.poisson(pair.r, n_years)
    y1 = rng.poisson(pair.lambda1 - pair.r, n_years)
    y2 = rng.poisson(pair.lambda2 - pair.r, n_years)
    counts1 = z + y1
    counts2 = z + y2

    def annual(counts, fit):
        sev = rng.lognormal(fit.m, fit.s, int(counts.sum()))
        return np.bincount(np.repeat(np.arange(n_years), counts),
                           weights=sev, minlength=n_years)

    losses1 = annual(counts1, fit1)
    losses2 = annual(counts2, fit2)
    return CompoundLdaResult(
        losses1=losses1, losses2=losses2,
        loss_corr=empirical_corr(losses1, losses2),
        loss_corr_se=pearson_corr_se(losses1, losses2),
        freq_corr=empirical_corr(counts1.astype(float), counts2.astype(float)),
        seed=seed,
    )


def empirical_quantile(samples, q: float) -> float:
    """Order statistic at ceil(q n), 1-based -- the calibration VaR convention."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot take a quantile of an empty sample")
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    k = math.ceil(q * arr.size)
    return float(np.partition(arr, k - 1)[k - 1])


def empirical_corr(x, y) -> float:
    """Pearson correlation; rejects empty, mismatched or zero-variance input."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.size == 0 or xa.shape != ya.shape:
        raise ValueError("correlation needs two equally sized nonempty samples")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    vx = float(np.mean(dx * dx))
    vy = float(np.mean(dy * dy))
    if vx == 0.0 or vy == 0.0:
        raise ValueError("correlation is undefined for zero-variance samples")
    return float(np.mean(dx * dy)) / math.sqrt(vx * vy)


def pearson_corr_se(x, y) -> float:
    """Delta-method standard error of the Pearson correlation.

    Plug-in asymptotic variance from sample central moments up to fourth
    order; reduces to (1 - rho^2)/sqrt(n) for bivariate normal data and to
    1/sqrt(n) for independent samples.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    n = xa.size
    if n < 4 or xa.shape != ya.shape:
        raise ValueError("need at least 4 paired observations")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    mu20 = float(np.mean(dx ** 2))
    mu02 = float(np.mean(dy ** 2))
    mu11 = float(np.mean(dx * dy))
    if mu20 == 0.0 or mu02 == 0.0:
        raise ValueError("standard error is undefined for zero-variance samples")
    mu22 = float(np.mean(dx ** 2 * dy ** 2))
    mu31 = float(np.mean(dx ** 3 * dy))
    mu13 = float(np.mean(dx * dy ** 3))
    mu40 = float(np.mean(dx ** 4))
    mu04 = float(np.mean(dy ** 4))
    rho = mu11 / math.sqrt(mu20 * mu02)
    var_n = ((mu22 - mu11 ** 2) / (mu20 * mu02)
             + 0.25 * rho ** 2 * ((mu40 - mu20 ** 2) / mu20 ** 2
                                  + (mu04 - mu02 ** 2) / mu02 ** 2
                                  + 2.0 * (mu22 - mu20 * mu02) / (mu20 * mu02))
             - rho * ((mu31 - mu11 * mu20) / (mu20 * math.sqrt(mu20 * mu02))
                      + (mu13 - mu11 * mu02) / (mu02 * math.sqrt(mu20 * mu02))))
    return math.sqrt(max(var_n, 0.0) / n)


def generate_loss_events(fits, window_years: int, seed: int,
                         start_year: int = 2001) -> list:
    """Synthetic loss-event records from per-cell compound-Poisson laws.

    Each cell gets its own keyed stream, so adding or removing cells leaves
    the other cells' events unchanged.  Useful for end-to-end calibration
    round trips; returns :class:`~opriskcap.calibration.LossEvent` rows.
    """
    if window_years < 1:
        raise ValueError("window_years must be a positive integer")
    events = []
    for j, fit in enumerate(fits):
        rng = _stream(seed, j)
        counts = rng.poisson(fit.lam, window_years)
        for offset, count in enumerate(counts):
            amounts = rng.lognormal(fit.m, fit.s, int(count))
            year = start_year + offset
            events.extend(
                LossEvent(cell_id=fit.cell_id, year=year, amount=float(a))
                for a in amounts)
    return events
