"""
Per-cell frequency/severity fitting and the implied aggregate-loss sigma.

When a cell's annual loss is approximately lognormal with parameters
(mu_cell, sigma_cell), the ratio of its expected value to any tail quantile
depends on sigma_cell alone:

    EV / VaR_q = exp(sigma^2 / 2 + sigma F_q),      F_q = norm_inv(1 - q) < 0

Inverting the quadratic in sigma yields two roots; the minus-root

    sigma = -F_q - sqrt(F_q^2 + 2 ln(EV / VaR_q))

is the one that decreases with the ratio and is used for calibration.  The
plus-root corresponds to broader distribution assumptions and is kept
addressable.

The pipeline: fit per-cell Poisson intensity and lognormal severity from
loss events, simulate the compound-Poisson annual loss, measure the
empirical EV/VaR ratio and invert it to the cell's implied sigma.  A
population of implied sigmas is then summarized by mean, standard deviation,
median and the med-med dispersion estimator.
"""

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .numerics import factor_quantile

__all__ = [
    "LossEvent",
    "FrequencySeverityFit",
    "AggregateSigma",
    "SigmaSummary",
    "LogIntensityModel",
    "InfeasibleRatioError",
    "LossDataError",
    "ev_var_ratio",
    "sigma_from_ratio",
    "fit_frequency_severity",
    "implied_aggregate_sigma",
    "summarize_sigmas",
    "estimate_gamma",
    "load_loss_events",
]


class InfeasibleRatioError(ValueError):
    """The EV/VaR ratio is inconsistent with a lognormal annual loss at q."""


class LossDataError(ValueError):
    """Loss-event input rows failed validation; carries offending line numbers."""

    def __init__(self, message, lines=()):
        super().__init__(message)
        self.lines = tuple(lines)


@dataclass(frozen=True)
class LossEvent:
    """A single loss: owning cell, calendar year, positive amount."""

    cell_id: str
    year: int
    amount: float

    def __post_init__(self):
        if not (math.isfinite(self.amount) and self.amount > 0):
            raise ValueError(f"loss amount must be strictly positive, got {self.amount!r}")


@dataclass(frozen=True)
class FrequencySeverityFit:
    """Compound-Poisson parameters of one cell.

    lam is the Poisson intensity (events/year); (m, s) are the lognormal
    severity log-location and log-scale.  s = 0 marks a degenerate severity
    (all observed amounts equal) and is rejected by consumers that need
    severity dispersion.
    """

    cell_id: str
    lam: float
    m: float
    s: float
    n_events: int

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be strictly positive")
        if self.s < 0:
            raise ValueError("s must be nonnegative")
        if self.n_events < 0:
            raise ValueError("n_events must be nonnegative")


@dataclass(frozen=True)
class AggregateSigma:
    """Implied aggregate-loss sigma of one cell at confidence q, with provenance."""

    cell_id: str
    q: float
    sigma: float
    branch: Literal["minus_root", "plus_root"]
    ratio: float
    seed: int
    n_scenarios: int


@dataclass(frozen=True)
class SigmaSummary:
    """Population summary of implied sigmas: mean, stdev, median, med-med."""

    mean: float
    stdev: float
    median: float
    medmed: float
    count: int


@dataclass(frozen=True)
class LogIntensityModel:
    """Normal model of log-intensities: ln(lambda) ~ N(alpha, gamma^2).

    The estimate also carries the sample skewness and excess kurtosis of
    ln(lambda) as normality diagnostics (both near zero for normal data).
    gamma = 0 can occur for degenerate samples; consumers that need
    dispersion (the R-bound law) require gamma > 0.
    """

    alpha: float
    gamma: float
    skewness: float = float("nan")
    excess_kurtosis: float = float("nan")

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


def _check_tail_level(q: float):
    if not 0.5 < q < 1.0:
        raise ValueError(f"confidence level must be a tail level in (0.5, 1), got {q!r}")


def ev_var_ratio(sigma: float, q: float) -> float:
    """Expected value over VaR_q of a lognormal loss with log-scale sigma.

    exp(sigma^2/2 + sigma F_q); equals 1 at sigma = 0 and decreases in sigma
    on [0, -F_q].
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    _check_tail_level(q)
    fq = factor_quantile(q)
    return math.exp(0.5 * sigma * sigma + sigma * fq)


def sigma_from_ratio(ratio: float, q: float,
                     branch: Literal["minus_root", "plus_root"] = "minus_root") -> float:
    """Invert :func:`ev_var_ratio` for sigma.

    The two roots are -F_q -/+ sqrt(F_q^2 + 2 ln ratio); they sum to -2 F_q.
    The minus_root decreases with the ratio and is the calibration choice;
    the plus_root models broader distribution assumptions.  A negative
    discriminant means no lognormal is consistent with the ratio at this q
    and raises :class:`InfeasibleRatioError`.

    Ratios above 1 (the mean beyond the q-quantile) can only come from the
    broad branch: they are accepted for plus_root, where the root is still a
    valid sigma, and rejected for minus_root, where it would be negative.
    """
    _check_tail_level(q)
    if not ratio > 0.0:
        raise ValueError(f"EV/VaR ratio must be strictly positive, got {ratio!r}")
    if branch not in ("minus_root", "plus_root"):
        raise ValueError(f"unknown branch {branch!r}")
    if ratio > 1.0 and branch == "minus_root":
        raise ValueError(
            f"EV/VaR ratio {ratio!r} exceeds 1: the decreasing (minus_root) "
            "branch has no nonnegative solution; use plus_root")
    fq = factor_quantile(q)
    disc = fq * fq + 2.0 * math.log(ratio)
    if disc < 0.0:
        raise InfeasibleRatioError(
            f"ratio {ratio} is below exp(-F_q^2/2) = {math.exp(-0.5 * fq * fq):.6g}: "
            f"no lognormal sigma matches it at q = {q}")
    root = math.sqrt(disc)
    return -fq - root if branch == "minus_root" else -fq + root


def fit_frequency_severity(events: Iterable[LossEvent], cell_id: str,
                           window_years: int) -> FrequencySeverityFit:
    """Poisson/lognormal fit of one cell from its loss events.

    lam is the event count divided by the declared observation window (the
    window is an input, not inferred from the data).  (m, s) are the sample
    mean and unbiased standard deviation of log amounts; on log data the
    moment and maximum-likelihood estimators coincide for the lognormal.
    """
    if window_years < 1:
        raise ValueError("window_years must be a positive integer")
    amounts = [e.amount for e in events if e.cell_id == cell_id]
    if len(amounts) < 2:
        raise ValueError(
            f"cell {cell_id!r} has {len(amounts)} event(s); at least 2 are needed "
            "to estimate the severity dispersion")
    if any(a <= 0 for a in amounts):
        raise ValueError(f"cell {cell_id!r} contains non-positive amounts")
    logs = np.log(amounts)
    return FrequencySeverityFit(
        cell_id=cell_id,
        lam=len(amounts) / window_years,
        m=float(np.mean(logs)),
        s=float(np.std(logs, ddof=1)),
        n_events=len(amounts),
    )


def _tail_quantile(samples: np.ndarray, q: float) -> float:
    # Order statistic at ceil(q * n), 1-based; the package-wide empirical
    # VaR convention (no interpolation).
    n = samples.size
    k = math.ceil(q * n)
    return float(np.partition(samples, k - 1)[k - 1])


def implied_aggregate_sigma(fit: FrequencySeverityFit, q: float,
                            n_scenarios: int = 200_000,
                            seed: int = 12345) -> AggregateSigma:
    """Implied lognormal sigma of a cell's annual loss at confidence q.

    Simulates ``n_scenarios`` compound-Poisson years from the fit (an
    isolated generator stream per call, reproducible from the seed), measures
    the empirical EV / VaR_q ratio with the ceil(q n) order-statistic
    convention, and inverts the minus-root branch.  At q = 99.9% use 1e5
    scenarios or more.

    Raises :class:`InfeasibleRatioError` when the empirical VaR is zero
    (intensity too small for the requested tail) or when the ratio cannot
    come from a lognormal annual loss.
    """
    _check_tail_level(q)
    if n_scenarios < 1:
        raise ValueError("n_scenarios must be positive")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(fit.lam, n_scenarios)
    severities = rng.lognormal(fit.m, fit.s, int(counts.sum()))
    annual = np.bincount(np.repeat(np.arange(n_scenarios), counts),
                         weights=severities, minlength=n_scenarios)
    ev = float(annual.mean())
    var_q = _tail_quantile(annual, q)
    if var_q <= 0.0:
        raise InfeasibleRatioError(
            f"empirical VaR at q = {q} is zero for cell {fit.cell_id!r} "
            f"(lam = {fit.lam}); the tail is not reached")
    ratio = ev / var_q
    if ratio > 1.0:
        raise InfeasibleRatioError(
            f"empirical EV/VaR = {ratio:.6g} exceeds 1 for cell {fit.cell_id!r}: "
            "the annual loss is too heavy-tailed for a lognormal fit at this q")
    sigma = sigma_from_ratio(ratio, q, "minus_root")
    return AggregateSigma(cell_id=fit.cell_id, q=q, sigma=sigma,
                          branch="minus_root", ratio=ratio,
                          seed=seed, n_scenarios=n_scenarios)


def summarize_sigmas(values: Sequence[float]) -> SigmaSummary:
    """Mean, unbiased stdev, median and med-med of a sigma population.

    med-med is the median absolute deviation from the median, a robust
    dispersion measure.  The stdev of a single value is 0 by convention.
    """
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty sigma population")
    med = float(np.median(arr))
    return SigmaSummary(
        mean=float(arr.mean()),
        stdev=float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0,
        median=med,
        medmed=float(np.median(np.abs(arr - med))),
        count=int(arr.size),
    )


def estimate_gamma(lambdas: Sequence[float]) -> LogIntensityModel:
    """Normal fit of log-intensities across cells.

    alpha and gamma are the sample mean and unbiased standard deviation of
    ln(lambda); skewness and excess kurtosis of ln(lambda) are reported as
    normality diagnostics.
    """
    arr = np.asarray(list(lambdas), dtype=float)
    if arr.size < 2:
        raise ValueError("at least 2 intensities are needed to estimate gamma")
    if np.any(arr <= 0):
        raise ValueError("intensities must be strictly positive")
    logs = np.log(arr)
    centered = logs - logs.mean()
    m2 = float(np.mean(centered ** 2))
    if m2 == 0.0:
        skew, exkurt = 0.0, 0.0
    else:
        skew = float(np.mean(centered ** 3)) / m2 ** 1.5
        exkurt = float(np.mean(centered ** 4)) / m2 ** 2 - 3.0
    return LogIntensityModel(
        alpha=float(logs.mean()),
        gamma=float(np.std(logs, ddof=1)),
        skewness=skew,
        excess_kurtosis=exkurt,
    )


_CSV_HEADER = ["cell_id", "year", "amount"]


def load_loss_events(path) -> list:
    """Read loss events from a CSV file with header ``cell_id,year,amount``.

    UTF-8; amounts must be positive decimals.  Any malformed row (wrong field
    count, unparsable year/amount, amount <= 0) fails the load with a
    :class:`LossDataError` listing the offending 1-based line numbers, so a
    capital run never silently drops data.
    """
    events = []
    bad_lines = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LossDataError(f"{path}: empty file, expected header {_CSV_HEADER}")
        if [h.strip() for h in header] != _CSV_HEADER:
            raise LossDataError(
                f"{path}: bad header {header!r}, expected {_CSV_HEADER}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != 3:
                bad_lines.append(lineno)
                continue
            cell_id, year_s, amount_s = (f.strip() for f in row)
            try:
                year = int(year_s)
                amount = float(amount_s)
            except ValueError:
                bad_lines.append(lineno)
                continue
            if not (cell_id and math.isfinite(amount) and amount > 0):
                bad_lines.append(lineno)
                continue
            events.append(LossEvent(cell_id=cell_id, year=year, amount=amount))
    if bad_lines:
        shown = ", ".join(str(n) for n in bad_lines[:20])
        more = "" if len(bad_lines) <= 20 else f" (+{len(bad_lines) - 20} more)"
        raise LossDataError(
            f"{path}: {len(bad_lines)} malformed row(s) at line(s) {shown}{more}",
            lines=bad_lines)
    return events
