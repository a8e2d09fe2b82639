"""
Command-line front end.

Subcommands:

* ``calibrate`` -- per-cell frequency/severity fits and implied sigmas from a
  loss-event CSV; writes ``cells.csv`` and ``summary.csv``.
* ``capital``   -- conditional loss, stand-alone expectation, diversification
  index and the structural thresholds for one model configuration.
* ``figures``   -- the data behind the three reference curves (R-bound
  density, DI against sqrt(v), capital ratio against sqrt(w)) as CSV.
* ``verify``    -- the analytic and Monte-Carlo verification batteries;
  exits nonzero if any band fails.
* ``corr``      -- correlation-algebra utilities (count correlation and its
  bound, loss-correlation transfer, R-bound law, copula mapping, w mapping).

Every command accepts ``--config FILE`` with a JSON parameter block; explicit
flags override config values.  All numeric output uses 17 significant digits
so files round-trip exactly, and reruns with the same inputs are
byte-identical.  Exit codes: 0 success, 1 validation error, 2 verification
failure, 3 I/O error.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import asrf, calibration, correlation, verification
from .numerics import factor_quantile

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFY_FAILED = 2
EXIT_IO = 3

_DEFAULT_Q_LIST = (0.95, 0.975, 0.99, 0.995, 0.999)


def _fmt(x) -> str:
    """17-significant-digit, round-trippable rendering of a float."""
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def _dump_json(payload, path=None):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is None or path == "-":
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; remap to the validation code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _load_config(path):
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return cfg


def _pick(args, cfg, key, default=None):
    """Flag value if given, else config value, else default."""
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    return cfg.get(key, default)


def _q_label(q: float) -> str:
    # 0.95 -> "95", 0.975 -> "975", 0.999 -> "999"
    return format(q * 100, "g").replace(".", "")


# ---------------------------------------------------------------------------
# calibrate
# ---------------------------------------------------------------------------

def cmd_calibrate(args) -> int:
    cfg = _load_config(args.config)
    window_years = _pick(args, cfg, "window_years")
    if window_years is None:
        raise ValueError("the observation window is required (--window-years or config)")
    window_years = int(window_years)
    q_list = _pick(args, cfg, "q_list", list(_DEFAULT_Q_LIST))
    if isinstance(q_list, str):
        q_list = [float(tok) for tok in q_list.split(",") if tok.strip()]
    q_list = [float(q) for q in q_list]
    min_events = int(_pick(args, cfg, "min_events", 30))
    n_scenarios = int(_pick(args, cfg, "scenarios", 200_000))
    seed = int(_pick(args, cfg, "seed", 42))
    out_dir = _pick(args, cfg, "out_dir", ".")

    events = calibration.load_loss_events(args.events_csv)
    if not events:
        raise calibration.LossDataError(f"{args.events_csv}: no loss events")
    cell_ids = sorted({e.cell_id for e in events})

    fits = []
    for cell_id in cell_ids:
        count = sum(1 for e in events if e.cell_id == cell_id)
        if count < min_events:
            print(f"notice: cell {cell_id!r} has {count} events "
                  f"(< {min_events}); excluded", file=sys.stderr)
            continue
        fits.append(calibration.fit_frequency_severity(events, cell_id, window_years))

    if not fits:
        raise ValueError(f"no cell reaches the {min_events}-event floor")

    sigma_cols = [f"sigma_q{_q_label(q)}" for q in q_list]
    rows = []
    sigmas_per_q = {q: [] for q in q_list}
    for idx, fit in enumerate(fits):
        row = {"cell_id": fit.cell_id, "lambda": fit.lam, "m": fit.m, "s": fit.s}
        for q, col in zip(q_list, sigma_cols):
            try:
                agg = calibration.implied_aggregate_sigma(
                    fit, q, n_scenarios=n_scenarios, seed=seed + idx)
                row[col] = agg.sigma
                sigmas_per_q[q].append(agg.sigma)
            except calibration.InfeasibleRatioError as exc:
                print(f"notice: cell {fit.cell_id!r} at q={q}: {exc}", file=sys.stderr)
                row[col] = float("nan")
        rows.append(row)

    cells_path = f"{out_dir}/cells.csv"
    with open(cells_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["cell_id", "lambda", "m", "s"] + sigma_cols) + "\n")
        for row in rows:
            fields = [row["cell_id"], _fmt(row["lambda"]), _fmt(row["m"]), _fmt(row["s"])]
            fields += [_fmt(row[col]) for col in sigma_cols]
            fh.write(",".join(fields) + "\n")

    summary_path = f"{out_dir}/summary.csv"
    pooled = []
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("confidence_level,mean,stdev,median,medmed,count\n")
        for q in q_list:
            values = [s for s in sigmas_per_q[q] if not math.isnan(s)]
            pooled.extend(values)
            if not values:
                continue
            summary = calibration.summarize_sigmas(values)
            fh.write(",".join([format(q, "g"), _fmt(summary.mean), _fmt(summary.stdev),
                               _fmt(summary.median), _fmt(summary.medmed),
                               str(summary.count)]) + "\n")
        if pooled:
            summary = calibration.summarize_sigmas(pooled)
            fh.write(",".join(["All", _fmt(summary.mean), _fmt(summary.stdev),
                               _fmt(summary.median), _fmt(summary.medmed),
                               str(summary.count)]) + "\n")

    print(f"calibrated {len(fits)} cell(s) -> {cells_path}, {summary_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# capital
# ---------------------------------------------------------------------------

def _require(cfg, key, kind):
    if key not in cfg or cfg[key] is None:
        raise ValueError(f"the {kind} model requires {key!r} (flag or config)")
    return float(cfg[key])


def _build_model(kind, cfg):
    if kind == "homogeneous":
        return asrf.HomogeneousModel(sigma=_require(cfg, "sigma", kind),
                                     rho=_require(cfg, "rho", kind))
    if kind == "hetero_sigma":
        return asrf.HeteroSigmaModel(sigma_mean=_require(cfg, "sigma", kind),
                                     sigma_var=_require(cfg, "v", kind),
                                     rho=_require(cfg, "rho", kind))
    if kind == "uncertain_beta":
        return asrf.UncertainBetaModel(sigma=_require(cfg, "sigma", kind),
                                       beta_mean=_require(cfg, "beta", kind),
                                       beta_var=_require(cfg, "w", kind),
                                       law=cfg.get("law", "normal"))
    raise ValueError(f"unknown model family {kind!r}")


def cmd_capital(args) -> int:
    cfg = _load_config(args.config)
    for key in ("model", "sigma", "rho", "v", "beta", "w", "law", "q"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    kind = cfg.get("model")
    if kind is None:
        raise ValueError("a model family is required (--model or config)")
    q = float(cfg.get("q", 0.999))
    model = _build_model(kind, cfg)
    report = asrf.diversification_index(model, q)
    fq = float(factor_quantile(q))

    payload = {
        "model": kind,
        "q": q,
        "f_q": fq,
        "conditional_loss_at_fq": report.conditional_loss_at_fq,
        "stand_alone_expectation": report.stand_alone_expectation,
        "diversification_index": report.diversification_index,
    }
    if kind == "homogeneous":
        payload.update(sigma=model.sigma, rho=model.rho,
                       sigma_star=asrf.superadditivity_threshold(model.rho, q))
    elif kind == "hetero_sigma":
        base = asrf.conditional_loss_homogeneous(
            asrf.HomogeneousModel(model.sigma_mean, model.rho), fq)
        f_star = asrf.monotonicity_threshold(model.sigma_mean, model.sigma_var, model.rho)
        payload.update(sigma=model.sigma_mean, v=model.sigma_var, rho=model.rho,
                       sigma_star=asrf.superadditivity_threshold(model.rho, q),
                       f_star=None if math.isinf(f_star) else f_star,
                       ratio_vs_zero_dispersion=report.conditional_loss_at_fq / base)
    else:
        rho = model.beta_mean ** 2
        base = asrf.conditional_loss_homogeneous(
            asrf.HomogeneousModel(model.sigma, rho), fq)
        payload.update(sigma=model.sigma, beta=model.beta_mean, w=model.beta_var,
                       law=model.law, rho_equivalent=rho,
                       sigma_star=asrf.superadditivity_threshold(rho, q),
                       ratio_vs_zero_dispersion=report.conditional_loss_at_fq / base)

    if args.json:
        _dump_json(payload, None)
    else:
        print(f"model family          : {kind}")
        print(f"confidence level      : {format(q, 'g')}  (F_q = {_fmt(fq)})")
        print(f"conditional loss L(F_q): {_fmt(report.conditional_loss_at_fq)}")
        print(f"stand-alone E[e^-SF_q] : {_fmt(report.stand_alone_expectation)}")
        print(f"diversification index : {_fmt(report.diversification_index)}")
        if "sigma_star" in payload:
            print(f"super-additive above sigma* = {_fmt(payload['sigma_star'])}")
        if payload.get("f_star") is not None:
            print(f"loss monotone up to F* = {_fmt(payload['f_star'])}")
        if "ratio_vs_zero_dispersion" in payload:
            print(f"capital vs zero dispersion: x{_fmt(payload['ratio_vs_zero_dispersion'])}")
    if args.out:
        _dump_json(payload, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def _write_curve(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def cmd_figures(args) -> int:
    cfg = _load_config(args.config)
    which = args.which
    out = _pick(args, cfg, "out")
    if out is None:
        raise ValueError("an output path is required (--out or config)")
    q = float(_pick(args, cfg, "q", 0.999))
    sigma = float(_pick(args, cfg, "sigma", 1.07))
    rho = float(_pick(args, cfg, "rho", 0.1))

    if which == 1:
        gamma = float(_pick(args, cfg, "gamma", 2.35))
        step = float(_pick(args, cfg, "step", 0.005))
        law = correlation.RBoundLaw(gamma)
        grid = np.arange(step, 1.0 + 1e-12, step)
        rows = [(r, correlation.r_bound_pdf(float(r), law)) for r in grid]
        _write_curve(out, ["rho", "pdf"], rows)
    elif which == 2:
        step = float(_pick(args, cfg, "step", 0.01))
        grid = np.arange(0.0, 0.5 + 1e-12, step)
        points = asrf.dispersion_impact_curve("sigma", grid, q=q, sigma=sigma, rho=rho)
        _write_curve(out, ["sqrt_v", "di_ratio"],
                     [(p.x, p.y["di_ratio"]) for p in points])
    elif which == 3:
        step = float(_pick(args, cfg, "step", 0.002))
        grid = np.arange(0.0, 0.1 + 1e-12, step)
        points = asrf.dispersion_impact_curve("beta", grid, q=q, sigma=sigma, rho=rho)
        _write_curve(out, ["sqrt_w", "ratio_normal", "ratio_uniform"],
                     [(p.x, p.y["ratio_normal"], p.y["ratio_uniform"]) for p in points])
    else:
        raise ValueError(f"unknown figure {which!r}")
    print(f"figure {which} data -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    checks = verification.run_checks(args.suite, args.seed)
    failures = 0
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        failures += 0 if c.passed else 1
        se_part = "" if math.isnan(c.se) else f"  se={_fmt(c.se)}"
        print(f"{status}  {c.name}: value={_fmt(c.value)} "
              f"band=[{_fmt(c.lo)}, {_fmt(c.hi)}]{se_part}")
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    if args.out:
        _dump_json({
            "suite": args.suite,
            "seed": args.seed,
            "n_checks": len(checks),
            "n_failed": failures,
            "checks": [c.to_dict() for c in checks],
        }, args.out)
    return EXIT_OK if failures == 0 else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# corr
# ---------------------------------------------------------------------------

def cmd_corr(args) -> int:
    op = args.corr_op
    if op == "freq":
        bound = correlation.freq_corr_bound(args.lambda1, args.lambda2)
        payload = {"lambda1": args.lambda1, "lambda2": args.lambda2, "bound": bound}
        if args.r is not None:
            pair = correlation.FrequencyPair(args.lambda1, args.lambda2, args.r)
            payload["corr"] = correlation.freq_corr(pair)
    elif op == "transfer":
        payload = {
            "freq_corr": args.freq_corr, "s1": args.s1, "s2": args.s2,
            "loss_corr": correlation.loss_corr_from_freq_corr(args.freq_corr, args.s1, args.s2),
        }
    elif op == "rbound":
        law = correlation.RBoundLaw(args.gamma)
        payload = {"gamma": args.gamma, "mean": correlation.r_bound_mean(law)}
        if args.rho is not None:
            payload["rho"] = args.rho
            payload["cdf"] = correlation.r_bound_cdf(args.rho, law)
            payload["pdf"] = correlation.r_bound_pdf(args.rho, law)
    elif op == "copula":
        payload = {"sigma_i": args.sigma_i, "sigma_j": args.sigma_j}
        if args.rho_ij is not None:
            pair = correlation.CopulaPair(args.sigma_i, args.sigma_j, args.rho_ij)
            payload["rho_ij"] = args.rho_ij
            payload["loss_corr"] = correlation.loss_corr_from_copula(pair)
        elif args.loss_corr is not None:
            payload["loss_corr"] = args.loss_corr
            payload["rho_ij"] = correlation.copula_from_loss_corr(
                args.loss_corr, args.sigma_i, args.sigma_j)
        else:
            raise ValueError("copula needs --rho-ij or --loss-corr")
    elif op == "wmap":
        payload = {"beta": args.beta}
        if args.var_rho is not None:
            payload["var_rho"] = args.var_rho
            payload["w"] = correlation.w_from_rho_variance(args.beta, args.var_rho)
        elif args.stdev_rho is not None:
            payload["var_rho"] = args.stdev_rho ** 2
            payload["w"] = correlation.w_from_rho_variance(args.beta, args.stdev_rho ** 2)
        elif args.w is not None:
            payload["w"] = args.w
            payload["var_rho"] = correlation.rho_variance_from_w(args.beta, args.w)
        else:
            raise ValueError("wmap needs --var-rho, --stdev-rho or --w")
    else:
        raise ValueError(f"unknown corr operation {op!r}")
    _dump_json(payload, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opriskcap",
                     description="Analytical operational-risk capital models "
                                 "with built-in verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="fit cells from a loss-event CSV")
    p.add_argument("events_csv", help="CSV with header cell_id,year,amount")
    p.add_argument("--window-years", type=int, default=None)
    p.add_argument("--q-list", dest="q_list", default=None,
                   help="comma-separated confidence levels")
    p.add_argument("--min-events", type=int, default=None)
    p.add_argument("--scenarios", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--config", default=None, help="JSON parameter block")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("capital", help="capital figures for one model")
    p.add_argument("--model", choices=["homogeneous", "hetero_sigma", "uncertain_beta"])
    p.add_argument("--sigma", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--v", type=float, help="sigma variance (hetero_sigma)")
    p.add_argument("--beta", type=float, help="loading mean (uncertain_beta)")
    p.add_argument("--w", type=float, help="loading variance (uncertain_beta)")
    p.add_argument("--law", choices=["normal", "uniform"])
    p.add_argument("--q", type=float)
    p.add_argument("--json", action="store_true", help="JSON to stdout")
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_capital)

    p = sub.add_parser("figures", help="emit the data behind the reference curves")
    p.add_argument("which", type=int, choices=[1, 2, 3])
    p.add_argument("--out", default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("verify", help="run the verification batteries")
    p.add_argument("--suite", choices=["analytic", "mc", "all"], default="all")
    p.add_argument("--seed", type=int, default=20260808)
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("corr", help="correlation-algebra utilities")
    corr_sub = p.add_subparsers(dest="corr_op", required=True)

    c = corr_sub.add_parser("freq", help="count correlation and its bound")
    c.add_argument("--lambda1", type=float, required=True)
    c.add_argument("--lambda2", type=float, required=True)
    c.add_argument("--r", type=float, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_corr)

    c = corr_sub.add_parser("transfer", help="count-to-loss correlation transfer")
    c.add_argument("--freq-corr", dest="freq_corr", type=float, required=True)
    c.add_argument("--s1", type=float, required=True)
    c.add_argument("--s2", type=float, required=True)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_corr)

    c = corr_sub.add_parser("rbound", help="law of the correlation upper bound")
    c.add_argument("--gamma", type=float, required=True)
    c.add_argument("--rho", type=float, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_corr)

    c = corr_sub.add_parser("copula", help="copula parameter <-> loss correlation")
    c.add_argument("--sigma-i", dest="sigma_i", type=float, required=True)
    c.add_argument("--sigma-j", dest="sigma_j", type=float, required=True)
    c.add_argument("--rho-ij", dest="rho_ij", type=float, default=None)
    c.add_argument("--loss-corr", dest="loss_corr", type=float, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_corr)

    c = corr_sub.add_parser("wmap", help="loading variance <-> correlation variance")
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--var-rho", dest="var_rho", type=float, default=None)
    c.add_argument("--stdev-rho", dest="stdev_rho", type=float, default=None)
    c.add_argument("--w", type=float, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_corr)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (calibration.LossDataError, calibration.InfeasibleRatioError,
            correlation.InfeasibleCorrelationError, ValueError, KeyError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
