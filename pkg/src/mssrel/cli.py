"""Command-line interface: ``mssrel <subcommand> ...``.

Exit codes: 0 success, 2 usage or input validation, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import secrets
import sys
from typing import Callable, Dict, List, Optional

from . import bootstrap, classical, experiments, lindley, mcmc
from .errors import MssError, NumericalError, SupportViolationError
from .lindley import Loss, PriorConfig
from .pareto import RecordSample
from .reliability import SystemSpec

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _read_values(path: str) -> List[float]:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from exc
    vals = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals.append(float(line))
        except ValueError:
            raise CliError(f"{path}:{lineno}: not a number: {line!r}") from None
    return vals


def _load_sample(path: str, extract: bool) -> RecordSample:
    vals = _read_values(path)
    return experiments.extract_upper_records(vals) if extract else RecordSample(vals)


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is None:
        seed = secrets.randbits(32)
        print(f"# seed = {seed}", file=sys.stderr)
    return seed


def _parse_prior(text: str, known_theta: bool) -> PriorConfig:
    prior = PriorConfig.parse(text)
    if known_theta and len(text.split(":")[0].split(",")) == 3:
        print("warning: theta is known; the third prior pair is ignored", file=sys.stderr)
    return prior


def _guard(name: str, fn: Callable):
    """Run one estimator, tagging numerical failures with its name."""
    try:
        return fn()
    except NumericalError as exc:
        raise CliError(f"estimator {name}: {exc}", EXIT_NUMERIC) from exc


def _interval_dict(iv: classical.IntervalEstimate) -> dict:
    return {"lower": iv.lower, "upper": iv.upper, "level": iv.level}


def _emit(report: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(report, indent=2) + "\n")
        return
    out.write("quantity,value\n")
    for key, val in _flatten(report):
        out.write(f"{key},{val!r}\n" if isinstance(val, float) else f"{key},{val}\n")


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, (list, tuple)):
            yield key, " ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
        else:
            yield key, v


def cmd_records(args) -> int:
    rec = experiments.extract_upper_records(_read_values(args.file))
    _emit({"records": rec.values.tolist()}, args.output, sys.stdout)
    return EXIT_OK


def cmd_estimate(args) -> int:
    rec_r = _load_sample(args.strength, args.extract_records)
    rec_s = _load_sample(args.stress, args.extract_records)
    spec = SystemSpec.parse(args.spec)
    known = args.theta is not None
    prior = _parse_prior(args.prior, known)
    seed = _resolve_seed(args.seed)
    cfg = mcmc.McmcConfig(T=args.mcmc_T, burn_in=args.mcmc_burn_in, seed=seed)
    cs = args.linex_c or [1.0]

    if known:
        fit = classical.mle_known_theta(rec_r, rec_s, args.theta)
    else:
        fit = classical.mle_unknown_theta(rec_r, rec_s)
    report: Dict[str, object] = {
        "spec": str(spec),
        "seed": seed,
        "theta_known": known,
        "theta": fit.theta,
        "alpha1_hat": fit.alpha1_hat,
        "alpha2_hat": fit.alpha2_hat,
        "mle": classical.mle_r_sk(fit, spec),
    }

    def lind(loss):
        if known:
            return lindley.lindley_estimate_2param(rec_r, rec_s, args.theta, prior, spec, loss)
        return lindley.lindley_estimate_3param(rec_r, rec_s, prior, spec, loss)

    report["lindley_sel"] = _guard("lindley_sel", lambda: lind(lindley.SEL))
    for c in cs:
        report[f"lindley_linex(c={c:g})"] = _guard(f"lindley_linex(c={c:g})", lambda: lind(Loss.linex(c)))

    if known:
        chain = mcmc.gibbs_known_theta(rec_r, rec_s, args.theta, prior, spec, cfg)
    else:
        chain = mcmc.mh_within_gibbs(rec_r, rec_s, prior, spec, cfg)
    for w in chain.warnings:
        print(f"warning: {w}", file=sys.stderr)
    report["mcmc_sel"] = mcmc.point_sel(chain)
    for c in cs:
        report[f"mcmc_linex(c={c:g})"] = mcmc.point_linex(chain, c)
    report["acceptance_rate"] = chain.acceptance_rate

    intervals = {}
    for lv in args.level:
        intervals[f"hpd@{lv:g}"] = _interval_dict(_guard("hpd", lambda: mcmc.hpd_interval(chain, lv)))
        if known:
            intervals[f"asymptotic@{lv:g}"] = _interval_dict(
                _guard("asymptotic", lambda: classical.asymptotic_ci(fit, spec, 1 - lv)))
    if known:
        report["umvue"] = _guard("umvue", lambda: classical.umvue_r_sk(rec_r, rec_s, args.theta, spec))
    report["intervals"] = intervals
    _emit(report, args.output, sys.stdout)
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    rec_r = _load_sample(args.strength, args.extract_records)
    rec_s = _load_sample(args.stress, args.extract_records)
    spec = SystemSpec.parse(args.spec)
    seed = _resolve_seed(args.seed)
    fit = classical.mle_known_theta(rec_r, rec_s, args.theta)
    bs = bootstrap.boot_samples(fit, args.theta, spec, args.B, seed)
    report: Dict[str, object] = {"spec": str(spec), "seed": seed, "B": args.B, "mle": bs.point,
                                 "se_hat": bs.se_hat}
    for lv in args.level:
        beta = 1 - lv
        report[f"boot-normal@{lv:g}"] = _interval_dict(bootstrap.boot_normal_ci(bs, beta))
        report[f"boot-p@{lv:g}"] = _interval_dict(bootstrap.boot_percentile_ci(bs, beta))
        report[f"boot-t@{lv:g}"] = _interval_dict(_guard("boot-t", lambda: bootstrap.boot_t_ci(bs, beta)))
    _emit(report, args.output, sys.stdout)
    return EXIT_OK


def _load_config(args) -> experiments.ScenarioConfig:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise CliError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise CliError(f"cannot read {args.config}: {exc.strerror}") from exc
    else:
        text = ""
    # --seed wins; a seed in the file or --set is next; otherwise draw one
    if args.seed is not None or "seed" not in overrides:
        cfg = experiments.ScenarioConfig.from_text(text, overrides)
        has_seed = any(ln.split("#", 1)[0].split("=", 1)[0].strip() == "seed"
                       for ln in text.splitlines())
        if args.seed is None and has_seed:
            return cfg
        overrides["seed"] = str(_resolve_seed(args.seed))
    return experiments.ScenarioConfig.from_text(text, overrides)


def _write_rows(rows, cfg: experiments.ScenarioConfig, args, extra: Optional[dict] = None) -> None:
    meta = {"seed": cfg.seed, "config_hash": cfg.config_hash(), **(extra or {})}
    header = " ".join(f"{k}={v}" for k, v in meta.items())
    if args.output == "json":
        text = experiments.rows_to_json(rows, meta) + "\n"
    else:
        text = experiments.rows_to_csv(rows, header)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    _write_rows(experiments.run_point_study(cfg, workers=args.workers), cfg, args)
    return EXIT_OK


def cmd_coverage(args) -> int:
    cfg = _load_config(args)
    _write_rows(experiments.run_coverage_study(cfg, workers=args.workers), cfg, args)
    return EXIT_OK


def cmd_bias_sweep(args) -> int:
    cfg = _load_config(args)
    try:
        grid = [float(v) for v in args.grid.split(",")]
    except ValueError:
        raise CliError(f"bad --grid {args.grid!r}") from None
    rows = experiments.bias_sweep(cfg, grid, workers=args.workers)
    _write_rows(rows, cfg, args, {"sweep": "alpha2 solved at fixed alpha1"})
    return EXIT_OK


def cmd_real_example(args) -> int:
    seed = _resolve_seed(args.seed)
    rep = experiments.real_data_pipeline(
        experiments.FLUID_DATA_I, experiments.FLUID_DATA_II,
        spec=SystemSpec.parse(args.spec),
        prior=PriorConfig.parse(args.prior),
        cfg=mcmc.McmcConfig(T=args.mcmc_T, burn_in=args.mcmc_burn_in, seed=seed),
        linex_c=args.linex_c, level=args.level,
        ks_fits={"data_i": (0.3, 0.8), "data_ii": (1.4, 0.8)},
    )
    if args.output == "json":
        sys.stdout.write(rep.to_json() + "\n")
    else:
        _emit(json.loads(rep.to_json()), "csv", sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mssrel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--output", choices=("csv", "json"), default="json")
        if seed:
            sp.add_argument("--seed", type=int, default=None,
                            help="random seed; drawn from entropy and echoed when omitted")

    sp = sub.add_parser("records", help="extract upper records from a raw sequence")
    sp.add_argument("file")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_records)

    def data_args(sp):
        sp.add_argument("--strength", required=True, help="file with strength records, one per line")
        sp.add_argument("--stress", required=True, help="file with stress records, one per line")
        sp.add_argument("--extract-records", action="store_true",
                        help="treat the files as raw observations and extract records first")
        sp.add_argument("--spec", default="2,4", help="s,k (default 2,4)")
        sp.add_argument("--level", type=float, action="append", default=None)

    sp = sub.add_parser("estimate", help="point and interval estimates from two record files")
    data_args(sp)
    sp.add_argument("--theta", type=float, default=None, help="known common scale")
    sp.add_argument("--prior", default="2,2,2:1.5,1.5,1.5", help="a1,a2,a3:b1,b2,b3")
    sp.add_argument("--linex-c", type=float, action="append", default=None)
    sp.add_argument("--mcmc-T", type=int, default=11000)
    sp.add_argument("--mcmc-burn-in", type=int, default=1000)
    common(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("bootstrap", help="bootstrap intervals for known theta")
    data_args(sp)
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("-B", type=int, default=2000)
    common(sp)
    sp.set_defaults(func=cmd_bootstrap)

    for name, func, helptext in (
        ("simulate", cmd_simulate, "AE/MSE study"),
        ("coverage", cmd_coverage, "coverage probability / average length study"),
        ("bias-sweep", cmd_bias_sweep, "bias across a grid of true reliabilities"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", default=None, help="key = value scenario file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--workers", type=int, default=None,
                        help="worker processes (default $MSSREL_WORKERS or 1)")
        if name == "bias-sweep":
            sp.add_argument("--grid", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
        common(sp)
        sp.set_defaults(func=func, output="csv")

    sp = sub.add_parser("real-example", help="run the insulating-fluid example")
    sp.add_argument("--spec", default="2,4")
    sp.add_argument("--prior", default="3,3,3:1.5,1.5,1.5")
    sp.add_argument("--linex-c", type=float, default=1.0)
    sp.add_argument("--level", type=float, default=0.95)
    sp.add_argument("--mcmc-T", type=int, default=11000)
    sp.add_argument("--mcmc-burn-in", type=int, default=1000)
    common(sp)
    sp.set_defaults(func=cmd_real_example)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("estimate", "bootstrap") and not args.level:
        args.level = [0.95]
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (SupportViolationError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MssError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
