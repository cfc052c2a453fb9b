"""Command-line interface: ``simulate``, ``run``, ``diagnose`` and ``scaling``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path

from ..errors import ConfigError, DataError, NumericalError
from ..state import HyperParams, SIGMA_UPDATE_MODES
from .dataio import FORMATS, load_data, read_matrix, write_matrix
from .runner import MODES, RunConfig, SampleStore, run_chain
from .scaling import read_manifest, scaling_table
from .simulate import DESIGN_KINDS, SimulationConfig, simulate_data
from .summary import summarize, write_report

log = logging.getLogger("hsgibbs")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4
_UNSET = object()


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit code 2)."""

    def error(self, message):
        raise ConfigError(message)


def _floor(value: str) -> float | None:
    if value.lower() == "off":
        return None
    return float(value)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hsgibbs", description="Horseshoe regression samplers")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("simulate", help="generate a synthetic data set")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--design", choices=DESIGN_KINDS, default="independent")
    sp.add_argument("--phi", type=float, default=0.9)
    sp.add_argument("--residual-sd", type=float, default=2.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=FORMATS, default="csv")
    sp.add_argument("--out", required=True)

    rp = sub.add_parser("run", help="run one chain")
    rp.add_argument("--mode", choices=MODES, default="exact")
    rp.add_argument("--design", required=True)
    rp.add_argument("--response", required=True)
    rp.add_argument("--format", choices=FORMATS, default="csv")
    rp.add_argument("--iters", type=int, default=1000)
    rp.add_argument("--burnin", type=int, default=0)
    rp.add_argument("--thin", type=int, default=1)
    rp.add_argument("--delta", type=float, default=1e-4)
    rp.add_argument("--a0", type=float, default=1.0)
    rp.add_argument("--b0", type=float, default=1.0)
    rp.add_argument("--prop-sd-xi", type=float, default=0.8)
    rp.add_argument("--prop-sd-sigma", type=float, default=0.1)
    rp.add_argument("--sigma-update", choices=SIGMA_UPDATE_MODES, default="gibbs")
    rp.add_argument("--floor", type=_floor, default=_UNSET, help="truncation floor (old mode only), or 'off'")
    rp.add_argument("--track-all", action="store_true", help="persist every beta and eta column")
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--out", required=True)

    dp = sub.add_parser("diagnose", help="summaries and diagnostics for a stored chain")
    dp.add_argument("--chain", required=True)
    dp.add_argument("--truth", default=None, help="CSV with the true coefficient vector")
    dp.add_argument("--discard", type=int, default=None, help="scans to drop (default 5000, capped)")
    dp.add_argument("--out", default=None, help="report directory (default CHAIN/report)")

    sc = sub.add_parser("scaling", help="log-log regression of mixing against N and p")
    sc.add_argument("--runs", required=True, help="CSV manifest with N, p and chain or response")
    sc.add_argument("--out", default=None, help="write the fit as JSON here")
    return ap


def _cmd_simulate(args) -> None:
    cfg = SimulationConfig(args.n, args.p, args.design, args.phi, args.residual_sd, args.seed)
    data, beta = simulate_data(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ext = "csv" if args.format == "csv" else "bin"
    write_matrix(out / f"design.{ext}", data.W, args.format)
    write_matrix(out / f"response.{ext}", data.z, args.format)
    write_matrix(out / "truth.csv", beta, "csv")
    (out / "simulation.json").write_text(json.dumps(dataclasses.asdict(cfg), indent=2))
    log.info("wrote %s", out)


def _cmd_run(args) -> None:
    if args.floor is not _UNSET and args.mode != "old":
        raise ConfigError("--floor only applies to --mode old")
    floor = HyperParams().floor if args.floor is _UNSET else args.floor
    hyper = HyperParams(
        a0=args.a0,
        b0=args.b0,
        prop_sd_xi=args.prop_sd_xi,
        prop_sd_sigma=args.prop_sd_sigma,
        sigma_update=args.sigma_update,
        delta=args.delta,
        floor=floor,
    )
    cfg = RunConfig(
        mode=args.mode,
        iterations=args.iters,
        burnin=args.burnin,
        thin=args.thin,
        seed=args.seed,
        hyper=hyper,
        beta_indices="all" if args.track_all else None,
        eta_indices="all" if args.track_all else None,
    )
    data = load_data(args.design, args.response, args.format)
    store = run_chain(data, cfg)
    store.save(args.out)
    log.info("stored %d rows in %s (xi acceptance %.3f)", store.n_rows, args.out, store.accept_rate("xi"))


def _cmd_diagnose(args) -> None:
    store = SampleStore.load(args.chain)
    truth = None
    if args.truth is not None:
        truth = read_matrix(args.truth, "csv").reshape(-1)
        if truth.size != store.meta["p"]:
            raise DataError(f"truth has {truth.size} entries, chain has p = {store.meta['p']}")
    summary = summarize(store, truth, discard=args.discard)
    out = write_report(summary, store, args.out or Path(args.chain) / "report")
    print(json.dumps(json.loads((out / "summary.json").read_text()), indent=2))


def _cmd_scaling(args) -> None:
    fit = scaling_table(read_manifest(args.runs))
    table = {
        "intercept": fit.intercept,
        "a1_logN": fit.a1,
        "a2_logp": fit.a2,
        "se_intercept": fit.se_intercept,
        "se_a1": fit.se_a1,
        "se_a2": fit.se_a2,
        "n_records": fit.n_records,
        "group_intercepts": fit.group_effects,
    }
    text = json.dumps(table, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(text)


_COMMANDS = {
    "simulate": _cmd_simulate,
    "run": _cmd_run,
    "diagnose": _cmd_diagnose,
    "scaling": _cmd_scaling,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
