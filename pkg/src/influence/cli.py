"""Command-line front end.

Thin client over the core package: all computation lives in ``runner`` and
below; this module only parses arguments, resolves the scenario configuration,
writes artifacts and maps errors to exit codes.  With ``--server URL`` the
simulate and verify subcommands delegate to a running HTTP service instead
and write the returned artifacts locally.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Optional

from . import __version__
from .errors import ConfigError, InfluenceError
from .poset import read_text as read_poset
from .runner import (
    format_verify_table,
    load_manifest_config,
    run_scenario,
    run_verify,
    summary_to_json,
    write_run,
)
from .simulation import ScenarioConfig, read_scenario_config
from .svgplot import measured_svg, spacetime_svg

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SEED_ENV_VAR = "INFLUENCE_SEED"


def _http_post(url: str, payload: dict, timeout: float = 600.0) -> dict:
    import httpx

    response = httpx.post(url, json=payload, timeout=timeout)
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise ConfigError(f"server rejected request ({response.status_code}): {detail}")
    return response.json()


def _resolve_seed(explicit: Optional[int], file_value: Optional[int]) -> int:
    if explicit is not None:
        return explicit
    if file_value is not None:
        return file_value
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"seed: {SEED_ENV_VAR} must be an integer, got {env!r}")
    return 0


def _build_config(args: argparse.Namespace) -> ScenarioConfig:
    base: dict = {}
    if args.from_manifest:
        base = load_manifest_config(args.from_manifest).__dict__.copy()
    elif args.config:
        base = read_scenario_config(args.config).__dict__.copy()

    def take(name, value):
        if value is not None:
            base[name] = value

    kind = args.kind
    if kind == "accel":
        kind = "accelerated"
    take("kind", kind)
    take("n_events", args.n)
    take("window", args.window)
    take("pr_right", args.pr_right)
    take("r", args.r)
    take("phi0", args.phi0)
    take("emission_rate", args.emission_rate)
    take("tau0", args.tau0)
    take("receipt_scheduling", args.receipt_scheduling)
    base["seed"] = _resolve_seed(args.seed, base.get("seed"))
    if "kind" not in base:
        raise ConfigError("kind: required (use --kind or a config file)")
    for required in ("n_events", "window"):
        if required not in base:
            flag = "--n" if required == "n_events" else "--window"
            raise ConfigError(f"{required}: required (use {flag} or a config file)")
    return ScenarioConfig(**base)


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _build_config(args)
    out_dir = Path(args.out)
    t0 = time.perf_counter()
    if args.server:
        payload = {
            "kind": config.kind,
            "n_events": config.n_events,
            "window": config.window,
            "seed": config.seed,
            "pr_right": config.pr_right,
            "r": config.r,
            "phi0": config.phi0,
            "emission_rate": config.emission_rate,
            "tau0": config.tau0,
            "receipt_scheduling": config.receipt_scheduling,
            "emit_poset": bool(args.emit_poset),
            "include_csv": True,
            "include_samples": False,
        }
        reply = _http_post(args.server.rstrip("/") + "/simulate", payload)
        summary, csv_text = reply["summary"], reply["csv_text"]
        poset_text = reply.get("poset_text")
    else:
        result = run_scenario(config, emit_poset=args.emit_poset)
        summary, csv_text, poset_text = result.summary, result.csv_text, result.poset_text
    artifacts = write_run(
        summary,
        csv_text,
        out_dir,
        config_snapshot=config.as_dict(),
        poset_text=poset_text,
        elapsed_s=time.perf_counter() - t0,
    )
    print(f"wrote {artifacts.trajectory_csv}")
    print(f"wrote {artifacts.summary_json}")
    if artifacts.poset_txt:
        print(f"wrote {artifacts.poset_txt}")
    print(f"wrote {artifacts.manifest_json}")
    slope = summary.get("slope")
    slope_txt = "n/a" if slope is None else f"{slope:.6g}"
    print(f"windows={summary['n_windows']} mean_beta={summary['mean_beta']:.6g} slope={slope_txt}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    suites = None
    if args.suite:
        suites = []
        for chunk in args.suite:
            suites.extend(s.strip() for s in chunk.split(",") if s.strip())
    fixture_text = None
    if args.fixture:
        fixture_text = Path(args.fixture).read_text(encoding="utf-8")
    seed = _resolve_seed(args.seed, None)
    if args.server:
        payload = {
            "suites": suites,
            "trials": args.trials,
            "seed": seed,
            "fixture_text": fixture_text,
        }
        reply = _http_post(args.server.rstrip("/") + "/verify", payload)
        print(reply["table"])
        return EXIT_OK if reply["all_passed"] else EXIT_VERIFY_FAILED
    results = run_verify(suites=suites, trials=args.trials, seed=seed, fixture_text=fixture_text)
    print(format_verify_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY_FAILED


def _read_measured_csv(path: Path):
    import numpy as np

    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ConfigError(f"input: {path} is empty")
    header = lines[0].split(",")
    if header[:3] != ["tau_mid", "beta_hat", "stderr"]:
        raise ConfigError(f"input: {path} is not a windowed-velocity CSV")
    cols = {name: [] for name in header}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise ConfigError(f"input: {path}:{lineno} has {len(parts)} fields, expected {len(header)}")
        for name, value in zip(header, parts):
            try:
                cols[name].append(float(value))
            except ValueError:
                raise ConfigError(f"input: {path}:{lineno} bad number {value!r}") from None
    if not cols["tau_mid"]:
        raise ConfigError(f"input: {path} has no data rows")
    return {name: np.asarray(values) for name, values in cols.items()}


def _cmd_plot(args: argparse.Namespace) -> int:
    in_path = Path(args.input)
    if not in_path.exists():
        raise ConfigError(f"input: {in_path} does not exist")
    head = in_path.read_text(encoding="utf-8").lstrip()[:6]
    if head.startswith("event") or head.startswith("edge"):
        svg = spacetime_svg(read_poset(in_path), title=args.title or "spacetime diagram")
    else:
        cols = _read_measured_csv(in_path)
        svg = measured_svg(
            cols["tau_mid"],
            cols["beta_hat"],
            analytic_beta=cols.get("beta_analytic"),
            band=args.band,
            title=args.title or "windowed velocity",
        )
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="influence",
        description="discrete causal-influence simulator",
    )
    parser.add_argument("--version", action="version", version=f"influence {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and write CSV/JSON artifacts")
    sim.add_argument("--kind", choices=["free", "accel", "accelerated"], default=None)
    sim.add_argument("--pr-right", dest="pr_right", type=float, default=None,
                     help="right-step probability (free scenarios)")
    sim.add_argument("--r", type=float, default=None, help="net receipt rate (accelerated)")
    sim.add_argument("--phi0", type=float, default=None, help="initial rapidity (accelerated)")
    sim.add_argument("--n", type=int, default=None, help="number of emission events")
    sim.add_argument("--window", type=int, default=None, help="coarse-graining window (events)")
    sim.add_argument("--seed", type=int, default=None,
                     help=f"RNG seed (falls back to ${SEED_ENV_VAR}, then 0)")
    sim.add_argument("--emission-rate", dest="emission_rate", type=float, default=None,
                     help="emissions per unit proper time (accelerated; default 1000)")
    sim.add_argument("--tau0", type=float, default=None, help="starting proper time (default 1)")
    sim.add_argument("--receipt-scheduling", dest="receipt_scheduling",
                     choices=["deterministic", "bernoulli"], default=None)
    sim.add_argument("--config", default=None, help="key-value scenario file (docs/config.md)")
    sim.add_argument("--from-manifest", dest="from_manifest", default=None,
                     help="re-run the configuration recorded in a manifest.json")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--emit-poset", dest="emit_poset", action="store_true",
                     help="also write the explicit event poset")
    sim.add_argument("--server", default=None, help="delegate to a running service URL")
    sim.set_defaults(func=_cmd_simulate)

    ver = sub.add_parser("verify", help="run invariant suites and print a pass/fail table")
    ver.add_argument("--suite", action="append", default=None,
                     help="suite name (repeatable or comma-separated); default: all")
    ver.add_argument("--trials", type=int, default=None, help="override per-suite trial count")
    ver.add_argument("--seed", type=int, default=None)
    ver.add_argument("--fixture", default=None, help="poset file to check")
    ver.add_argument("--server", default=None, help="delegate to a running service URL")
    ver.set_defaults(func=_cmd_verify)

    plot = sub.add_parser("plot", help="render an SVG from a run's CSV or poset file")
    plot.add_argument("--input", required=True, help="trajectory.csv or poset.txt")
    plot.add_argument("--out", required=True, help="output SVG path")
    plot.add_argument("--band", type=float, default=0.02,
                      help="half-width of the residual band (default 0.02)")
    plot.add_argument("--title", default=None)
    plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfluenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
