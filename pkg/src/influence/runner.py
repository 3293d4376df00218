"""Scenario orchestration and invariant suites shared by the CLI and service.

``run_scenario`` produces every artifact as text in memory so the HTTP
service and the command line write byte-identical files; ``run_simulation``
persists them plus a manifest.  ``run_verify`` executes the named invariant
suites and reports one pass/fail result per suite.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import poset as poset_mod
from .dynamics import dynamic_state, receive_left, receive_right
from .errors import ConfigError, DomainError, InfluenceError
from .kinematics import emergent_state, lorentz_boost
from .quantify import CoordinatedPair, check_coordination, quantify_interval
from .simulation import (
    MeasuredTrajectory,
    ScenarioConfig,
    ZitterPath,
    build_poset,
    coarse_grain,
    derive_rng,
    oracle_backward_project,
    oracle_leq,
    oracle_project,
    random_poset,
    realized_receipt_rates,
    simulate,
)

SUMMARY_SCHEMA_VERSION = 1
MANIFEST_SCHEMA_VERSION = 1
TANH_FIT_TOLERANCE = 0.02

TRAJECTORY_CSV = "trajectory.csv"
SUMMARY_JSON = "summary.json"
MANIFEST_JSON = "manifest.json"
POSET_TXT = "poset.txt"


@dataclass
class ScenarioResult:
    """All artifacts of one scenario run, before any file is written."""

    config: ScenarioConfig
    path: ZitterPath
    measured: MeasuredTrajectory
    summary: dict
    csv_text: str
    poset_text: Optional[str]


def run_scenario(config: ScenarioConfig, *, emit_poset: bool = False) -> ScenarioResult:
    """Simulate, coarse-grain and summarize one scenario deterministically."""
    path = simulate(config)
    measured = coarse_grain(path, config.window)

    summary: dict = {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "kind": config.kind,
        "n_events": config.n_events,
        "window": config.window,
        "seed": config.seed,
        "n_windows": len(measured),
        "n_emissions": path.n_emissions,
        "n_receipts": path.n_receipts,
        "mean_beta": float(measured.beta_hat.mean()),
    }
    if config.kind == "free":
        summary["pr_right"] = config.pr_right
    else:
        summary.update(
            r=config.r,
            phi0=config.phi0,
            emission_rate=config.emission_rate,
            tau0=config.tau0,
            receipt_scheduling=config.receipt_scheduling,
        )
    try:
        fit = measured.fit_rapidity()
        summary.update(
            slope=fit.slope, intercept=fit.intercept, slope_stderr=fit.slope_stderr
        )
    except DomainError:
        summary.update(slope=None, intercept=None, slope_stderr=None)
    if measured.analytic is not None:
        resid = measured.residuals()
        summary["max_abs_residual"] = float(np.abs(resid).max())
        summary["fit_tolerance"] = TANH_FIT_TOLERANCE
        summary["tanh_fit_pass"] = bool(np.abs(resid).max() <= TANH_FIT_TOLERANCE)
        summary["realized_receipt_rate"] = float(
            realized_receipt_rates(path, config.window).mean()
        )

    poset_text = build_poset(path).to_text() if emit_poset else None
    return ScenarioResult(
        config=config,
        path=path,
        measured=measured,
        summary=summary,
        csv_text=measured.to_csv(),
        poset_text=poset_text,
    )


def summary_to_json(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True, indent=2) + "\n"


@dataclass
class RunArtifacts:
    out_dir: Path
    summary: dict
    trajectory_csv: Path
    summary_json: Path
    manifest_json: Path
    poset_txt: Optional[Path]


def write_run(
    result_summary: dict,
    csv_text: str,
    out_dir,
    *,
    config_snapshot: dict,
    poset_text: Optional[str] = None,
    elapsed_s: float = 0.0,
) -> RunArtifacts:
    """Persist run artifacts plus a manifest listing every output file.

    The manifest carries timing and is the only non-reproducible file.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[tuple[str, str]] = [
        (TRAJECTORY_CSV, csv_text),
        (SUMMARY_JSON, summary_to_json(result_summary)),
    ]
    if poset_text is not None:
        files.append((POSET_TXT, poset_text))
    outputs = []
    for name, text in files:
        data = text.encode("utf-8")
        (out / name).write_bytes(data)
        outputs.append(
            {
                "name": name,
                "bytes": len(data),
                "sha256": hashlib.sha256(data).hexdigest(),
            }
        )
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "command": "simulate",
        "config": config_snapshot,
        "outputs": outputs,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "elapsed_s": elapsed_s,
    }
    manifest_path = out / MANIFEST_JSON
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return RunArtifacts(
        out_dir=out,
        summary=result_summary,
        trajectory_csv=out / TRAJECTORY_CSV,
        summary_json=out / SUMMARY_JSON,
        manifest_json=manifest_path,
        poset_txt=(out / POSET_TXT) if poset_text is not None else None,
    )


def run_simulation(config: ScenarioConfig, out_dir, *, emit_poset: bool = False) -> RunArtifacts:
    t0 = time.perf_counter()
    result = run_scenario(config, emit_poset=emit_poset)
    elapsed = time.perf_counter() - t0
    return write_run(
        result.summary,
        result.csv_text,
        out_dir,
        config_snapshot=config.as_dict(),
        poset_text=result.poset_text,
        elapsed_s=elapsed,
    )


def load_manifest_config(manifest_path) -> ScenarioConfig:
    """Rebuild the scenario configuration recorded in a run manifest."""
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    snapshot = dict(manifest.get("config", {}))
    version = snapshot.pop("schema_version", None)
    if version != 1:
        raise ConfigError(f"schema_version: manifest config has {version!r}, expected 1")
    return ScenarioConfig(**snapshot)


# -- invariant suites --------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    passed: bool
    trials: int
    detail: str


def _suite_mass_shell(trials: int, seed: int) -> SuiteResult:
    rng = derive_rng(seed, replica=1)
    n = rng.integers(1, 1_000_000, size=trials)
    dp = np.exp(rng.uniform(math.log(0.05), math.log(20.0), size=trials))
    dq = np.exp(rng.uniform(math.log(0.05), math.log(20.0), size=trials))
    worst = 0.0
    for i in range(trials):
        s = emergent_state(int(n[i]), float(dp[i]), float(dq[i]))
        err = abs(s.energy**2 - s.momentum**2 - s.mass**2) / s.mass**2
        if err > worst:
            worst = err
    return SuiteResult(
        "mass-shell", worst <= 1e-12, trials, f"worst |E^2-P^2-M^2|/M^2 = {worst:.3e}"
    )


def _suite_minkowski(trials: int, seed: int) -> SuiteResult:
    rng = derive_rng(seed, replica=2)
    mag_p = np.exp(rng.uniform(math.log(0.05), math.log(20.0), size=trials))
    mag_q = np.exp(rng.uniform(math.log(0.05), math.log(20.0), size=trials))
    sign = rng.integers(0, 2, size=trials) * 2 - 1
    worst = 0.0
    for i in range(trials):
        q = quantify_interval(float(mag_p[i]), float(sign[i] * mag_q[i]))
        err = abs(q.dt**2 - q.dx**2 - q.ds2) / abs(q.ds2)
        if err > worst:
            worst = err
    return SuiteResult(
        "minkowski", worst <= 1e-12, trials, f"worst |dt^2-dx^2-ds^2|/|ds^2| = {worst:.3e}"
    )


def _suite_product_preservation(trials: int, seed: int) -> SuiteResult:
    rng = derive_rng(seed, replica=3)
    dp0 = float(np.exp(rng.uniform(math.log(0.5), math.log(5.0))))
    dq0 = float(np.exp(rng.uniform(math.log(0.5), math.log(5.0))))
    state = dynamic_state(dp0, dq0, 1.0)
    p0 = state.dp * state.dq
    worst = 0.0
    for i in range(trials // 2):
        state = receive_right(state)
        state = receive_left(state)
        if i % 4096 == 0:
            drift = abs(state.dp * state.dq / p0 - 1.0)
            if drift > worst:
                worst = drift
    drift = abs(state.dp * state.dq / p0 - 1.0)
    worst = max(worst, drift)
    return SuiteResult(
        "product-preservation",
        worst <= 1e-9,
        trials,
        f"worst relative drift of dp*dq = {worst:.3e}",
    )


def _suite_projection_oracle(trials: int, seed: int) -> SuiteResult:
    rng = derive_rng(seed, replica=4)
    checked = 0
    for _ in range(trials):
        p = random_poset(rng, max_events=60, min_events=10)
        events = p.events()
        for e in events:
            for cid in p.chains:
                if p.forward_project(e, cid) != oracle_project(p, e, cid):
                    return SuiteResult(
                        "projection-oracle", False, trials,
                        f"forward projection mismatch at {e!r} onto {cid!r}",
                    )
                if p.backward_project(e, cid) != oracle_backward_project(p, e, cid):
                    return SuiteResult(
                        "projection-oracle", False, trials,
                        f"backward projection mismatch at {e!r} onto {cid!r}",
                    )
            checked += 1
        for _ in range(20):
            x = events[int(rng.integers(len(events)))]
            y = events[int(rng.integers(len(events)))]
            if p.leq(x, y) != oracle_leq(p, x, y):
                return SuiteResult(
                    "projection-oracle", False, trials, f"leq mismatch at ({x!r}, {y!r})"
                )
    return SuiteResult(
        "projection-oracle", True, trials, f"{checked} events checked against the oracle"
    )


def _suite_lorentz(trials: int, seed: int) -> SuiteResult:
    rng = derive_rng(seed, replica=5)
    dt = np.exp(rng.uniform(math.log(0.5), math.log(2.0), size=trials))
    dx = rng.uniform(-0.45, 0.45, size=trials) * dt
    v1 = rng.uniform(-0.95, 0.95, size=trials)
    v2 = rng.uniform(-0.95, 0.95, size=trials)
    worst = 0.0
    for i in range(trials):
        a, b = lorentz_boost(float(dt[i]), float(dx[i]), float(v1[i]))
        ds2 = dt[i] ** 2 - dx[i] ** 2
        err = abs((a * a - b * b) / ds2 - 1.0)
        c, d = lorentz_boost(a, b, float(v2[i]))
        w = (v1[i] + v2[i]) / (1.0 + v1[i] * v2[i])
        c2, d2 = lorentz_boost(float(dt[i]), float(dx[i]), float(w))
        scale = max(abs(c2), abs(d2))
        err = max(err, abs(c - c2) / scale, abs(d - d2) / scale)
        if err > worst:
            worst = err
    return SuiteResult(
        "lorentz", worst <= 1e-11, trials, f"worst invariance/additivity error = {worst:.3e}"
    )


SUITES: dict[str, tuple[Callable[[int, int], SuiteResult], int]] = {
    "mass-shell": (_suite_mass_shell, 100_000),
    "minkowski": (_suite_minkowski, 100_000),
    "product-preservation": (_suite_product_preservation, 1_000_000),
    "projection-oracle": (_suite_projection_oracle, 150),
    "lorentz": (_suite_lorentz, 100_000),
}


def _fixture_results(fixture_text: str) -> list[SuiteResult]:
    try:
        p = poset_mod.from_text(fixture_text)
    except InfluenceError as exc:
        return [SuiteResult("fixture:well-formed", False, 1, str(exc))]
    results = [SuiteResult("fixture:well-formed", True, 1, f"{len(p)} events load cleanly")]

    ok = True
    detail = "projections agree with the brute-force oracle"
    for e in p.events():
        for cid in p.chains:
            if p.forward_project(e, cid) != oracle_project(p, e, cid) or (
                p.backward_project(e, cid) != oracle_backward_project(p, e, cid)
            ):
                ok, detail = False, f"projection mismatch at {e!r} onto {cid!r}"
                break
        if not ok:
            break
    results.append(SuiteResult("fixture:projection-oracle", ok, len(p), detail))

    cids = sorted(p.chains)
    pair_ok = True
    pair_detail = "all chain pairs coordinated"
    for i in range(len(cids)):
        for j in range(i + 1, len(cids)):
            pair = CoordinatedPair(poset=p, right=p.chain(cids[i]), left=p.chain(cids[j]))
            ok_pair, diagnostics = check_coordination(pair)
            if not ok_pair:
                pair_ok = False
                pair_detail = f"({cids[i]}, {cids[j]}): " + "; ".join(diagnostics[:2])
                break
        if not pair_ok:
            break
    results.append(SuiteResult("fixture:coordination", pair_ok, 1, pair_detail))
    return results


def run_verify(
    suites: Optional[Sequence[str]] = None,
    trials: Optional[int] = None,
    seed: int = 0,
    fixture_text: Optional[str] = None,
) -> list[SuiteResult]:
    """Run the named invariant suites (all, by default) plus fixture checks."""
    names = list(suites) if suites else list(SUITES)
    results: list[SuiteResult] = []
    for name in names:
        if name not in SUITES:
            raise ConfigError(
                f"suite: unknown suite {name!r} (available: {', '.join(SUITES)})"
            )
        fn, default_trials = SUITES[name]
        results.append(fn(trials if trials is not None else default_trials, seed))
    if fixture_text is not None:
        results.extend(_fixture_results(fixture_text))
    return results


def format_verify_table(results: Sequence[SuiteResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {status}  trials={r.trials}  {r.detail}")
    overall = "PASS" if all(r.passed for r in results) else "FAIL"
    lines.append(f"{'overall':<{width}}  {overall}")
    return "\n".join(lines)
