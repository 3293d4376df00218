"""Generation and measurement of explicit influence-event sequences.

Free walkers emit one influence per step, independently to the right observer
with probability pr_right, else to the left.  Accelerated walkers additionally
receive influence: each receipt applies the product-preserving span update to a
running (dp, dq) bookkeeping, and emission statistics follow the bookkeeping
velocity.  Accelerated runs operate in the continuum regime: the walker emits
``emission_rate`` influences per unit proper time, so one emission advances
tau by 1/emission_rate, and receipts are scheduled so the net receipt rate
(receipts per effective sent count per proper time) matches the configured r.
There the emission sequence is the quasi-deterministic zitter pattern tracking
the instantaneous right-step probability, and receipts fire on an accumulator
("deterministic" scheduling) by default; "bernoulli" scheduling draws each
receipt independently instead.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .dynamics import AnalyticAccel, influence_rate
from .errors import ConfigError, DomainError, ResolutionError
from .poset import Chain, EventId, Poset, PosetBuilder

TAG_STEP_RIGHT = 0
TAG_STEP_LEFT = 1
TAG_RECEIPT_RIGHT = 2
TAG_RECEIPT_LEFT = 3

KIND_FREE = "free"
KIND_ACCELERATED = "accelerated"

CONFIG_SCHEMA_VERSION = 1


def derive_rng(seed: int, replica: int = 0) -> np.random.Generator:
    """Independent, reproducible PCG64 stream for (seed, replica)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(replica,)))
    )


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of one simulation scenario.

    ``emission_rate`` (emissions per unit proper time) sets the continuum
    resolution of accelerated runs; ``tau0`` is the proper time at the start
    of the recorded segment.
    """

    kind: str
    n_events: int
    window: int
    seed: int = 0
    pr_right: Optional[float] = None
    r: Optional[float] = None
    phi0: Optional[float] = None
    emission_rate: float = 1000.0
    tau0: float = 1.0
    receipt_scheduling: str = "deterministic"

    def __post_init__(self) -> None:
        if self.kind not in (KIND_FREE, KIND_ACCELERATED):
            raise ConfigError(f"kind: expected 'free' or 'accelerated', got {self.kind!r}")
        if self.window < 10:
            raise ConfigError(f"window: must be >= 10, got {self.window}")
        if self.n_events < 10 * self.window:
            raise ConfigError(
                f"n_events: must be >= 10 * window = {10 * self.window}, got {self.n_events}"
            )
        if self.kind == KIND_FREE:
            if self.pr_right is None:
                raise ConfigError("pr_right: required for kind 'free'")
            if not 0.0 < self.pr_right < 1.0:
                raise ConfigError(f"pr_right: must be in (0, 1), got {self.pr_right}")
        else:
            if self.r is None:
                raise ConfigError("r: required for kind 'accelerated'")
            if self.phi0 is None:
                raise ConfigError("phi0: required for kind 'accelerated'")
        if self.emission_rate <= 0:
            raise ConfigError(f"emission_rate: must be positive, got {self.emission_rate}")
        if self.tau0 <= 0:
            raise ConfigError(f"tau0: must be positive, got {self.tau0}")
        if self.receipt_scheduling not in ("deterministic", "bernoulli"):
            raise ConfigError(
                "receipt_scheduling: expected 'deterministic' or 'bernoulli', "
                f"got {self.receipt_scheduling!r}"
            )

    def as_dict(self) -> dict:
        out = {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "kind": self.kind,
            "n_events": self.n_events,
            "window": self.window,
            "seed": self.seed,
        }
        if self.kind == KIND_FREE:
            out["pr_right"] = self.pr_right
        else:
            out.update(
                r=self.r,
                phi0=self.phi0,
                emission_rate=self.emission_rate,
                tau0=self.tau0,
                receipt_scheduling=self.receipt_scheduling,
            )
        return out


_CONFIG_FIELDS = {
    "kind": str,
    "n_events": int,
    "window": int,
    "seed": int,
    "pr_right": float,
    "r": float,
    "phi0": float,
    "emission_rate": float,
    "tau0": float,
    "receipt_scheduling": str,
}


def read_scenario_config(path) -> ScenarioConfig:
    """Read the key-value scenario file (see docs/config.md)."""
    values: dict = {}
    schema_version = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise ConfigError(f"line {lineno}: expected 'key value', got {raw!r}")
            key, value = parts
            if key == "schema_version":
                schema_version = value
                continue
            if key not in _CONFIG_FIELDS:
                raise ConfigError(f"{key}: unknown configuration key")
            try:
                values[key] = _CONFIG_FIELDS[key](value)
            except ValueError:
                raise ConfigError(f"{key}: cannot parse {value!r}") from None
    if schema_version is None:
        raise ConfigError("schema_version: missing (expected first line 'schema_version 1')")
    if schema_version != str(CONFIG_SCHEMA_VERSION):
        raise ConfigError(
            f"schema_version: expected {CONFIG_SCHEMA_VERSION}, got {schema_version!r}"
        )
    if "kind" not in values:
        raise ConfigError("kind: required")
    return ScenarioConfig(**values)


def write_scenario_config(config: ScenarioConfig, path) -> None:
    lines = [f"schema_version {CONFIG_SCHEMA_VERSION}"]
    for key in _CONFIG_FIELDS:
        value = getattr(config, key)
        if value is not None:
            lines.append(f"{key} {value}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class ZitterPath:
    """One realized influence-event sequence.

    ``tags`` holds every walker event in chain order (steps and receipts);
    ``em_dp``/``em_dq`` are the per-emission bookkeeping spans — literal step
    counts for free walkers, the continuum bookkeeping for accelerated ones —
    whose product's square root is the cumulative proper time.
    """

    kind: str
    tags: np.ndarray
    em_dp: np.ndarray
    em_dq: np.ndarray
    k_step: float
    seed: int
    tau0: float = 0.0
    emission_rate: Optional[float] = None
    analytic: Optional[AnalyticAccel] = None

    @property
    def emission_mask(self) -> np.ndarray:
        return self.tags < TAG_RECEIPT_RIGHT

    @property
    def emission_tags(self) -> np.ndarray:
        return self.tags[self.emission_mask]

    @property
    def n_emissions(self) -> int:
        return int(self.emission_mask.sum())

    @property
    def n_receipts(self) -> int:
        return len(self.tags) - self.n_emissions

    @property
    def tau(self) -> np.ndarray:
        """Cumulative proper time at each emission: sqrt(dp * dq)."""
        return np.sqrt(self.em_dp * self.em_dq)

    @property
    def beta_bookkeeping(self) -> np.ndarray:
        return (self.em_dp - self.em_dq) / (self.em_dp + self.em_dq)

    def receipt_emission_index(self) -> tuple[np.ndarray, np.ndarray]:
        """(emission index each receipt follows, receipt tag), 1-based index."""
        emission_number = np.cumsum(self.emission_mask)
        receipt_pos = np.nonzero(~self.emission_mask)[0]
        return emission_number[receipt_pos], self.tags[receipt_pos]

    def spacetime(self) -> tuple[np.ndarray, np.ndarray]:
        """(t, x) samples after each emission in the unit-step frame.

        Every emission advances t by 1/2 and x by +-1/2, so each segment moves
        at speed 1.
        """
        em = self.emission_tags
        t = 0.5 * np.arange(1, len(em) + 1)
        x = np.cumsum(np.where(em == TAG_STEP_RIGHT, 0.5, -0.5))
        return t, x


def simulate_free(config: ScenarioConfig) -> ZitterPath:
    """Independent Bernoulli emissions at fixed pr_right; no receipts."""
    if config.kind != KIND_FREE:
        raise ConfigError(f"kind: simulate_free requires 'free', got {config.kind!r}")
    rng = derive_rng(config.seed)
    is_right = rng.random(config.n_events) < config.pr_right
    tags = np.where(is_right, TAG_STEP_RIGHT, TAG_STEP_LEFT).astype(np.int8)
    cum_right = np.cumsum(is_right, dtype=np.float64)
    cum_left = np.arange(1, config.n_events + 1, dtype=np.float64) - cum_right
    return ZitterPath(
        kind=KIND_FREE,
        tags=tags,
        em_dp=cum_right,
        em_dq=cum_left,
        k_step=1.0,
        seed=config.seed,
    )


def simulate_accelerated(config: ScenarioConfig) -> ZitterPath:
    """Emissions interleaved with receipts realizing a constant net rate r.

    The bookkeeping (dp, dq) starts on the constant-acceleration solution at
    tau0 (scaled to emission_rate * tau0 / 4 so receipt increments stay in the
    differential regime), grows proportionally to tau between receipts, and
    each receipt applies the product-preserving update with k_step = 1.
    Receipts that raise dp are scheduled after right emissions, receipts that
    raise dq after left emissions.
    """
    if config.kind != KIND_ACCELERATED:
        raise ConfigError(
            f"kind: simulate_accelerated requires 'accelerated', got {config.kind!r}"
        )
    r = float(config.r)
    phi0 = float(config.phi0)
    n = config.n_events
    tau0 = config.tau0
    dtau = 1.0 / config.emission_rate
    # Bookkeeping runs in proper-time units (sqrt(dp*dq) = tau), so one unit
    # step of receipt increment corresponds to k below; the 1/4 factor keeps
    # receipt kicks small while expected receipts per emission stay below 1
    # (they reach 1 only when r * dp / (4 pr) does, independent of the rate).
    k = 4.0 / config.emission_rate
    bernoulli = config.receipt_scheduling == "bernoulli"
    rng = derive_rng(config.seed) if bernoulli else None

    phi_start = phi0 + r * tau0
    dp = tau0 * math.exp(phi_start)
    dq = tau0 * math.exp(-phi_start)

    tags: list[int] = []
    em_dp = np.empty(n)
    em_dq = np.empty(n)
    acc_emit = 0.5
    acc_receipt = 0.5
    tau = tau0
    for i in range(n):
        tau_next = tau0 + (i + 1) * dtau
        growth = tau_next / tau
        dp *= growth
        dq *= growth
        tau = tau_next

        pr = dp / (dp + dq)
        acc_emit += pr
        if acc_emit >= 1.0:
            acc_emit -= 1.0
            tags.append(TAG_STEP_RIGHT)
            emitted_right = True
        else:
            tags.append(TAG_STEP_LEFT)
            emitted_right = False

        if r > 0.0 and emitted_right:
            q = r * dp * dtau / (k * pr)
            if q > 1.0:
                raise ResolutionError(
                    f"expected receipts per emission {q:.3f} > 1 at tau={tau:.3f}; "
                    "lower r or raise emission_rate"
                )
            if bernoulli:
                fire = rng.random() < q
            else:
                acc_receipt += q
                fire = acc_receipt >= 1.0
                if fire:
                    acc_receipt -= 1.0
            if fire:
                dp_new = dp + k
                dq = dq * dp / dp_new
                dp = dp_new
                tags.append(TAG_RECEIPT_RIGHT)
        elif r < 0.0 and not emitted_right:
            pl = 1.0 - pr
            q = -r * dq * dtau / (k * pl)
            if q > 1.0:
                raise ResolutionError(
                    f"expected receipts per emission {q:.3f} > 1 at tau={tau:.3f}; "
                    "raise emission_rate or lower |r|"
                )
            if bernoulli:
                fire = rng.random() < q
            else:
                acc_receipt += q
                fire = acc_receipt >= 1.0
                if fire:
                    acc_receipt -= 1.0
            if fire:
                dq_new = dq + k
                dp = dp * dq / dq_new
                dq = dq_new
                tags.append(TAG_RECEIPT_LEFT)

        em_dp[i] = dp
        em_dq[i] = dq

    return ZitterPath(
        kind=KIND_ACCELERATED,
        tags=np.asarray(tags, dtype=np.int8),
        em_dp=em_dp,
        em_dq=em_dq,
        k_step=k,
        seed=config.seed,
        tau0=tau0,
        emission_rate=config.emission_rate,
        analytic=AnalyticAccel(rate=r, rapidity0=phi0),
    )


def simulate(config: ScenarioConfig) -> ZitterPath:
    if config.kind == KIND_FREE:
        return simulate_free(config)
    return simulate_accelerated(config)


@dataclass(frozen=True)
class RapidityFit:
    """Least-squares fit of artanh(beta_hat) against tau."""

    slope: float
    intercept: float
    slope_stderr: float
    n_used: int


@dataclass
class MeasuredTrajectory:
    """Windowed velocity estimates along a path."""

    tau_mid: np.ndarray
    beta_hat: np.ndarray
    stderr: np.ndarray
    n_right: np.ndarray
    n_left: np.ndarray
    window: int
    analytic: Optional[AnalyticAccel] = None

    def __len__(self) -> int:
        return len(self.tau_mid)

    def residuals(self, analytic: Optional[AnalyticAccel] = None) -> np.ndarray:
        accel = analytic if analytic is not None else self.analytic
        if accel is None:
            raise DomainError("no analytic solution to compare against")
        expected = np.tanh(accel.rate * self.tau_mid + accel.rapidity0)
        return self.beta_hat - expected

    def fit_rapidity(self) -> RapidityFit:
        usable = np.abs(self.beta_hat) < 1.0
        if usable.sum() < 3:
            raise DomainError("fewer than 3 non-lightlike windows; cannot fit")
        x = self.tau_mid[usable]
        y = np.arctanh(self.beta_hat[usable])
        n = len(x)
        xbar, ybar = x.mean(), y.mean()
        sxx = float(((x - xbar) ** 2).sum())
        slope = float(((x - xbar) * (y - ybar)).sum() / sxx)
        intercept = ybar - slope * xbar
        resid = y - (intercept + slope * x)
        s2 = float((resid**2).sum() / max(n - 2, 1))
        return RapidityFit(
            slope=slope,
            intercept=float(intercept),
            slope_stderr=math.sqrt(s2 / sxx),
            n_used=n,
        )

    CSV_BASE_HEADER = "tau_mid,beta_hat,stderr"

    def to_csv(self) -> str:
        with_analytic = self.analytic is not None
        header = self.CSV_BASE_HEADER + (",beta_analytic,residual" if with_analytic else "")
        lines = [header]
        resid = self.residuals() if with_analytic else None
        for i in range(len(self.tau_mid)):
            row = f"{float(self.tau_mid[i])!r},{float(self.beta_hat[i])!r},{float(self.stderr[i])!r}"
            if with_analytic:
                expected = float(self.beta_hat[i] - resid[i])
                row += f",{expected!r},{float(resid[i])!r}"
            lines.append(row)
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())


def coarse_grain(path: ZitterPath, window: int) -> MeasuredTrajectory:
    """Windowed velocity estimate over successive blocks of emissions.

    Each window of ``window`` emissions yields beta_hat = (n_right - n_left) /
    window, tau at the window's middle emission, and the binomial standard
    error of beta_hat (with a half-count floor so it is always positive).
    Receipts are excluded from the counts; a trailing partial window is
    dropped.
    """
    if window < 10:
        raise DomainError(f"window must be >= 10, got {window}")
    em = path.emission_tags
    n = len(em)
    if n < window:
        raise DomainError(f"path has {n} emissions, shorter than one window of {window}")
    n_win = n // window
    rights = em[: n_win * window].reshape(n_win, window) == TAG_STEP_RIGHT
    n_right = rights.sum(axis=1)
    n_left = window - n_right
    beta_hat = (n_right - n_left) / window
    p_smooth = (n_right + 0.5) / (window + 1.0)
    stderr = 2.0 * np.sqrt(p_smooth * (1.0 - p_smooth) / window)
    tau = path.tau
    mid_idx = np.arange(n_win) * window + window // 2
    return MeasuredTrajectory(
        tau_mid=tau[mid_idx],
        beta_hat=beta_hat.astype(np.float64),
        stderr=stderr,
        n_right=n_right,
        n_left=n_left,
        window=window,
        analytic=path.analytic,
    )


def realized_receipt_rates(path: ZitterPath, window: int) -> np.ndarray:
    """Per-window net receipt rate from counted events.

    Receipts are normalized by the effective sent count (bookkeeping span over
    k_step) and the window's proper-time extent, matching the scheduling
    convention of ``simulate_accelerated``.
    """
    if path.n_emissions < window:
        raise DomainError("path shorter than one window")
    n_win = path.n_emissions // window
    at, side = path.receipt_emission_index()
    tau = path.tau
    mid_idx = np.arange(n_win) * window + window // 2
    out = np.empty(n_win)
    for w in range(n_win):
        lo, hi = w * window, (w + 1) * window
        in_win = (at > lo) & (at <= hi)
        n_rr = int((side[in_win] == TAG_RECEIPT_RIGHT).sum())
        n_rl = int((side[in_win] == TAG_RECEIPT_LEFT).sum())
        dtau_win = tau[hi - 1] - (tau[lo - 1] if lo > 0 else path.tau0)
        rate = 0.0
        if n_rr:
            rate += influence_rate(n_rr, path.em_dp[mid_idx[w]] / path.k_step, dtau_win)
        if n_rl:
            rate -= influence_rate(n_rl, path.em_dq[mid_idx[w]] / path.k_step, dtau_win)
        out[w] = rate
    return out


WALKER_CHAIN = "walker"
OBS_RIGHT_CHAIN = "obs_right"
OBS_LEFT_CHAIN = "obs_left"


def build_poset(path: ZitterPath) -> Poset:
    """Explicit event poset of a path: walker chain, two observer chains,
    one influence edge per emission, and one per receipt (sourced at the most
    recent arrival on the opposite-side observer; a dp-raising receipt arrives
    from the left/dq-side chain, mirroring the span it contracts).

    Observer events are the arrivals of the walker's influences, so quantified
    walker intervals reproduce the path's emission counts exactly.
    """
    tags = path.tags
    n_all = len(tags)
    width = max(len(str(n_all)), 4)
    walker_ids = [f"w{i + 1:0{width}d}" for i in range(n_all)]
    right_ids: list[str] = []
    left_ids: list[str] = []
    emissions: list[tuple[str, str]] = []
    receipts: list[tuple[str, str]] = []
    for i, tag in enumerate(tags):
        w = walker_ids[i]
        if tag == TAG_STEP_RIGHT:
            arrival = f"r{len(right_ids) + 1:0{width}d}"
            right_ids.append(arrival)
            emissions.append((w, arrival))
        elif tag == TAG_STEP_LEFT:
            arrival = f"l{len(left_ids) + 1:0{width}d}"
            left_ids.append(arrival)
            emissions.append((w, arrival))
        elif tag == TAG_RECEIPT_RIGHT:
            if left_ids:
                receipts.append((left_ids[-1], w))
        else:
            if right_ids:
                receipts.append((right_ids[-1], w))

    builder = PosetBuilder()
    if walker_ids:
        builder.add_chain(WALKER_CHAIN, walker_ids)
    builder.add_chain(OBS_RIGHT_CHAIN, right_ids)
    builder.add_chain(OBS_LEFT_CHAIN, left_ids)
    for src, dst in emissions + receipts:
        builder.add_influence(src, dst, check_cycles=False)
    return builder.freeze()


# -- brute-force oracles (test-side ground truth) ---------------------------

_ADJACENCY_CACHE: "weakref.WeakKeyDictionary[Poset, tuple[dict, dict]]" = (
    weakref.WeakKeyDictionary()
)


def _edge_maps(poset: Poset) -> tuple[dict, dict]:
    """Successor/predecessor maps built from the poset's raw edge lists only."""
    cached = _ADJACENCY_CACHE.get(poset)
    if cached is not None:
        return cached
    succ: dict[EventId, list[EventId]] = {e: [] for e in poset.events()}
    pred: dict[EventId, list[EventId]] = {e: [] for e in poset.events()}
    for a, b in poset.chain_edges:
        succ[a].append(b)
        pred[b].append(a)
    for a, b in poset.influence_edges:
        succ[a].append(b)
        pred[b].append(a)
    _ADJACENCY_CACHE[poset] = (succ, pred)
    return succ, pred


def _dfs_reachable(adjacency: dict, start: EventId) -> set:
    seen = {start}
    stack = [start]
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def oracle_leq(poset: Poset, x: EventId, y: EventId) -> bool:
    """Reachability by depth-first search over the raw edge lists."""
    succ, _ = _edge_maps(poset)
    return y in _dfs_reachable(succ, x)


def oracle_project(poset: Poset, x: EventId, target: Union[str, Chain]) -> Optional[EventId]:
    """Forward projection by exhaustive reachability plus a valuation scan."""
    chain = poset.chain(target.chain_id if isinstance(target, Chain) else target)
    succ, _ = _edge_maps(poset)
    reachable = _dfs_reachable(succ, x)
    for e in chain.events:  # valuation-ascending
        if e in reachable:
            return e
    return None


def oracle_backward_project(
    poset: Poset, x: EventId, target: Union[str, Chain]
) -> Optional[EventId]:
    """Backward projection: reverse reachability plus a reversed scan."""
    chain = poset.chain(target.chain_id if isinstance(target, Chain) else target)
    _, pred = _edge_maps(poset)
    reaching = _dfs_reachable(pred, x)
    for e in reversed(chain.events):
        if e in reaching:
            return e
    return None


def random_poset(
    rng: np.random.Generator,
    max_events: int = 200,
    min_events: int = 10,
    edge_factor: float = 1.0,
) -> Poset:
    """Random chain-structured DAG for oracle cross-checks.

    Draws 2-4 chains totalling between min_events and max_events events, then
    attempts ``edge_factor * total`` random influence edges, skipping any that
    would create a cycle.
    """
    total = int(rng.integers(min_events, max_events + 1))
    n_chains = int(rng.integers(2, 5))
    n_chains = min(n_chains, total)
    cuts = sorted(rng.choice(np.arange(1, total), size=n_chains - 1, replace=False))
    sizes = np.diff([0, *cuts, total])
    builder = PosetBuilder()
    chain_ids = []
    for ci, size in enumerate(sizes):
        cid = f"c{ci}"
        chain_ids.append(cid)
        builder.add_chain(cid, [f"c{ci}e{j + 1:03d}" for j in range(int(size))])
    events_of = {
        cid: [f"{cid}e{j + 1:03d}" for j in range(int(size))]
        for cid, size in zip(chain_ids, sizes)
    }
    n_attempts = int(edge_factor * total)
    for _ in range(n_attempts):
        ca, cb = rng.choice(len(chain_ids), size=2, replace=False)
        ca_id, cb_id = chain_ids[ca], chain_ids[cb]
        src = events_of[ca_id][int(rng.integers(len(events_of[ca_id])))]
        dst = events_of[cb_id][int(rng.integers(len(events_of[cb_id])))]
        try:
            builder.add_influence(src, dst)
        except DomainError:
            continue
    return builder.freeze()
