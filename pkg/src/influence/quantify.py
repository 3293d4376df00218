"""Quantification of intervals by a coordinated pair of observer chains.

The pair's right chain measures spans counted as ``dp`` (right-moving steps),
the left chain spans counted as ``dq``.  Emergent time, space, interval and
velocity follow from the change of variables dt = (dp+dq)/2, dx = (dp-dq)/2,
so ds^2 = dp*dq = dt^2 - dx^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .errors import CoordinationError, DomainError, ProjectionIncompleteError
from .poset import Chain, EventId, Poset


@dataclass(frozen=True)
class IntervalQuant:
    """One generalized interval quantified as (dp, dq) plus derived measures.

    ``beta`` is None when dt = 0 (velocity undefined, not an error).
    """

    dp: float
    dq: float
    dt: float
    dx: float
    ds2: float
    beta: Optional[float]


def quantify_interval(dp: float, dq: float) -> IntervalQuant:
    """Fill all derived measures for a (dp, dq) pair."""
    dt = (dp + dq) / 2.0
    dx = (dp - dq) / 2.0
    beta = None if dt == 0.0 else dx / dt
    return IntervalQuant(dp=float(dp), dq=float(dq), dt=dt, dx=dx, ds2=dp * dq, beta=beta)


@dataclass(frozen=True)
class CoordinatedPair:
    """Two observer chains of one poset serving as a coordinate frame.

    Use ``CoordinatedPair.create`` to get a checked pair; constructing
    directly skips the coordination check (used by the checker itself and by
    tests that build broken pairs on purpose).
    """

    poset: Poset
    right: Chain
    left: Chain

    @classmethod
    def create(
        cls, poset: Poset, right: Union[str, Chain], left: Union[str, Chain]
    ) -> "CoordinatedPair":
        if isinstance(right, Chain):
            right = right.chain_id
        if isinstance(left, Chain):
            left = left.chain_id
        pair = cls(poset=poset, right=poset.chain(right), left=poset.chain(left))
        ok, diagnostics = check_coordination(pair)
        if not ok:
            raise CoordinationError(
                "chains are not coordinated: " + "; ".join(diagnostics)
            )
        return pair

    def _own(self, chain: Chain) -> None:
        if self.poset.chains.get(chain.chain_id) is not chain:
            raise DomainError(
                f"chain {chain.chain_id!r} does not belong to this pair's poset"
            )


def _projection_map(poset: Poset, src: Chain, dst: Chain, forward: bool):
    """Per-source-event projection indices onto dst (None where absent)."""
    out = []
    for e in src.events:
        t = poset.forward_project(e, dst) if forward else poset.backward_project(e, dst)
        out.append(None if t is None else dst.index(t))
    return out

def _check_map(
    poset: Poset, src: Chain, dst: Chain, forward: bool, diagnostics: list[str]
) -> bool:
    """Strictly increasing and length-preserving over the covered run."""
    kind = "forward" if forward else "backward"
    label = f"{kind} {src.chain_id}->{dst.chain_id}"
    idxs = _projection_map(poset, src, dst, forward)
    covered = [i for i, j in enumerate(idxs) if j is not None]
    if not covered:
        diagnostics.append(f"{label}: no covered segment")
        return True
    if covered != list(range(covered[0], covered[-1] + 1)):
        diagnostics.append(f"{label}: covered events are not contiguous")
        return False
    ok = True
    for i0, i1 in zip(covered, covered[1:]):
        d_src = src.valuations[i1] - src.valuations[i0]
        d_dst = dst.valuations[idxs[i1]] - dst.valuations[idxs[i0]]
        if d_dst <= 0:
            diagnostics.append(
                f"{label}: [{src.events[i0]},{src.events[i1]}] projects "
                f"non-injectively (target step {d_dst})"
            )
            ok = False
            break
        if d_dst != d_src:
            diagnostics.append(
                f"{label}: interval [{src.events[i0]},{src.events[i1]}] has "
                f"length {d_src} but projects to length {d_dst}"
            )
            ok = False
            break
    return ok


def check_coordination(pair: CoordinatedPair) -> tuple[bool, list[str]]:
    """Compatibility (bijective projections) plus interval-length agreement.

    Returns (ok, diagnostics); diagnostics name the first violating interval
    per direction, or note an empty covered segment (which passes vacuously).
    """
    pair._own(pair.right)
    pair._own(pair.left)
    diagnostics: list[str] = []
    if pair.right.chain_id == pair.left.chain_id:
        return True, ["pair of a chain with itself: identity projections"]
    ok = True
    for src, dst in ((pair.right, pair.left), (pair.left, pair.right)):
        for forward in (True, False):
            ok &= _check_map(pair.poset, src, dst, forward, diagnostics)
    return ok, diagnostics


def _project_or_raise(poset: Poset, x: EventId, chain: Chain, forward: bool) -> int:
    y = poset.forward_project(x, chain) if forward else poset.backward_project(x, chain)
    if y is None:
        kind = "forward" if forward else "backward"
        raise ProjectionIncompleteError(
            f"event {x!r} has no {kind} projection onto chain {chain.chain_id!r}"
        )
    return chain.valuation(y)


def quantify_length(pair: CoordinatedPair, lo: EventId, hi: EventId) -> float:
    """Length of a closed interval on the right chain, measured by the pair.

    Returns (dp + dq)/2 with dq obtained by projecting the endpoints onto the
    left chain; equals dp whenever the pair is coordinated.
    """
    dp = float(pair.right.valuation(hi) - pair.right.valuation(lo))
    if dp < 0:
        raise DomainError(f"interval endpoints out of order: {lo!r}, {hi!r}")
    q_lo = _project_or_raise(pair.poset, lo, pair.left, forward=True)
    q_hi = _project_or_raise(pair.poset, hi, pair.left, forward=True)
    return (dp + (q_hi - q_lo)) / 2.0


def distance(pair: CoordinatedPair, x_right: EventId, y_left: EventId) -> float:
    """Distance between the pair's chains from one generalized interval.

    dp spans from x_right to the forward projection of y_left onto the right
    chain; dq spans from the forward projection of x_right onto the left chain
    to y_left.  The result is (dp - dq)/2 and is independent of the chosen
    events for a coordinated pair.
    """
    dp = _project_or_raise(pair.poset, y_left, pair.right, forward=True) - float(
        pair.right.valuation(x_right)
    )
    dq = float(pair.left.valuation(y_left)) - _project_or_raise(
        pair.poset, x_right, pair.left, forward=True
    )
    return (dp - dq) / 2.0


def quantify_generalized(
    pair: CoordinatedPair,
    x: EventId,
    y: EventId,
    *,
    projection: str = "forward",
) -> IntervalQuant:
    """Quantify the generalized interval [x, y] for arbitrary poset events.

    Both events are projected onto both chains of the pair, either forward
    (default) or backward; ds^2 = dp*dq either way.
    """
    if projection not in ("forward", "backward"):
        raise DomainError(f"projection must be 'forward' or 'backward', got {projection!r}")
    forward = projection == "forward"
    dp = _project_or_raise(pair.poset, y, pair.right, forward) - _project_or_raise(
        pair.poset, x, pair.right, forward
    )
    dq = _project_or_raise(pair.poset, y, pair.left, forward) - _project_or_raise(
        pair.poset, x, pair.left, forward
    )
    return quantify_interval(float(dp), float(dq))
