"""Partially ordered sets of influence events.

Events live on totally ordered chains (particles and observers) connected by
chain-successor edges; influence edges connect events on distinct chains.  The
induced reachability order is served from per-chain projection labels computed
once at freeze time: for every event and every chain the least chain event it
reaches and the greatest chain event that reaches it.  Order queries and
projections are then O(1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from .errors import CycleError, DomainError, UnknownEventError

EventId = str

_NO_FWD = 1 << 60  # sentinel: no forward projection (min-friendly)
_NO_BWD = -1       # sentinel: no backward projection (max-friendly)


@dataclass(frozen=True)
class Chain:
    """A totally ordered sequence of events with integer valuations."""

    chain_id: str
    events: tuple[EventId, ...]
    valuations: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.events) != len(self.valuations):
            raise DomainError(
                f"chain {self.chain_id!r}: {len(self.events)} events but "
                f"{len(self.valuations)} valuations"
            )
        if len(set(self.events)) != len(self.events):
            raise DomainError(f"chain {self.chain_id!r}: duplicate event ids")
        for a, b in zip(self.valuations, self.valuations[1:]):
            if b <= a:
                raise DomainError(
                    f"chain {self.chain_id!r}: valuations must strictly increase "
                    f"({a} then {b})"
                )
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(self.events)})

    def __len__(self) -> int:
        return len(self.events)

    def __contains__(self, event_id: EventId) -> bool:
        return event_id in self._index  # type: ignore[attr-defined]

    def index(self, event_id: EventId) -> int:
        try:
            return self._index[event_id]  # type: ignore[attr-defined]
        except KeyError:
            raise UnknownEventError(
                f"event {event_id!r} is not on chain {self.chain_id!r}"
            ) from None

    def valuation(self, event_id: EventId) -> int:
        return self.valuations[self.index(event_id)]

    def interval(self, lo: EventId, hi: EventId) -> "ChainInterval":
        """Closed interval [lo, hi] along this chain; length = v(hi) - v(lo)."""
        i, j = self.index(lo), self.index(hi)
        if i > j:
            raise DomainError(
                f"interval endpoints out of order on chain {self.chain_id!r}: "
                f"{lo!r} (v={self.valuations[i]}) after {hi!r} (v={self.valuations[j]})"
            )
        return ChainInterval(
            chain_id=self.chain_id,
            lo=lo,
            hi=hi,
            length=self.valuations[j] - self.valuations[i],
            members=self.events[i : j + 1],
        )


@dataclass(frozen=True)
class ChainInterval:
    """Closed interval along one chain: endpoints, member events, length."""

    chain_id: str
    lo: EventId
    hi: EventId
    length: int
    members: tuple[EventId, ...]


class PosetBuilder:
    """Mutable construction stage; ``freeze()`` yields an immutable Poset.

    Influence edges must connect events on two distinct chains.  By default an
    insertion that would create a cycle is rejected with CycleError; bulk
    builders that construct edges in causal order may pass check_cycles=False
    and rely on the topological sort in freeze() instead.
    """

    def __init__(self) -> None:
        self._chain_of: dict[EventId, Optional[str]] = {}
        self._chains: dict[str, tuple[list[EventId], list[int]]] = {}
        self._influence: list[tuple[EventId, EventId]] = []
        self._succ: dict[EventId, list[EventId]] = {}

    def add_event(self, event_id: EventId) -> None:
        """Register a chainless event (isolated unless later chained)."""
        if event_id in self._chain_of:
            raise DomainError(f"duplicate event id {event_id!r}")
        self._chain_of[event_id] = None
        self._succ[event_id] = []

    def add_chain(
        self,
        chain_id: str,
        events: Sequence[EventId],
        valuations: Optional[Sequence[int]] = None,
    ) -> None:
        """Declare a chain; valuations default to 1, 2, 3, ..."""
        if chain_id in self._chains:
            raise DomainError(f"duplicate chain id {chain_id!r}")
        events = list(events)
        if valuations is None:
            valuations = list(range(1, len(events) + 1))
        else:
            valuations = list(valuations)
        Chain(chain_id, tuple(events), tuple(valuations))  # validates
        for e in events:
            if e in self._chain_of:
                raise DomainError(f"duplicate event id {e!r}")
            self._chain_of[e] = chain_id
            self._succ[e] = []
        for a, b in zip(events, events[1:]):
            self._succ[a].append(b)
        self._chains[chain_id] = (events, valuations)

    def add_influence(self, src: EventId, dst: EventId, *, check_cycles: bool = True) -> None:
        for e in (src, dst):
            if e not in self._chain_of:
                raise UnknownEventError(f"unknown event id {e!r}")
        c_src, c_dst = self._chain_of[src], self._chain_of[dst]
        if c_src is None or c_dst is None:
            raise DomainError(
                f"influence edge {src!r}->{dst!r}: both events must lie on chains"
            )
        if c_src == c_dst:
            raise DomainError(
                f"influence edge {src!r}->{dst!r}: events are both on chain {c_src!r}"
            )
        if check_cycles and self._reaches(dst, src):
            raise CycleError(f"influence edge {src!r}->{dst!r} would create a cycle")
        self._influence.append((src, dst))
        self._succ[src].append(dst)

    def _reaches(self, start: EventId, goal: EventId) -> bool:
        if start == goal:
            return True
        stack = [start]
        seen = {start}
        while stack:
            for nxt in self._succ[stack.pop()]:
                if nxt == goal:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    def freeze(self) -> "Poset":
        chains = {
            cid: Chain(cid, tuple(evs), tuple(vals))
            for cid, (evs, vals) in self._chains.items()
        }
        return Poset(
            chains=chains,
            chainless=tuple(e for e, c in self._chain_of.items() if c is None),
            influence_edges=tuple(self._influence),
        )


class Poset:
    """Immutable event poset with O(1) order and projection queries.

    Construct via PosetBuilder (or ``from_text``).  All query methods are pure
    and safe for concurrent use.
    """

    def __init__(
        self,
        chains: Mapping[str, Chain],
        chainless: tuple[EventId, ...],
        influence_edges: tuple[tuple[EventId, EventId], ...],
    ) -> None:
        self._chains = dict(chains)
        self._chainless = chainless
        self._influence = influence_edges

        self._pos: dict[EventId, Optional[tuple[str, int]]] = {}
        for cid, chain in self._chains.items():
            for i, e in enumerate(chain.events):
                self._pos[e] = (cid, i)
        if len(self._pos) != sum(len(c) for c in self._chains.values()):
            raise DomainError("duplicate event ids across chains")
        for e in chainless:
            if e in self._pos:
                raise DomainError(f"duplicate event id {e!r}")
            self._pos[e] = None

        n = len(self._pos)
        self._ids: list[EventId] = list(self._pos)
        self._idx: dict[EventId, int] = {e: i for i, e in enumerate(self._ids)}

        succ: list[list[int]] = [[] for _ in range(n)]
        pred: list[list[int]] = [[] for _ in range(n)]
        self._chain_edges: list[tuple[EventId, EventId]] = []
        for chain in self._chains.values():
            for a, b in zip(chain.events, chain.events[1:]):
                succ[self._idx[a]].append(self._idx[b])
                pred[self._idx[b]].append(self._idx[a])
                self._chain_edges.append((a, b))
        for a, b in influence_edges:
            for e in (a, b):
                if e not in self._idx:
                    raise UnknownEventError(f"unknown event id {e!r}")
            ca, cb = self._pos[a], self._pos[b]
            if ca is None or cb is None or ca[0] == cb[0]:
                raise DomainError(
                    f"influence edge {a!r}->{b!r} must connect two distinct chains"
                )
            succ[self._idx[a]].append(self._idx[b])
            pred[self._idx[b]].append(self._idx[a])
        self._succ = succ
        self._pred = pred

        order = self._topological_order()
        # Least reachable chain index per (chain, event); greatest reaching dually.
        fwd: dict[str, list[int]] = {c: [_NO_FWD] * n for c in self._chains}
        bwd: dict[str, list[int]] = {c: [_NO_BWD] * n for c in self._chains}
        for v in reversed(order):
            p = self._pos[self._ids[v]]
            for cid, lab in fwd.items():
                best = min((lab[s] for s in succ[v]), default=_NO_FWD)
                if p is not None and p[0] == cid and p[1] < best:
                    best = p[1]
                lab[v] = best
        for v in order:
            p = self._pos[self._ids[v]]
            for cid, lab in bwd.items():
                best = max((lab[u] for u in pred[v]), default=_NO_BWD)
                if p is not None and p[0] == cid and p[1] > best:
                    best = p[1]
                lab[v] = best
        self._fwd = fwd
        self._bwd = bwd

    def _topological_order(self) -> list[int]:
        n = len(self._ids)
        indeg = [len(p) for p in self._pred]
        ready = [v for v in range(n) if indeg[v] == 0]
        order: list[int] = []
        while ready:
            v = ready.pop()
            order.append(v)
            for s in self._succ[v]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    ready.append(s)
        if len(order) != n:
            raise CycleError("event graph contains a directed cycle")
        return order

    # -- introspection ----------------------------------------------------

    @property
    def chains(self) -> Mapping[str, Chain]:
        return self._chains

    @property
    def influence_edges(self) -> tuple[tuple[EventId, EventId], ...]:
        return self._influence

    @property
    def chain_edges(self) -> tuple[tuple[EventId, EventId], ...]:
        return tuple(self._chain_edges)

    def events(self) -> tuple[EventId, ...]:
        return tuple(sorted(self._ids))

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, event_id: EventId) -> bool:
        return event_id in self._idx

    def __repr__(self) -> str:
        return (
            f"Poset({len(self._ids)} events, {len(self._chains)} chains, "
            f"{len(self._influence)} influence edges)"
        )

    def chain(self, chain_id: str) -> Chain:
        try:
            return self._chains[chain_id]
        except KeyError:
            raise UnknownEventError(f"unknown chain id {chain_id!r}") from None

    def owning_chain(self, event_id: EventId) -> Optional[str]:
        self._require(event_id)
        p = self._pos[event_id]
        return None if p is None else p[0]

    def successors(self, event_id: EventId) -> tuple[EventId, ...]:
        self._require(event_id)
        return tuple(self._ids[s] for s in self._succ[self._idx[event_id]])

    def predecessors(self, event_id: EventId) -> tuple[EventId, ...]:
        self._require(event_id)
        return tuple(self._ids[u] for u in self._pred[self._idx[event_id]])

    def _require(self, event_id: EventId) -> EventId:
        if event_id not in self._idx:
            raise UnknownEventError(f"unknown event id {event_id!r}")
        return event_id

    def _as_chain(self, target: Union[str, Chain]) -> Chain:
        if isinstance(target, Chain):
            target = target.chain_id
        return self.chain(target)

    # -- order queries -----------------------------------------------------

    def leq(self, x: EventId, y: EventId) -> bool:
        """True iff y is reachable from x (x precedes-or-equals y)."""
        self._require(x)
        self._require(y)
        if x == y:
            return True
        p = self._pos[y]
        if p is None:
            return False
        cid, j = p
        return self._fwd[cid][self._idx[x]] <= j

    def forward_project(self, x: EventId, target: Union[str, Chain]) -> Optional[EventId]:
        """Least event on the target chain that includes x, if any."""
        self._require(x)
        chain = self._as_chain(target)
        j = self._fwd[chain.chain_id][self._idx[x]]
        return None if j == _NO_FWD else chain.events[j]

    def backward_project(self, x: EventId, target: Union[str, Chain]) -> Optional[EventId]:
        """Greatest event on the target chain included by x, if any."""
        self._require(x)
        chain = self._as_chain(target)
        j = self._bwd[chain.chain_id][self._idx[x]]
        return None if j == _NO_BWD else chain.events[j]

    def chain_interval(self, target: Union[str, Chain], lo: EventId, hi: EventId) -> ChainInterval:
        return self._as_chain(target).interval(lo, hi)

    # -- serialization -----------------------------------------------------

    def to_text(self) -> str:
        """Line-oriented text form, deterministically ordered (sorted by id)."""
        lines: list[str] = []
        chained: list[tuple[EventId, str, int]] = []
        for cid, chain in self._chains.items():
            for e, v in zip(chain.events, chain.valuations):
                chained.append((e, cid, v))
        for e, cid, v in sorted(chained):
            lines.append(f"event {e} chain={cid} v={v}")
        for e in sorted(self._chainless):
            lines.append(f"event {e}")
        for a, b in sorted(self._chain_edges):
            lines.append(f"edge chain {a} {b}")
        for a, b in sorted(self._influence):
            lines.append(f"edge influence {a} {b}")
        return "\n".join(lines) + "\n"

    def write_text(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())


def from_text(text: str) -> Poset:
    """Parse the line-oriented poset format produced by ``Poset.to_text``.

    Chains are reconstructed from the per-event chain/valuation attributes;
    explicit chain-edge records are checked against chain adjacency.  Cycle
    detection happens once at freeze time.
    """
    per_chain: dict[str, list[tuple[int, EventId]]] = {}
    chainless: list[EventId] = []
    chain_edge_records: list[tuple[EventId, EventId]] = []
    influence_records: list[tuple[EventId, EventId]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "event":
            if len(parts) == 2:
                chainless.append(parts[1])
                continue
            if len(parts) != 4:
                raise DomainError(f"line {lineno}: malformed event record {raw!r}")
            eid = parts[1]
            attrs = dict(p.split("=", 1) for p in parts[2:] if "=" in p)
            if set(attrs) != {"chain", "v"}:
                raise DomainError(f"line {lineno}: malformed event record {raw!r}")
            try:
                v = int(attrs["v"])
            except ValueError:
                raise DomainError(f"line {lineno}: bad valuation in {raw!r}") from None
            per_chain.setdefault(attrs["chain"], []).append((v, eid))
        elif parts[0] == "edge":
            if len(parts) != 4 or parts[1] not in ("chain", "influence"):
                raise DomainError(f"line {lineno}: malformed edge record {raw!r}")
            rec = (parts[2], parts[3])
            if parts[1] == "chain":
                chain_edge_records.append(rec)
            else:
                influence_records.append(rec)
        else:
            raise DomainError(f"line {lineno}: unknown record {raw!r}")

    builder = PosetBuilder()
    for cid in sorted(per_chain):
        rows = sorted(per_chain[cid])
        builder.add_chain(cid, [e for _, e in rows], [v for v, _ in rows])
    for e in chainless:
        builder.add_event(e)

    adjacent = set()
    for cid in per_chain:
        evs = [e for _, e in sorted(per_chain[cid])]
        adjacent.update(zip(evs, evs[1:]))
    declared = set(chain_edge_records)
    if declared != adjacent:
        missing = sorted(adjacent - declared)
        extra = sorted(declared - adjacent)
        raise DomainError(
            f"chain edge records disagree with chain adjacency "
            f"(missing={missing[:3]}, extra={extra[:3]})"
        )
    for src, dst in influence_records:
        builder.add_influence(src, dst, check_cycles=False)
    return builder.freeze()


def read_text(path) -> Poset:
    with open(path, "r", encoding="utf-8") as fh:
        return from_text(fh.read())
