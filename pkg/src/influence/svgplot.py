"""Hand-emitted SVG plots: spacetime diagrams and windowed-velocity curves.

No plotting dependency: output is a standalone 800x600 SVG with a fixed
coordinate mapping so files are byte-stable golden fixtures.  World
coordinates (u, w) map to pixels via

    px = MARGIN + (u - u_min) / (u_max - u_min) * (WIDTH - 2 MARGIN)
    py = HEIGHT - MARGIN - (w - w_min) / (w_max - w_min) * (HEIGHT - 2 MARGIN)

(the vertical axis grows upward).  All pixel values are formatted with two
decimals.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .poset import Poset
from .simulation import OBS_RIGHT_CHAIN

WIDTH = 800
HEIGHT = 600
MARGIN = 60.0


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Mapper:
    def __init__(self, u_min, u_max, w_min, w_max):
        if u_max <= u_min:
            u_max = u_min + 1.0
        if w_max <= w_min:
            w_max = w_min + 1.0
        self.u_min, self.u_max = u_min, u_max
        self.w_min, self.w_max = w_min, w_max

    def x(self, u: float) -> float:
        return MARGIN + (u - self.u_min) / (self.u_max - self.u_min) * (WIDTH - 2 * MARGIN)

    def y(self, w: float) -> float:
        return HEIGHT - MARGIN - (w - self.w_min) / (self.w_max - self.w_min) * (
            HEIGHT - 2 * MARGIN
        )


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="24" text-anchor="middle" font-size="16" '
        f'font-family="sans-serif">{title}</text>',
    ]


def _axes(m: _Mapper, x_label: str, y_label: str, n_ticks: int = 5) -> list[str]:
    parts = [
        f'<rect x="{_fmt(MARGIN)}" y="{_fmt(MARGIN)}" width="{_fmt(WIDTH - 2 * MARGIN)}" '
        f'height="{_fmt(HEIGHT - 2 * MARGIN)}" fill="none" stroke="black"/>'
    ]
    for i in range(n_ticks):
        frac = i / (n_ticks - 1)
        u = m.u_min + frac * (m.u_max - m.u_min)
        w = m.w_min + frac * (m.w_max - m.w_min)
        px, py = m.x(u), m.y(w)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{_fmt(HEIGHT - MARGIN)}" x2="{_fmt(px)}" '
            f'y2="{_fmt(HEIGHT - MARGIN + 6)}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{_fmt(HEIGHT - MARGIN + 20)}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif">{u:.3g}</text>'
        )
        parts.append(
            f'<line x1="{_fmt(MARGIN - 6)}" y1="{_fmt(py)}" x2="{_fmt(MARGIN)}" '
            f'y2="{_fmt(py)}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_fmt(MARGIN - 10)}" y="{_fmt(py + 4)}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">{w:.3g}</text>'
        )
    parts.append(
        f'<text x="{WIDTH / 2:.2f}" y="{HEIGHT - 14:.2f}" text-anchor="middle" '
        f'font-size="13" font-family="sans-serif">{x_label}</text>'
    )
    parts.append(
        f'<text x="18" y="{HEIGHT / 2:.2f}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif" transform="rotate(-90 18 {HEIGHT / 2:.2f})">{y_label}</text>'
    )
    return parts


def _polyline(points: Sequence[tuple[float, float]], cls: str, stroke: str, width: str = "1.5") -> str:
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    return f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{stroke}" stroke-width="{width}"/>'


def spacetime_svg(poset: Poset, title: str = "spacetime diagram") -> str:
    """Zitter worldline of the walker chain plus observer worldlines and
    influence rays.

    The walker chain is the one with the most outgoing influence edges; each
    of its emissions advances t by 1/2 and x by +-1/2 (toward the observer the
    influence targets), receipts mark the worldline without advancing it.
    """
    if not poset.influence_edges:
        raise DomainError("poset has no influence edges; nothing to draw")
    outgoing: dict[str, int] = {cid: 0 for cid in poset.chains}
    for src, _dst in poset.influence_edges:
        cid = poset.owning_chain(src)
        if cid is not None:
            outgoing[cid] += 1
    walker_id = max(sorted(outgoing), key=lambda c: outgoing[c])
    if outgoing[walker_id] == 0:
        raise DomainError("no chain emits influence; cannot identify the walker")
    observers = [c for c in sorted(poset.chains) if c != walker_id]
    if not observers:
        raise DomainError("poset has no observer chains")

    walker = poset.chain(walker_id)
    target_of = {src: dst for src, dst in poset.influence_edges if poset.owning_chain(src) == walker_id}
    source_of = {dst: src for src, dst in poset.influence_edges if poset.owning_chain(dst) == walker_id}

    # Side assignment: prefer the canonical chain names, else first emission
    # target is the right-hand observer.
    if OBS_RIGHT_CHAIN in observers:
        right_obs = OBS_RIGHT_CHAIN
    else:
        first_target = next(
            (poset.owning_chain(target_of[e]) for e in walker.events if e in target_of),
            observers[0],
        )
        right_obs = first_target

    t = 0.0
    x = 0.0
    worldline = [(x, t)]
    arrivals: dict[str, tuple[float, float]] = {}
    emission_rays: list[tuple[float, float, str, str]] = []  # x, t, side, arrival id
    receipt_marks: list[tuple[float, float, str, str]] = []  # x, t, side, source id
    for e in walker.events:
        if e in target_of:
            arrival = target_of[e]
            side = "right" if poset.owning_chain(arrival) == right_obs else "left"
            x0, t0 = x, t
            x += 0.5 if side == "right" else -0.5
            t += 0.5
            worldline.append((x, t))
            emission_rays.append((x0, t0, side, arrival))
        elif e in source_of:
            src = source_of[e]
            side = "right" if poset.owning_chain(src) == right_obs else "left"
            receipt_marks.append((x, t, side, src))

    xs = [p[0] for p in worldline]
    x_right_obs = max(xs) + 1.0
    x_left_obs = min(xs) - 1.0
    for x0, t0, side, arrival in emission_rays:
        x_obs = x_right_obs if side == "right" else x_left_obs
        arrivals[arrival] = (x_obs, t0 + abs(x_obs - x0))

    t_max = max(max(p[1] for p in worldline), max((a[1] for a in arrivals.values()), default=1.0))
    m = _Mapper(x_left_obs - 0.5, x_right_obs + 0.5, 0.0, t_max + 0.5)

    parts = _header(title)
    parts += _axes(m, "x", "t")
    for x_obs, cls in ((x_right_obs, "observer-right"), (x_left_obs, "observer-left")):
        parts.append(
            f'<line class="{cls}" x1="{_fmt(m.x(x_obs))}" y1="{_fmt(m.y(0.0))}" '
            f'x2="{_fmt(m.x(x_obs))}" y2="{_fmt(m.y(t_max + 0.5))}" '
            f'stroke="gray" stroke-width="2"/>'
        )
    for x0, t0, side, arrival in emission_rays:
        ax, at = arrivals[arrival]
        parts.append(
            f'<line class="emission-{side}" x1="{_fmt(m.x(x0))}" y1="{_fmt(m.y(t0))}" '
            f'x2="{_fmt(m.x(ax))}" y2="{_fmt(m.y(at))}" stroke="#888" '
            f'stroke-width="0.8" stroke-dasharray="4 3"/>'
        )
        parts.append(
            f'<circle class="arrival-{side}" cx="{_fmt(m.x(ax))}" cy="{_fmt(m.y(at))}" '
            f'r="2.5" fill="gray"/>'
        )
    for x0, t0, side, src in receipt_marks:
        if src in arrivals:
            sx, st = arrivals[src]
            parts.append(
                f'<line class="receipt-{side}" x1="{_fmt(m.x(sx))}" y1="{_fmt(m.y(st))}" '
                f'x2="{_fmt(m.x(x0))}" y2="{_fmt(m.y(t0))}" stroke="#c33" '
                f'stroke-width="0.8" stroke-dasharray="2 2"/>'
            )
        parts.append(
            f'<circle class="receipt-mark-{side}" cx="{_fmt(m.x(x0))}" '
            f'cy="{_fmt(m.y(t0))}" r="2.5" fill="#c33"/>'
        )
    parts.append(
        _polyline([(m.x(px), m.y(pt)) for px, pt in worldline], "worldline", "black", "2")
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def measured_svg(
    tau_mid: np.ndarray,
    beta_hat: np.ndarray,
    analytic_beta: Optional[np.ndarray] = None,
    band: float = 0.02,
    title: str = "windowed velocity",
) -> str:
    """Scatter of windowed velocity estimates with optional analytic overlay
    and a +-band residual envelope around it."""
    tau_mid = np.asarray(tau_mid, dtype=float)
    beta_hat = np.asarray(beta_hat, dtype=float)
    if len(tau_mid) == 0 or len(tau_mid) != len(beta_hat):
        raise DomainError("need matching, non-empty tau and beta arrays")
    lo = min(float(beta_hat.min()), -0.05)
    hi = max(float(beta_hat.max()), 0.05)
    if analytic_beta is not None:
        lo = min(lo, float(np.min(analytic_beta)) - band)
        hi = max(hi, float(np.max(analytic_beta)) + band)
    pad = 0.08 * (hi - lo)
    m = _Mapper(float(tau_mid.min()), float(tau_mid.max()), lo - pad, hi + pad)

    parts = _header(title)
    parts += _axes(m, "tau", "beta")
    if analytic_beta is not None:
        analytic_beta = np.asarray(analytic_beta, dtype=float)
        upper = [(m.x(t), m.y(b + band)) for t, b in zip(tau_mid, analytic_beta)]
        lower = [(m.x(t), m.y(b - band)) for t, b in zip(tau_mid, analytic_beta)]
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in upper + lower[::-1])
        parts.append(
            f'<polygon class="residual-band" points="{pts}" fill="#9cf" '
            f'fill-opacity="0.35" stroke="none"/>'
        )
        parts.append(
            _polyline(
                [(m.x(t), m.y(b)) for t, b in zip(tau_mid, analytic_beta)],
                "analytic",
                "#06c",
            )
        )
    for t, b in zip(tau_mid, beta_hat):
        parts.append(
            f'<circle class="sample" cx="{_fmt(m.x(t))}" cy="{_fmt(m.y(b))}" r="2.5" '
            f'fill="black" fill-opacity="0.7"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
