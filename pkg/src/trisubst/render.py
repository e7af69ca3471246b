"""Deterministic SVG drawings of patches with edge-orientation arrows."""
from __future__ import annotations

import math
from typing import Optional, Sequence

from .geometry import lattice

PALETTE = ("#f2c14e", "#5fad56", "#4d9de0", "#e15554", "#7768ae", "#3bb273", "#e1bc29", "#9e6240")
ARROW_AT = 0.25  # arrowheads sit at this fraction of the edge, measured from the arrow origin


def _fmt(x: float) -> str:
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


class Drawing:
    """Accumulates patches, each laid out at its own offset."""

    def __init__(self, n: int):
        self.n = n
        self.lat = lattice(n)
        self.items: list[str] = []
        self.bounds = [math.inf, math.inf, -math.inf, -math.inf]

    def _xy(self, p, offset):
        x, y = self.lat.embed(tuple(p))
        x, y = x + offset[0], -(y + offset[1])
        b = self.bounds
        b[0], b[1], b[2], b[3] = min(b[0], x), min(b[1], y), max(b[2], x), max(b[3], y)
        return x, y

    def patch(self, triangles: Sequence[tuple], protos: Sequence[int], arrows: Optional[Sequence[tuple]] = None,
              offset=(0.0, 0.0), label: Optional[str] = None) -> None:
        """Tiles as filled outlines; ``arrows`` gives, per tile, the start point of each edge's arrow."""
        lengths = []
        for tri, proto in zip(triangles, protos):
            pts = [self._xy(v, offset) for v in tri]
            coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
            self.items.append(f'<polygon points="{coords}" fill="{PALETTE[proto % len(PALETTE)]}" '
                              f'stroke="#222" stroke-width="0.02"/>')
            lengths += [math.dist(pts[i], pts[(i + 1) % 3]) for i in range(3)]
        if label:
            x, y = self._xy(triangles[0][0], offset) if triangles else (offset[0], -offset[1])
            self.items.append(f'<text x="{_fmt(x)}" y="{_fmt(y - 0.3)}" font-size="0.4">{label}</text>')
        if arrows is None or not lengths:
            return
        head = 0.12 * min(lengths)
        seen = set()
        for tri, starts in zip(triangles, arrows):
            for e in range(3):
                a, b = tri[(e + 1) % 3], tri[(e + 2) % 3]
                key = frozenset((a, b))
                if key in seen:
                    continue
                seen.add(key)
                origin, target = (a, b) if starts[e] == a else (b, a)
                ox, oy = self._xy(origin, offset)
                tx, ty = self._xy(target, offset)
                dx, dy = tx - ox, ty - oy
                norm = math.hypot(dx, dy)
                ux, uy = dx / norm, dy / norm
                px, py = ox + ARROW_AT * dx, oy + ARROW_AT * dy
                tip = (px + head * ux, py + head * uy)
                left = (px - head * 0.5 * uy, py + head * 0.5 * ux)
                right = (px + head * 0.5 * uy, py - head * 0.5 * ux)
                pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (tip, left, right))
                self.items.append(f'<polygon points="{pts}" fill="#000"/>')

    def svg(self) -> str:
        x0, y0, x1, y1 = self.bounds
        if not math.isfinite(x0):
            x0 = y0 = 0.0
            x1 = y1 = 1.0
        pad = 0.05 * max(x1 - x0, y1 - y0, 1.0)
        box = f"{_fmt(x0 - pad)} {_fmt(y0 - pad)} {_fmt(x1 - x0 + 2 * pad)} {_fmt(y1 - y0 + 2 * pad)}"
        body = "\n".join(self.items)
        return ('<?xml version="1.0" encoding="UTF-8"?>\n'
                f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{box}" width="800" '
                f'height="{_fmt(800 * (y1 - y0 + 2 * pad) / (x1 - x0 + 2 * pad))}">\n'
                f"{body}\n</svg>\n")
