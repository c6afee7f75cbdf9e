"""Deterministic hand-rolled SVG output: frames and phase portraits.

Frames show the chessboard cells (alpha shaded), the boundary polyline and
pinned facets highlighted.  Everything is emitted with fixed formatting so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import math

from .medium import ChessboardMedium

_FMT = "{:.6g}"
MAX_CELLS = 20000


def _f(x: float) -> str:
    v = _FMT.format(x)
    return "0" if v == "-0" else v


class _Canvas:
    def __init__(self, x0, y0, x1, y1, width=480):
        self.x0, self.y0, self.x1, self.y1 = x0, y0, x1, y1
        self.scale = width / max(x1 - x0, 1e-12)
        self.w = width
        self.h = (y1 - y0) * self.scale
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(self.w)}" height="{_f(self.h)}" '
            f'viewBox="0 0 {_f(self.w)} {_f(self.h)}">'
        ]

    def map(self, x, y):
        return (x - self.x0) * self.scale, (self.y1 - y) * self.scale

    def rect(self, x, y, w, h, fill):
        px, py = self.map(x, y + h)
        self.parts.append(
            f'<rect x="{_f(px)}" y="{_f(py)}" width="{_f(w * self.scale)}" height="{_f(h * self.scale)}" fill="{fill}"/>'
        )

    def polyline(self, pts, stroke, width, closed=True, fill="none"):
        mapped = " ".join(f"{_f(px)},{_f(py)}" for px, py in (self.map(x, y) for x, y in pts))
        tag = "polygon" if closed else "polyline"
        self.parts.append(f'<{tag} points="{mapped}" fill="{fill}" stroke="{stroke}" stroke-width="{_f(width)}"/>')

    def line(self, a, b, stroke, width):
        (x0, y0), (x1, y1) = self.map(*a), self.map(*b)
        self.parts.append(
            f'<line x1="{_f(x0)}" y1="{_f(y0)}" x2="{_f(x1)}" y2="{_f(y1)}" stroke="{stroke}" stroke-width="{_f(width)}"/>'
        )

    def text(self, x, y, s):
        px, py = self.map(x, y)
        self.parts.append(f'<text x="{_f(px)}" y="{_f(py)}" font-size="12" font-family="monospace">{s}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def render_frame(vertices, medium: ChessboardMedium, pinned_segments=(), bounds=None, label="") -> str:
    if bounds is None:
        xs = [v[0] for v in vertices]
        ys = [v[1] for v in vertices]
        pad = 2.0 * medium.half
        bounds = (min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad)
    x0, y0, x1, y1 = bounds
    cv = _Canvas(x0, y0, x1, y1)
    cv.rect(x0, y0, x1 - x0, y1 - y0, "#ffffff")
    h = medium.half
    i0, i1 = math.floor(x0 / h), math.ceil(x1 / h)
    j0, j1 = math.floor(y0 / h), math.ceil(y1 / h)
    if (i1 - i0) * (j1 - j0) <= MAX_CELLS:
        for i in range(i0, i1):
            for j in range(j0, j1):
                if (i + j) % 2 == 0:
                    cv.rect(i * h, j * h, h, h, "#d8d8d8")
    if len(vertices) >= 3:
        cv.polyline(vertices, "#1040c0", 2.0, closed=True)
    for a, b in pinned_segments:
        cv.line(a, b, "#c02020", 3.0)
    if label:
        cv.text(x0 + 0.02 * (x1 - x0), y1 - 0.04 * (y1 - y0), label)
    return cv.render()


def render_phase_portrait(alpha: float, beta: float, l1: float, l2: float, t_end: float) -> str:
    """Portrait of the shrinking system with the mixed region shaded."""
    from .effective import shrink_system_dense

    s = alpha + beta
    lmax = max(l1, l2, (-8.0 / s if s < 0 else 0.0), 4.0) * 1.1
    cv = _Canvas(0.0, 0.0, lmax, lmax)
    cv.rect(0.0, 0.0, lmax, lmax, "#ffffff")
    if s < 0:
        leq = -4.0 / s
        # region where one facet is supercritical and the total speed positive
        npts = 120
        pts = []
        for k in range(npts + 1):
            x = leq + (lmax - leq) * k / npts
            y = min(leq, 1.0 / max(1.0 / leq - 1.0 / x, 1e-12) if (1.0 / leq - 1.0 / x) > 0 else leq)
            u_bound = 1.0 / x + 0.5 * s
            y_u = -1.0 / u_bound if u_bound < 0 else lmax
            pts.append((x, min(leq, y_u)))
        region = [(leq, 0.0)] + pts[:1] + [(x, y) for x, y in pts] + [(lmax, 0.0)]
        cv.polyline(region, "none", 0.0, closed=True, fill="#ffe0b0")
        cv.line((leq, 0.0), (leq, lmax), "#808080", 1.0)
        cv.line((0.0, leq), (lmax, leq), "#808080", 1.0)
    for frac in (0.5, 0.75, 1.0):
        a, b = l1 * frac, l2 * frac
        if a <= 0 or b <= 0:
            continue
        sol = shrink_system_dense(max(a, b), min(a, b), alpha, beta, t_end)
        ts = [sol.t[0] + (sol.t[-1] - sol.t[0]) * k / 200 for k in range(201)]
        pts = [(float(sol.sol(t)[0]), float(sol.sol(t)[1])) for t in ts]
        pts = [(x, y) for x, y in pts if 0 < x <= lmax and 0 < y <= lmax]
        if len(pts) >= 2:
            cv.polyline(pts, "#1040c0", 1.5, closed=False)
    cv.line((0.0, 0.0), (lmax, lmax), "#b0b0b0", 0.5)
    cv.text(0.05 * lmax, 0.95 * lmax, f"facet lengths, a+b={_f(s)}")
    return cv.render()
