"""Homogenized limit dynamics of squares and rectangles.

In the vanishing-period limit the horizontal and vertical facets move with
velocity (curvature + mean forcing), while 45-degree corner cuts appear
wherever a facet would move outward, and those cuts never move.  The limit
shapes are therefore squares, rectangles, or octagons cut from a fixed
rotated-square frame, with facet lengths obeying small ODE systems:

    shrinking:   l1' = -4/l2 - (a+b),   l2' = -4/l1 - (a+b)
    octagon:     l'  =  4/l  + (a+b)    (each moving facet, decoupled)

The shrinking system conserves J(l1, l2) = 4*(log l2 - log l1) +
(a+b)*(l2 - l1); U(l1, l2) = 1/l1 + 1/l2 + (a+b)/2 is half the sum of the
two facet velocities and separates rectangle-like from octagon-like
behaviour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from scipy.integrate import solve_ivp

RTOL = 1e-9
ATOL = 1e-12
EXTINCT_LEN = 1e-7


class CaseTag(Enum):
    SQUARE_SHRINK = "square_shrink"
    SQUARE_CONFINE = "square_confine"
    RECT_SHRINK = "rect_shrink"
    RECT_CONFINE = "rect_confine"
    RECT_MIXED_J_ZERO = "rect_mixed_J_zero"
    RECT_MIXED_J_NEG = "rect_mixed_J_neg"
    RECT_MIXED_J_POS = "rect_mixed_J_pos"


def invariants(l1: float, l2: float, alpha: float, beta: float) -> tuple[float, float]:
    """The velocity-sum invariant U and the conserved quantity J."""
    if l1 <= 0 or l2 <= 0:
        raise ValueError("facet lengths must be positive")
    s = alpha + beta
    u = 1.0 / l1 + 1.0 / l2 + 0.5 * s
    j = 4.0 * (math.log(l2) - math.log(l1)) + s * (l2 - l1)
    return u, j


def classify_square(l0: float, alpha: float, beta: float) -> CaseTag:
    if l0 <= 0:
        raise ValueError("side must be positive")
    s = alpha + beta
    if s >= 0 or l0 <= -4.0 / s:
        return CaseTag.SQUARE_SHRINK
    return CaseTag.SQUARE_CONFINE


def classify_rectangle(l1: float, l2: float, alpha: float, beta: float) -> CaseTag:
    if l1 <= 0 or l2 <= 0:
        raise ValueError("sides must be positive")
    if l1 < l2:
        l1, l2 = l2, l1
    s = alpha + beta
    v1 = 2.0 / l1 + 0.5 * s
    v2 = 2.0 / l2 + 0.5 * s
    if v1 >= 0.0:
        return CaseTag.RECT_SHRINK
    if v1 + v2 <= 0.0:
        return CaseTag.RECT_CONFINE
    u, j = invariants(l1, l2, alpha, beta)
    if abs(j) <= 1e-12 * (1.0 + abs(s) * (l1 + l2)):
        return CaseTag.RECT_MIXED_J_ZERO
    return CaseTag.RECT_MIXED_J_NEG if j < 0 else CaseTag.RECT_MIXED_J_POS


@dataclass(frozen=True)
class EffectiveState:
    """Limit shape at one instant, always with its polygon realization."""

    time: float
    kind: str  # 'square' | 'rectangle' | 'octagon' | 'point' | 'stationary_octagon'
    center: tuple[float, float]
    l1: float = 0.0  # horizontal facet length (side for squares)
    l2: float = 0.0  # vertical facet length
    frame: float = 0.0  # rotated-square frame radius (octagons only)

    def polygon(self) -> list[tuple[float, float]]:
        cx, cy = self.center
        if self.kind == "point":
            return [(cx, cy)]
        if self.kind in ("square", "rectangle"):
            a1, a2 = self.l1, self.l2
            return [
                (cx - a1 / 2, cy - a2 / 2),
                (cx + a1 / 2, cy - a2 / 2),
                (cx + a1 / 2, cy + a2 / 2),
                (cx - a1 / 2, cy + a2 / 2),
            ]
        # octagon: rectangle extents cut by the diamond |x| + |y| <= frame
        a1 = 2.0 * self.frame - self.l2
        a2 = 2.0 * self.frame - self.l1
        rect = [
            (-a1 / 2, -a2 / 2),
            (a1 / 2, -a2 / 2),
            (a1 / 2, a2 / 2),
            (-a1 / 2, a2 / 2),
        ]
        for sx, sy in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            rect = _clip_halfplane(rect, sx, sy, self.frame)
        return [(x + cx, y + cy) for x, y in rect]


def _clip_halfplane(pts, sx, sy, c):
    # keep sx*x + sy*y <= c (Sutherland-Hodgman step)
    out = []
    n = len(pts)
    for k in range(n):
        x0, y0 = pts[k]
        x1, y1 = pts[(k + 1) % n]
        f0 = sx * x0 + sy * y0 - c
        f1 = sx * x1 + sy * y1 - c
        if f0 <= 0:
            out.append((x0, y0))
        if (f0 < 0 < f1) or (f1 < 0 < f0):
            t = f0 / (f0 - f1)
            out.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
    # drop consecutive duplicates
    dedup = []
    for p in out:
        if not dedup or abs(p[0] - dedup[-1][0]) + abs(p[1] - dedup[-1][1]) > 1e-14:
            dedup.append(p)
    if len(dedup) > 1 and abs(dedup[0][0] - dedup[-1][0]) + abs(dedup[0][1] - dedup[-1][1]) <= 1e-14:
        dedup.pop()
    return dedup


def _shrink_rhs(s):
    def rhs(t, y):
        return [-4.0 / y[1] - s, -4.0 / y[0] - s]

    return rhs


def _octagon_rhs(s):
    def rhs(t, y):
        return [4.0 / y[0] + s, 4.0 / y[1] + s]

    return rhs


def _extinct_event():
    def ev(t, y):
        return min(y) - EXTINCT_LEN

    ev.terminal = True
    ev.direction = -1
    return ev


def _extrapolate_extinction(sol, s) -> float:
    t_ev = float(sol.t_events[0][0])
    y = sol.y_events[0][0]
    lmin = float(min(y))
    lother = float(max(y))
    rate = 4.0 / lother + s
    return t_ev + (lmin / rate if rate > 0 else 0.0)


def _u_zero_event(s):
    def ev(t, y):
        return 1.0 / y[0] + 1.0 / y[1] + 0.5 * s

    ev.terminal = True
    ev.direction = -1
    return ev


class SquareMotion:
    """Limit evolution of a square of side l0 centered at ``center``."""

    def __init__(self, l0: float, alpha: float, beta: float, t_end: float, center=(0.0, 0.0)):
        if t_end < 0:
            raise ValueError("t_end must be nonnegative")
        self.l0 = float(l0)
        self.s = alpha + beta
        self.center = tuple(center)
        self.tag = classify_square(l0, alpha, beta)
        self.extinction_time = None
        t_span = (0.0, max(t_end, 1e-12))
        if self.tag is CaseTag.SQUARE_SHRINK:
            sol = solve_ivp(
                _shrink_rhs(self.s),
                t_span,
                [self.l0, self.l0],
                method="RK45",
                rtol=RTOL,
                atol=ATOL,
                dense_output=True,
                events=[_extinct_event()],
            )
            self._sol = sol
            if sol.t_events[0].size:
                self.extinction_time = _extrapolate_extinction(sol, self.s)
        else:
            sol = solve_ivp(
                _octagon_rhs(self.s),
                t_span,
                [self.l0, self.l0],
                method="RK45",
                rtol=RTOL,
                atol=ATOL,
                dense_output=True,
            )
            self._sol = sol

    @property
    def stationary_length(self) -> float:
        return -4.0 / self.s

    def state(self, t: float) -> EffectiveState:
        if t < 0:
            raise ValueError("time must be nonnegative")
        if self.tag is CaseTag.SQUARE_SHRINK:
            if self.extinction_time is not None and t >= self.extinction_time:
                return EffectiveState(t, "point", self.center)
            ell = float(self._sol.sol(t)[0])
            return EffectiveState(t, "square", self.center, ell, ell)
        ell = float(self._sol.sol(min(t, self._sol.t[-1]))[0])
        return EffectiveState(t, "octagon", self.center, ell, ell, frame=self.l0)


class RectangleMotion:
    """Limit evolution of an l1 x l2 rectangle centered at ``center``."""

    def __init__(self, l1: float, l2: float, alpha: float, beta: float, t_end: float, center=(0.0, 0.0)):
        if t_end < 0:
            raise ValueError("t_end must be nonnegative")
        self.s = alpha + beta
        self.center = tuple(center)
        self.l10, self.l20 = float(l1), float(l2)
        self.tag = classify_rectangle(l1, l2, alpha, beta)
        self.extinction_time = None
        self.switch_time = None
        t_span = (0.0, max(t_end, 1e-12))
        if self.tag is CaseTag.RECT_CONFINE:
            self.frame = 0.5 * (self.l10 + self.l20)
            self._oct = solve_ivp(
                _octagon_rhs(self.s), t_span, [self.l10, self.l20],
                method="RK45", rtol=RTOL, atol=ATOL, dense_output=True,
            )
            self._rect = None
            return
        events = [_extinct_event()]
        if self.tag is CaseTag.RECT_MIXED_J_POS:
            events.append(_u_zero_event(self.s))
        sol = solve_ivp(
            _shrink_rhs(self.s), t_span, [self.l10, self.l20],
            method="RK45", rtol=RTOL, atol=ATOL, dense_output=True, events=events,
        )
        self._rect = sol
        self._oct = None
        if sol.t_events[0].size:
            self.extinction_time = _extrapolate_extinction(sol, self.s)
        if self.tag is CaseTag.RECT_MIXED_J_POS and len(sol.t_events) > 1 and sol.t_events[1].size:
            self.switch_time = float(sol.t_events[1][0])
            y_sw = sol.y_events[1][0]
            self.frame = 0.5 * float(y_sw[0] + y_sw[1])
            self._oct = solve_ivp(
                _octagon_rhs(self.s), (self.switch_time, max(t_end, self.switch_time + 1e-12)),
                [float(y_sw[0]), float(y_sw[1])],
                method="RK45", rtol=RTOL, atol=ATOL, dense_output=True,
            )

    def state(self, t: float) -> EffectiveState:
        if t < 0:
            raise ValueError("time must be nonnegative")
        if self.tag is CaseTag.RECT_CONFINE:
            y = self._oct.sol(min(t, self._oct.t[-1]))
            return EffectiveState(t, "octagon", self.center, float(y[0]), float(y[1]), frame=self.frame)
        if self.switch_time is not None and t >= self.switch_time:
            y = self._oct.sol(min(t, self._oct.t[-1]))
            return EffectiveState(t, "octagon", self.center, float(y[0]), float(y[1]), frame=self.frame)
        if self.extinction_time is not None and t >= self.extinction_time:
            return EffectiveState(t, "point", self.center)
        y = self._rect.sol(t)
        return EffectiveState(t, "rectangle", self.center, float(y[0]), float(y[1]))


def integrate_square(l0: float, alpha: float, beta: float, t: float, center=(0.0, 0.0)) -> EffectiveState:
    return SquareMotion(l0, alpha, beta, t, center).state(t)


def integrate_rectangle(l1: float, l2: float, alpha: float, beta: float, t: float, center=(0.0, 0.0)) -> EffectiveState:
    return RectangleMotion(l1, l2, alpha, beta, t, center).state(t)


def shrink_system_dense(l1: float, l2: float, alpha: float, beta: float, t_end: float):
    """Dense solution of the shrinking system, for conservation checks."""
    s = alpha + beta
    return solve_ivp(
        _shrink_rhs(s), (0.0, t_end), [l1, l2],
        method="RK45", rtol=RTOL, atol=ATOL, dense_output=True, events=[_extinct_event()],
    )


def octagon_system_dense(l1: float, l2: float, alpha: float, beta: float, t_end: float):
    """Dense solution of the octagon moving-facet system."""
    s = alpha + beta
    return solve_ivp(
        _octagon_rhs(s), (0.0, t_end), [l1, l2],
        method="RK45", rtol=RTOL, atol=ATOL, dense_output=True,
    )
