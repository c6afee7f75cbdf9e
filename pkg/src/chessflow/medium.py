"""Two-valued chessboard forcing and its restrictions to grid-parallel lines.

The forcing alternates between a negative value ``alpha`` and a positive
value ``beta`` on open square cells of side ``epsilon/2``.  The cell
``]0, eps/2[ x ]0, eps/2[`` carries ``alpha``, and the value flips whenever
one cell index changes by one, which fixes the whole plane.  All integrals
are evaluated in closed form through the triangle-wave antiderivative of
the alternation pattern, so queries are exact up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class MediumError(ValueError):
    pass


class JumpKind(Enum):
    """Kind of a trace discontinuity: which value sits just right of it."""

    BETA_TO_ALPHA = "beta_to_alpha"  # alpha on (s, s + eps/2)
    ALPHA_TO_BETA = "alpha_to_beta"  # beta on (s, s + eps/2)


class EndpointState(Enum):
    """Where a facet endpoint sits relative to the phases of a trace."""

    IN_ALPHA = "in_alpha"
    IN_BETA = "in_beta"
    JUMP_BETA_ALPHA = "jump_beta_alpha"
    JUMP_ALPHA_BETA = "jump_alpha_beta"


def _tri(u: float) -> float:
    # Periodic antiderivative of the unit square wave (+1 on [2k, 2k+1)).
    r = math.fmod(u, 2.0)
    if r < 0.0:
        r += 2.0
    return r if r <= 1.0 else 2.0 - r


@dataclass(frozen=True)
class ChessboardMedium:
    """Chessboard forcing with values ``alpha < 0 < beta`` and cell period ``epsilon``."""

    alpha: float
    beta: float
    epsilon: float

    def __post_init__(self):
        if not (self.alpha < 0.0 < self.beta):
            raise MediumError(f"need alpha < 0 < beta, got {self.alpha}, {self.beta}")
        if not (0.0 < self.epsilon < 8.0 / (self.beta - self.alpha)):
            raise MediumError(
                f"need 0 < epsilon < 8/(beta-alpha) = {8.0 / (self.beta - self.alpha)}, "
                f"got {self.epsilon}"
            )

    @property
    def mean(self) -> float:
        return 0.5 * (self.alpha + self.beta)

    @property
    def half(self) -> float:
        """Side of one chessboard cell (half the period)."""
        return 0.5 * self.epsilon

    @property
    def grid_tol(self) -> float:
        return self.epsilon * 1e-9

    def is_on_grid(self, s: float) -> bool:
        k = round(s / self.half)
        return abs(s - k * self.half) <= self.grid_tol

    def snap(self, s: float) -> float:
        return round(s / self.half) * self.half

    def cell_value(self, i: int, j: int) -> float:
        return self.alpha if (i + j) % 2 == 0 else self.beta

    def cell_index(self, x: float) -> int:
        return math.floor(x / self.half)

    def value_at(self, x: float, y: float):
        """Forcing value at a point, or ``None`` on the discontinuity grid."""
        if self.is_on_grid(x) or self.is_on_grid(y):
            return None
        return self.cell_value(self.cell_index(x), self.cell_index(y))

    def _wave_integral(self, a: float, b: float) -> float:
        # Integral over [a, b] of the +-1 wave that is +1 on even cells.
        h = self.half
        return h * (_tri(b / h) - _tri(a / h))

    def rect_integral(self, x0: float, x1: float, y0: float, y1: float) -> float:
        """Exact integral of the forcing over an axis-aligned rectangle."""
        area = (x1 - x0) * (y1 - y0)
        osc = 0.5 * (self.alpha - self.beta)
        return self.mean * area + osc * self._wave_integral(x0, x1) * self._wave_integral(y0, y1)

    def trace(self, axis: str, offset: float) -> "LineTrace":
        """Trace along the line with the given fixed coordinate.

        ``axis`` is 'h' for a horizontal line (offset = y) and 'v' for a
        vertical one (offset = x).
        """
        on_grid = self.is_on_grid(offset)
        row = self.cell_index(offset) if not on_grid else 0
        return LineTrace(self, axis, offset, on_grid, row)

    def trace_for_row(self, axis: str, row: int) -> "LineTrace":
        """Trace of any line strictly inside the given row of cells."""
        return LineTrace(self, axis, (row + 0.5) * self.half, False, row)


@dataclass(frozen=True)
class LineTrace:
    """Restriction of the forcing to a grid-parallel line.

    The restriction only depends on which open row of cells the line
    crosses, recorded as the integer ``row``.
    """

    medium: ChessboardMedium
    axis: str
    offset: float
    on_grid: bool
    row: int

    def _check(self):
        if self.on_grid:
            raise MediumError("trace undefined on discontinuity line")

    @property
    def _rsign(self) -> float:
        return 1.0 if self.row % 2 == 0 else -1.0

    def value(self, s: float):
        """Trace value at coordinate ``s`` (``None`` at a jump point)."""
        self._check()
        m = self.medium
        if m.is_on_grid(s):
            return None
        return m.cell_value(m.cell_index(s), self.row)

    def jump_kind(self, s: float) -> JumpKind:
        self._check()
        m = self.medium
        k = round(s / m.half)
        if abs(s - k * m.half) > m.grid_tol:
            raise MediumError(f"{s} is not a jump point")
        right = m.cell_value(k, self.row)
        return JumpKind.BETA_TO_ALPHA if right == m.alpha else JumpKind.ALPHA_TO_BETA

    def jumps_in(self, a: float, b: float) -> list[tuple[float, JumpKind]]:
        """All jump points in the closed interval [a, b], in order."""
        self._check()
        m = self.medium
        if a > b:
            raise MediumError("need a <= b")
        k0 = math.ceil((a - m.grid_tol) / m.half)
        k1 = math.floor((b + m.grid_tol) / m.half)
        out = []
        for k in range(k0, k1 + 1):
            s = k * m.half
            kind = JumpKind.BETA_TO_ALPHA if m.cell_value(k, self.row) == m.alpha else JumpKind.ALPHA_TO_BETA
            out.append((s, kind))
        return out

    def interior_jumps(self, a: float, b: float) -> list[tuple[float, JumpKind]]:
        """Jump points strictly inside (a, b)."""
        tol = self.medium.grid_tol
        return [(s, k) for (s, k) in self.jumps_in(a, b) if a + tol < s < b - tol]

    def endpoint_state(self, s: float) -> EndpointState:
        self._check()
        m = self.medium
        if m.is_on_grid(s):
            kind = self.jump_kind(m.snap(s))
            return (
                EndpointState.JUMP_BETA_ALPHA
                if kind is JumpKind.BETA_TO_ALPHA
                else EndpointState.JUMP_ALPHA_BETA
            )
        v = m.cell_value(m.cell_index(s), self.row)
        return EndpointState.IN_ALPHA if v == m.alpha else EndpointState.IN_BETA

    def first_jump_at_or_after(self, s: float, kind: JumpKind | None = None) -> tuple[float, JumpKind]:
        self._check()
        m = self.medium
        k = math.ceil((s - m.grid_tol) / m.half)
        for _ in range(4):
            pos = k * m.half
            jk = self.jump_kind(pos)
            if kind is None or jk is kind:
                return pos, jk
            k += 1
        raise MediumError("no matching jump found")  # pragma: no cover

    def last_jump_at_or_before(self, s: float, kind: JumpKind | None = None) -> tuple[float, JumpKind]:
        self._check()
        m = self.medium
        k = math.floor((s + m.grid_tol) / m.half)
        for _ in range(4):
            pos = k * m.half
            jk = self.jump_kind(pos)
            if kind is None or jk is kind:
                return pos, jk
            k -= 1
        raise MediumError("no matching jump found")  # pragma: no cover

    def integrate(self, p: float, q: float) -> float:
        """Exact integral of the trace over [p, q]."""
        self._check()
        m = self.medium
        osc = 0.5 * (m.alpha - m.beta) * self._rsign
        return m.mean * (q - p) + osc * m._wave_integral(p, q)

    def phase_decomposition(self, p: float, q: float) -> "PhaseDecomposition":
        """Split [p, q] into whole periods plus alpha/beta excess lengths."""
        self._check()
        m = self.medium
        if p > q:
            raise MediumError("need p <= q")
        ell = q - p
        integral = self.integrate(p, q)
        r = ell - m.epsilon * math.floor(ell / m.epsilon)
        c = integral - m.mean * (ell - r)
        la = (m.beta * r - c) / (m.beta - m.alpha)
        la = min(max(la, 0.0), r)
        return PhaseDecomposition(ell, la, r - la, integral)


@dataclass(frozen=True)
class PhaseDecomposition:
    """Length bookkeeping of a facet against the phases it crosses."""

    ell: float
    ell_alpha: float
    ell_beta: float
    integral: float


# Spec-facing wrappers -------------------------------------------------------

def value_at(medium: ChessboardMedium, point: tuple[float, float]):
    return medium.value_at(point[0], point[1])


def jumps_in(trace: LineTrace, interval: tuple[float, float]) -> list[tuple[float, JumpKind]]:
    return trace.jumps_in(interval[0], interval[1])


def phase_decomposition(medium: ChessboardMedium, trace: LineTrace, p: float, q: float) -> PhaseDecomposition:
    assert trace.medium == medium
    return trace.phase_decomposition(p, q)
