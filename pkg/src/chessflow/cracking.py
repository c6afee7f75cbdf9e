"""Facet breaking: multiplicities, breaking points and string expansion.

A facet that can no longer be calibrated splits at the first jump of one
kind and the last of the other (which kinds depends on the curvature sign
and the endpoint field value).  The split inserts degenerate perpendicular
edges at the breaking points; their inner normals are fixed by which side
moves ahead, so that the expanded string still describes the same point
set with a consistent orientation.

Facets sitting exactly on a discontinuity line inherit the set-up of the
facet shifted a quarter cell to the side they are about to cross, or stay
pinned when the two one-sided velocities bracket zero.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calibrability import classify, feasible_velocity
from .geometry import Direction, Polyrectangle
from .medium import ChessboardMedium, EndpointState, JumpKind, LineTrace


class CrackingError(ValueError):
    pass


@dataclass(frozen=True)
class SubEdge:
    """One piece of a cracked facet: interval, curvature and field values."""

    p: float
    q: float
    chi: int
    n0: int  # endpoint field value; meaningful for chi = 0 pieces
    velocity: float


@dataclass(frozen=True)
class CrackingSetup:
    multiplicity: int
    p_b: float
    q_b: float
    sub_edges: tuple[SubEdge, ...]
    pinned: bool = False
    ambiguous: bool = False
    side: int = 0  # +1 when inherited from the inward shift, -1 outward, 0 off-grid

    @property
    def points(self) -> tuple[float, float, float, float]:
        lo = self.sub_edges[0].p
        hi = self.sub_edges[-1].q
        return (lo, self.p_b, self.q_b, hi)


@dataclass(frozen=True)
class BoundaryEdgeVelocities:
    v_in: float
    v_out: float


def cracking_setup(trace: LineTrace, p: float, q: float, chi: int, n0: int = 1) -> CrackingSetup:
    """Set-up of a facet off the discontinuity grid.

    The central piece is the largest sub-facet, with the parent's endpoint
    field values, that can still be calibrated.  Its ends are either the
    facet endpoints themselves or the innermost jumps of the matching kind
    (the first one where the field can turn without leaving [-1, 1]).
    """
    if chi not in (0, 1):
        raise CrackingError(f"cracking is defined for chi in {{0, +1}}, got {chi}")
    verdict = classify(trace, p, q, chi, n0)
    if verdict.calibrable:
        sub = SubEdge(p, q, chi, n0, verdict.velocity)
        return CrackingSetup(1, p, q, (sub,))
    if chi == 1:
        pk, qk = JumpKind.BETA_TO_ALPHA, JumpKind.ALPHA_TO_BETA
    elif n0 == 1:
        pk = qk = JumpKind.ALPHA_TO_BETA
    else:
        pk = qk = JumpKind.BETA_TO_ALPHA
    tol = trace.medium.grid_tol
    pbj, _ = trace.first_jump_at_or_after(p, pk)
    qbj, _ = trace.last_jump_at_or_before(q, qk)
    if abs(pbj - p) <= tol:
        pbj = p
    if abs(qbj - q) <= tol:
        qbj = q
    combos = [(p, qbj), (pbj, q), (pbj, qbj)]
    combos = [c for c in combos if c != (p, q)]
    combos.sort(key=lambda c: (-(c[1] - c[0]), c[0] != p))
    p_b = q_b = None
    for x, y in combos:
        if y - x > tol:
            if classify(trace, x, y, chi, n0).calibrable:
                p_b, q_b = x, y
                break
        elif y - x > -tol and (x, y) == (pbj, qbj) and chi == 0:
            p_b = q_b = x  # degenerate central piece at the single usable jump
            break
    if p_b is None:
        raise CrackingError(
            f"no calibrable central piece found in [{p}, {q}] "
            f"(candidate breaking points {pbj}, {qbj})"
        )
    subs = []
    if p_b - p > tol:
        vm = classify(trace, p, p_b, 0, verdict_n0_lo(chi, n0)).velocity
        subs.append(SubEdge(p, p_b, 0, verdict_n0_lo(chi, n0), vm))
    if q_b - p_b > tol:
        vc = classify(trace, p_b, q_b, chi, n0).velocity
        subs.append(SubEdge(p_b, q_b, chi, n0, vc))
    else:
        q_b = p_b
        subs.append(SubEdge(p_b, q_b, chi, n0, feasible_velocity(trace, p, q, chi)))
    if q - q_b > tol:
        vp = classify(trace, q_b, q, 0, verdict_n0_hi(chi, n0)).velocity
        subs.append(SubEdge(q_b, q, 0, verdict_n0_hi(chi, n0), vp))
    mult = 2 * len(subs) - 1
    return CrackingSetup(mult, p_b, q_b, tuple(subs))


def verdict_n0_lo(chi: int, n0: int) -> int:
    """Field value carried by the low-coordinate piece after a crack."""
    return -1 if chi == 1 else n0


def verdict_n0_hi(chi: int, n0: int) -> int:
    return 1 if chi == 1 else n0


def boundary_velocities(
    medium: ChessboardMedium,
    axis: str,
    line_offset: float,
    inward_sign: float,
    p: float,
    q: float,
    chi: int,
) -> BoundaryEdgeVelocities:
    """Velocities of a grid-line facet sampled a quarter cell to each side."""
    if not medium.is_on_grid(line_offset):
        raise CrackingError("boundary velocities are defined on grid lines only")
    if q - p <= 0:
        raise CrackingError("facet must have positive length")
    k = round(line_offset / medium.half)
    row_in = k if inward_sign > 0 else k - 1
    row_out = k - 1 if inward_sign > 0 else k
    v_in = feasible_velocity(medium.trace_for_row(axis, row_in), p, q, chi)
    v_out = feasible_velocity(medium.trace_for_row(axis, row_out), p, q, chi)
    return BoundaryEdgeVelocities(v_in, v_out)


def cracking_setup_on_grid(
    medium: ChessboardMedium,
    axis: str,
    line_offset: float,
    inward_sign: float,
    p: float,
    q: float,
    chi: int,
    n0: int = 1,
    tol_v: float | None = None,
) -> CrackingSetup:
    """Set-up of a grid-line facet, dispatching on the one-sided velocities."""
    bev = boundary_velocities(medium, axis, line_offset, inward_sign, p, q, chi)
    if tol_v is None:
        tol_v = 1e-12 * (abs(medium.alpha) + medium.beta)
    k = round(line_offset / medium.half)
    if bev.v_in <= tol_v and bev.v_out >= -tol_v:
        sub = SubEdge(p, q, chi, n0, 0.0)
        return CrackingSetup(1, p, q, (sub,), pinned=True)
    if bev.v_in > 0.0 and bev.v_out < 0.0:
        sub = SubEdge(p, q, chi, n0, 0.0)
        return CrackingSetup(1, p, q, (sub,), pinned=True, ambiguous=True)
    if bev.v_in > 0.0:
        row = k if inward_sign > 0 else k - 1
        side = 1
    else:
        row = k - 1 if inward_sign > 0 else k
        side = -1
    setup = cracking_setup(medium.trace_for_row(axis, row), p, q, chi, n0)
    return CrackingSetup(
        setup.multiplicity, setup.p_b, setup.q_b, setup.sub_edges, pinned=False, ambiguous=False, side=side
    )


@dataclass(frozen=True)
class BreakingConfiguration:
    polyrect: Polyrectangle
    pinned_flags: tuple[bool, ...]
    origin_map: tuple[int, ...]
    is_crack: tuple[bool, ...]
    non_unique: bool


def _structural_lower_ahead(chi: int, n0: int, at_p_b: bool) -> bool:
    """Tie-break at equal piece velocities: which side pulls ahead next.

    Convex facets shed both end pieces forward; flat facets order their
    pieces monotonically along the coordinate, with the sense set by n0.
    """
    if chi == 1:
        return at_p_b
    return n0 == -1


def crack_normal(
    normal: Direction, chi: int, n0: int, at_p_b: bool, v_lo: float, v_hi: float, tie_tol: float = 0.0
) -> Direction:
    """Inner normal of the degenerate edge inserted at a breaking point.

    ``v_lo``/``v_hi`` are the normal velocities of the pieces on the low
    and high coordinate side; the faster piece sits ahead of the crack, and
    exact ties (threshold breaking) fall back to the structural ordering.
    """
    if v_lo > v_hi + tie_tol:
        lower_ahead = True
    elif v_hi > v_lo + tie_tol:
        lower_ahead = False
    else:
        lower_ahead = _structural_lower_ahead(chi, n0, at_p_b)
    a_ahead = lower_ahead if normal.increasing else not lower_ahead
    return normal.pred if a_ahead else normal.succ


def expand_edge(
    normal: Direction, offset: float, chi: int, n0: int, setup: CrackingSetup, tie_tol: float = 0.0
) -> tuple[list[Direction], list[float], list[bool]]:
    """String entries replacing one facet: pieces interleaved with cracks."""
    if setup.multiplicity == 1:
        return [normal], [offset], [False]
    subs = list(setup.sub_edges)
    breaks = []
    lo = setup.sub_edges[0].p
    if setup.p_b - lo > 0:
        breaks.append(setup.p_b)
    if setup.q_b > setup.p_b and setup.sub_edges[-1].q - setup.q_b > 0:
        breaks.append(setup.q_b)
    elif setup.q_b == setup.p_b and len(subs) == 3:
        breaks.append(setup.q_b)
    if len(breaks) != len(subs) - 1:  # pragma: no cover
        raise CrackingError("inconsistent cracking set-up")
    crack_dirs = [
        crack_normal(
            normal, chi, n0, at_p_b=(breaks[k] == setup.p_b and (k == 0 or setup.q_b > setup.p_b)),
            v_lo=subs[k].velocity, v_hi=subs[k + 1].velocity, tie_tol=tie_tol,
        )
        for k in range(len(breaks))
    ]
    if not normal.increasing:
        subs = subs[::-1]
        breaks = breaks[::-1]
        crack_dirs = crack_dirs[::-1]
    normals: list[Direction] = []
    offsets: list[float] = []
    cracks: list[bool] = []
    for k, sub in enumerate(subs):
        normals.append(normal)
        offsets.append(offset)
        cracks.append(False)
        if k < len(breaks):
            normals.append(crack_dirs[k])
            offsets.append(breaks[k])
            cracks.append(True)
    return normals, offsets, cracks


def breaking_configuration(poly: Polyrectangle, medium: ChessboardMedium) -> BreakingConfiguration:
    """Expand every facet of a polyrectangle by its cracking set-up."""
    normals: list[Direction] = []
    offsets: list[float] = []
    pinned: list[bool] = []
    crackf: list[bool] = []
    origin: list[int] = []
    non_unique = False
    for i in range(poly.m):
        chi = poly.chi(i)
        if chi < 0:
            raise CrackingError(f"edge {i} has negative curvature")
        nu = poly.normals[i]
        s = poly.offsets[i]
        p, q = poly.edge_interval(i)
        n0 = poly.endpoint_values(i)[0]
        if q - p <= medium.grid_tol:
            setup = CrackingSetup(1, p, q, (SubEdge(p, q, chi, n0, 0.0),), pinned=medium.is_on_grid(s))
        elif medium.is_on_grid(s):
            setup = cracking_setup_on_grid(medium, nu.axis, s, nu.inward_sign, p, q, chi, n0)
        else:
            setup = cracking_setup(medium.trace(nu.axis, s), p, q, chi, n0)
        non_unique = non_unique or setup.ambiguous
        tie = 1e-12 * (abs(medium.alpha) + medium.beta)
        ns, os_, cs = expand_edge(nu, s, chi, n0, setup, tie_tol=tie)
        normals.extend(ns)
        offsets.extend(os_)
        crackf.extend(cs)
        pinned.extend(True if c else setup.pinned for c in cs)
        origin.extend([i] * len(ns))
    expanded = Polyrectangle(tuple(normals), tuple(offsets))
    return BreakingConfiguration(expanded, tuple(pinned), tuple(origin), tuple(crackf), non_unique)
