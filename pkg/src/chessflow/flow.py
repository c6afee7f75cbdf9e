"""Event-driven integration of the forced facet dynamics.

Between events every facet line moves smoothly: off the grid its normal
velocity is curvature plus the exact trace mean, on the grid it is held by
the sliding mode whenever the two one-sided velocities bracket zero.
Events are located by bisection and change the topology or the sliding
set: facets vanish and their neighbours merge, moving facets reach grid
lines and are re-classified (possibly cracking by the inherited set-up),
pinned facets leave the sliding regime, and off-grid facets that lose
calibrability are re-cracked in place.

The integrator tracks, for every moving facet, the open row of cells its
line currently crosses; this makes the trace (hence the field) exact and
removes any ambiguity at the discontinuities themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import cracking
from .calibrability import candidate_field
from .cracking import CrackingSetup, boundary_velocities, cracking_setup, expand_edge
from .geometry import Direction, Polyrectangle, turn
from .medium import ChessboardMedium


class FlowError(RuntimeError):
    pass


class EventKind(Enum):
    EDGE_VANISHED = "edge_vanished"
    HIT_GRID_LINE = "hit_grid_line"
    CALIBRABILITY_LOST = "calibrability_lost"
    UNPINNED = "unpinned"
    RECRACKED = "recracked"
    NONUNIQUE_BRANCH = "nonunique_branch"
    EXTINCTION = "extinction"
    STATIONARY = "stationary"


@dataclass(frozen=True)
class FlowEvent:
    time: float
    kind: EventKind
    edges: tuple[int, ...] = ()


@dataclass
class FlowState:
    medium: ChessboardMedium
    normals: list[Direction]
    offsets: list[float]
    rows: list[int]
    pinned: list[bool]
    time: float = 0.0
    non_unique: bool = False

    @property
    def m(self) -> int:
        return len(self.normals)

    def clone(self) -> "FlowState":
        return FlowState(
            self.medium,
            list(self.normals),
            list(self.offsets),
            list(self.rows),
            list(self.pinned),
            self.time,
            self.non_unique,
        )

    def endpoints(self, i: int, offsets=None) -> tuple[float, float]:
        offs = self.offsets if offsets is None else offsets
        a = offs[(i - 1) % self.m]
        b = offs[(i + 1) % self.m]
        return (a, b) if self.normals[i].increasing else (b, a)

    def length(self, i: int, offsets=None) -> float:
        p, q = self.endpoints(i, offsets)
        return q - p

    def chi(self, i: int) -> int:
        m = self.m
        return (turn(self.normals[(i - 1) % m], self.normals[i]) + turn(self.normals[i], self.normals[(i + 1) % m])) // 2

    def n0(self, i: int) -> int:
        comp = 1 if self.normals[i].axis == "v" else 0
        j = (i - 1) % self.m if self.normals[i].increasing else (i + 1) % self.m
        return int(-self.normals[j].unit[comp])

    def on_grid(self, i: int) -> bool:
        return self.medium.is_on_grid(self.offsets[i])

    def poly(self) -> Polyrectangle:
        return Polyrectangle(tuple(self.normals), tuple(self.offsets))


@dataclass(frozen=True)
class TrajectorySample:
    time: float
    poly: Polyrectangle
    pinned: tuple[bool, ...]


@dataclass
class FlowTrajectory:
    samples: list[TrajectorySample]
    events: list[FlowEvent]
    status: str  # 'reached_t_max' | 'extinct' | 'stationary'
    final_time: float
    non_unique: bool = False

    def extinction_time(self) -> float | None:
        for ev in self.events:
            if ev.kind is EventKind.EXTINCTION:
                return ev.time
        return None


_PRIORITY = {
    EventKind.EDGE_VANISHED: 0,
    EventKind.HIT_GRID_LINE: 1,
    EventKind.UNPINNED: 2,
    EventKind.CALIBRABILITY_LOST: 3,
}


class FacetFlow:
    """Integrator for one medium; states are mutated in place."""

    def __init__(self, medium: ChessboardMedium, max_step_frac: float = 0.125):
        self.medium = medium
        self.max_disp = medium.half * max_step_frac
        self.tol_len = medium.epsilon * 1e-9
        self.tol_t = medium.epsilon * 1e-10
        self.dt_min = medium.epsilon * 1e-14
        self.tol_v = 1e-12 * (abs(medium.alpha) + medium.beta)
        self.tol_margin = 1e-10

    # -- construction --------------------------------------------------

    def setup(self, poly: Polyrectangle) -> tuple[FlowState, list[FlowEvent]]:
        for i in range(poly.m):
            if poly.chi(i) < 0:
                raise FlowError(f"initial edge {i} has negative curvature")
        st = FlowState(
            self.medium,
            list(poly.normals),
            list(poly.offsets),
            [self.medium.cell_index(s) for s in poly.offsets],
            [False] * poly.m,
        )
        for i in range(st.m):
            if self.medium.is_on_grid(st.offsets[i]):
                st.offsets[i] = self.medium.snap(st.offsets[i])
        events = self._classify(st)
        return st, events

    # -- smooth field ----------------------------------------------------

    def normal_velocity(self, st: FlowState, i: int, offsets=None) -> float:
        if st.pinned[i]:
            return 0.0
        p, q = st.endpoints(i, offsets)
        ell = q - p
        if ell <= self.tol_len:
            return 0.0
        tr = self.medium.trace_for_row(st.normals[i].axis, st.rows[i])
        return st.chi(i) * 2.0 / ell + tr.integrate(p, q) / ell

    def _coord_velocities(self, st: FlowState, offsets, chis) -> list[float]:
        m = st.m
        out = [0.0] * m
        for i in range(m):
            if st.pinned[i]:
                continue
            p, q = st.endpoints(i, offsets)
            ell = q - p
            if ell <= self.tol_len:
                continue
            tr = self.medium.trace_for_row(st.normals[i].axis, st.rows[i])
            v = chis[i] * 2.0 / ell + tr.integrate(p, q) / ell
            out[i] = st.normals[i].inward_sign * v
        return out

    def _rk4(self, st: FlowState, offsets, chis, h: float) -> list[float]:
        def f(y):
            return self._coord_velocities(st, y, chis)

        m = st.m
        k1 = f(offsets)
        y2 = [offsets[i] + 0.5 * h * k1[i] for i in range(m)]
        k2 = f(y2)
        y3 = [offsets[i] + 0.5 * h * k2[i] for i in range(m)]
        k3 = f(y3)
        y4 = [offsets[i] + h * k3[i] for i in range(m)]
        k4 = f(y4)
        return [offsets[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(m)]

    # -- event functions -------------------------------------------------

    def _violations(self, st: FlowState, offsets, chis, watch_len) -> list[tuple[int, EventKind, int]]:
        out = []
        m = st.m
        half = self.medium.half
        for i in range(m):
            ell = st.length(i, offsets)
            if watch_len[i] and ell <= self.tol_len:
                out.append((0, EventKind.EDGE_VANISHED, i))
            if not st.pinned[i]:
                lo = st.rows[i] * half
                hi = (st.rows[i] + 1) * half
                s = offsets[i]
                if s < lo - self.medium.grid_tol or s > hi + self.medium.grid_tol:
                    out.append((1, EventKind.HIT_GRID_LINE, i))
                elif ell > self.tol_len:
                    p, q = st.endpoints(i, offsets)
                    tr = self.medium.trace_for_row(st.normals[i].axis, st.rows[i])
                    f = candidate_field(tr, p, q, chis[i], st.n0(i))
                    if f.margin() < -self.tol_margin:
                        out.append((3, EventKind.CALIBRABILITY_LOST, i))
            elif ell > self.tol_len and self.medium.is_on_grid(st.offsets[i]):
                p, q = st.endpoints(i, offsets)
                if q - p > self.tol_len:
                    bev = boundary_velocities(
                        self.medium, st.normals[i].axis, st.offsets[i], st.normals[i].inward_sign, p, q, chis[i]
                    )
                    if bev.v_in > self.tol_v or bev.v_out < -self.tol_v:
                        out.append((2, EventKind.UNPINNED, i))
        return out

    # -- classification (pins, rows, cracking) ---------------------------

    def _reorient_cracks(self, st: FlowState) -> bool:
        """Flip degenerate cracks whose direction contradicts the motion.

        A zero-length crack is geometrically a point, so its inner normal is
        free until its neighbours separate; re-cracking an adjacent piece can
        leave it encoding the wrong side.  The faster neighbour (in inner
        normal velocity) must sit ahead of the crack.
        """
        changed = False
        for i in range(st.m):
            if st.length(i) > self.tol_len:
                continue
            prev, nxt = (i - 1) % st.m, (i + 1) % st.m
            if st.normals[prev] is not st.normals[nxt]:
                continue
            vp = self.normal_velocity(st, prev)
            vn = self.normal_velocity(st, nxt)
            if abs(vp - vn) <= self.tol_v:
                continue
            nu = st.normals[prev]
            want = nu.pred if vp > vn else nu.succ
            if st.normals[i] is not want:
                st.normals[i] = want
                changed = True
        return changed

    def _classify(self, st: FlowState) -> list[FlowEvent]:
        """Re-derive sliding flags, target rows and set-ups until stable."""
        events: list[FlowEvent] = []
        guard = 0
        while True:
            guard += 1
            if guard > 100 * st.m + 100:
                raise FlowError("classification did not stabilize")
            changed = False
            for i in range(st.m):
                ell = st.length(i)
                if ell <= self.tol_len:
                    if not st.pinned[i]:
                        st.pinned[i] = True
                    continue
                if st.pinned[i]:
                    continue
                nu = st.normals[i]
                if self.medium.is_on_grid(st.offsets[i]):
                    p, q = st.endpoints(i)
                    setup = cracking.cracking_setup_on_grid(
                        self.medium, nu.axis, st.offsets[i], nu.inward_sign, p, q, st.chi(i), st.n0(i), self.tol_v
                    )
                    if setup.pinned:
                        st.pinned[i] = True
                        if setup.ambiguous:
                            st.non_unique = True
                            events.append(FlowEvent(st.time, EventKind.NONUNIQUE_BRANCH, (i,)))
                        changed = True
                    elif setup.multiplicity == 1:
                        k = round(st.offsets[i] / self.medium.half)
                        inward = setup.side > 0
                        if (nu.inward_sign > 0) == inward:
                            st.rows[i] = k
                        else:
                            st.rows[i] = k - 1
                    else:
                        self._expand(st, i, setup)
                        events.append(FlowEvent(st.time, EventKind.RECRACKED, (i,)))
                        changed = True
                        break
                else:
                    st.rows[i] = self.medium.cell_index(st.offsets[i])
                    tr = self.medium.trace_for_row(nu.axis, st.rows[i])
                    p, q = st.endpoints(i)
                    f = candidate_field(tr, p, q, st.chi(i), st.n0(i))
                    if f.margin() < -self.tol_margin:
                        setup = cracking_setup(tr, p, q, st.chi(i), st.n0(i))
                        self._expand(st, i, setup)
                        events.append(FlowEvent(st.time, EventKind.RECRACKED, (i,)))
                        changed = True
                        break
            if not changed and self._reorient_cracks(st):
                changed = True
            if not changed:
                break
        self._check_collision(st)
        return events

    def _expand(self, st: FlowState, i: int, setup: CrackingSetup):
        nu = st.normals[i]
        ns, offs, cracks = expand_edge(nu, st.offsets[i], st.chi(i), st.n0(i), setup, tie_tol=self.tol_v)
        row = st.rows[i]
        st.normals[i : i + 1] = ns
        st.offsets[i : i + 1] = offs
        st.rows[i : i + 1] = [row if not c else self.medium.cell_index(o) for c, o in zip(cracks, offs)]
        st.pinned[i : i + 1] = [c for c in cracks]

    def _check_collision(self, st: FlowState):
        poly = st.poly()
        if not poly.is_simple():
            raise FlowError(
                "non-adjacent boundary portions collided; the dynamics of "
                "self-touching curves is out of scope"
            )

    # -- event application -------------------------------------------------

    def _handle_vanished(self, st: FlowState) -> tuple[list[FlowEvent], bool]:
        events: list[FlowEvent] = []
        while True:
            idx = None
            for i in range(st.m):
                if st.length(i) <= self.tol_len:
                    idx = i
                    break
            if idx is None:
                return events, False
            if st.m <= 4:
                events.append(FlowEvent(st.time, EventKind.EXTINCTION, tuple(range(st.m))))
                return events, True
            i = idx
            m = st.m
            before, after = (i - 1) % m, (i + 1) % m
            if st.normals[before] is not st.normals[after]:
                # antiparallel neighbours: the boundary pinches into a slit
                x0, y0, x1, y1 = st.poly().bbox()
                if max(x1 - x0, y1 - y0) <= 4.0 * self.medium.half:
                    events.append(FlowEvent(st.time, EventKind.EXTINCTION, tuple(range(st.m))))
                    return events, True
                raise FlowError("boundary pinched itself (zero-width slit); aborting")
            events.append(FlowEvent(st.time, EventKind.EDGE_VANISHED, (i,)))
            merged_offset = 0.5 * (st.offsets[before] + st.offsets[after])
            if self.medium.is_on_grid(merged_offset):
                merged_offset = self.medium.snap(merged_offset)
            keep_pinned = st.pinned[before] and st.pinned[after]
            keep_row = st.rows[before]
            for j in sorted((i, after), reverse=True):
                del st.normals[j], st.offsets[j], st.rows[j], st.pinned[j]
            keep = before
            for j in sorted((i, after)):
                if j < before:
                    keep -= 1
            st.offsets[keep] = merged_offset
            st.rows[keep] = keep_row
            st.pinned[keep] = keep_pinned

    def _apply_events(self, st: FlowState, viols) -> tuple[list[FlowEvent], bool]:
        events: list[FlowEvent] = []
        hit = sorted({i for pr, kind, i in viols if kind is EventKind.HIT_GRID_LINE})
        for i in hit:
            st.offsets[i] = self.medium.snap(st.offsets[i])
        if hit:
            events.append(FlowEvent(st.time, EventKind.HIT_GRID_LINE, tuple(hit)))
        if any(kind is EventKind.EDGE_VANISHED for pr, kind, i in viols):
            evs, extinct = self._handle_vanished(st)
            events.extend(evs)
            if extinct:
                return events, True
        # indices may have shifted; re-derive sliding exits from the state
        for i in range(st.m):
            if not st.pinned[i] or st.length(i) <= self.tol_len:
                continue
            if not self.medium.is_on_grid(st.offsets[i]):
                continue
            p, q = st.endpoints(i)
            bev = boundary_velocities(
                self.medium, st.normals[i].axis, st.offsets[i], st.normals[i].inward_sign, p, q, st.chi(i)
            )
            if bev.v_in > self.tol_v or bev.v_out < -self.tol_v:
                st.pinned[i] = False
                events.append(FlowEvent(st.time, EventKind.UNPINNED, (i,)))
        lost = sorted({i for pr, kind, i in viols if kind is EventKind.CALIBRABILITY_LOST})
        if lost:
            events.append(FlowEvent(st.time, EventKind.CALIBRABILITY_LOST, tuple(lost)))
        events.extend(self._classify(st))
        return events, False

    # -- time stepping ----------------------------------------------------

    def advance(self, st: FlowState, t_stop: float) -> list[FlowEvent]:
        """Integrate until t_stop or the first event; returns the events."""
        if t_stop < st.time - self.tol_t:
            raise FlowError(f"t_stop {t_stop} lies before current time {st.time}")
        chis = [st.chi(i) for i in range(st.m)]
        watch_len = [st.length(i) > self.tol_len for i in range(st.m)]
        viols0 = self._violations(st, st.offsets, chis, watch_len)
        if viols0:
            events, _ = self._apply_events(st, viols0)
            return events
        while st.time < t_stop - self.tol_t:
            vels = self._coord_velocities(st, st.offsets, chis)
            vmax = max((abs(v) for v in vels), default=0.0)
            h = t_stop - st.time
            if vmax > 0.0:
                h = min(h, self.max_disp / vmax)
            if h < self.dt_min:
                raise FlowError(f"step collapsed below dt_min at t = {st.time}")
            trial = self._rk4(st, st.offsets, chis, h)
            viols = self._violations(st, trial, chis, watch_len)
            if not viols:
                st.offsets = trial
                st.time += h
                continue
            lo, hi = 0.0, h
            for _ in range(200):
                if hi - lo <= self.tol_t:
                    break
                mid = 0.5 * (lo + hi)
                ymid = self._rk4(st, st.offsets, chis, mid)
                if self._violations(st, ymid, chis, watch_len):
                    hi = mid
                else:
                    lo = mid
            yev = self._rk4(st, st.offsets, chis, hi)
            viols = self._violations(st, yev, chis, watch_len)
            st.offsets = yev
            st.time += hi
            events, extinct = self._apply_events(st, viols)
            return events
        st.time = t_stop
        return []

    def all_pinned(self, st: FlowState) -> bool:
        return all(st.pinned)

    # -- driver -------------------------------------------------------------

    def run(self, initial: Polyrectangle, t_max: float, dt_out: float) -> FlowTrajectory:
        st, events = self.setup(initial)
        samples = [TrajectorySample(0.0, st.poly(), tuple(st.pinned))]
        status = "reached_t_max"
        next_out = dt_out

        def snapshot():
            if abs(samples[-1].time - st.time) > self.tol_t or len(samples[-1].pinned) != st.m:
                samples.append(TrajectorySample(st.time, st.poly(), tuple(st.pinned)))

        while True:
            if self.all_pinned(st):
                status = "stationary"
                events.append(FlowEvent(st.time, EventKind.STATIONARY, ()))
                break
            if st.time >= t_max - self.tol_t:
                break
            t_stop = min(next_out, t_max)
            new_events = self.advance(st, t_stop)
            if new_events:
                events.extend(new_events)
                if any(ev.kind is EventKind.EXTINCTION for ev in new_events):
                    status = "extinct"
                    break
                snapshot()
            if st.time >= next_out - self.tol_t:
                snapshot()
                next_out += dt_out
        if status == "stationary":
            frozen = st.poly()
            t = next_out
            while t <= t_max + self.tol_t:
                samples.append(TrajectorySample(t, frozen, tuple(st.pinned)))
                t += dt_out
        return FlowTrajectory(samples, events, status, st.time, st.non_unique)


# Spec-facing wrappers --------------------------------------------------------

def velocity_field(state: FlowState, medium: ChessboardMedium | None = None) -> list[float]:
    """Normal velocity of every facet (zero for pinned or degenerate ones)."""
    fl = FacetFlow(state.medium if medium is None else medium)
    return [fl.normal_velocity(state, i) for i in range(state.m)]


def filippov_intervals(state: FlowState, medium: ChessboardMedium | None = None) -> list[tuple[float, float]]:
    """Admissible normal-velocity interval of every facet."""
    med = state.medium if medium is None else medium
    fl = FacetFlow(med)
    out = []
    for i in range(state.m):
        ell = state.length(i)
        if med.is_on_grid(state.offsets[i]):
            if ell <= fl.tol_len:
                out.append((med.alpha, med.beta))
            else:
                p, q = state.endpoints(i)
                bev = boundary_velocities(med, state.normals[i].axis, state.offsets[i], state.normals[i].inward_sign, p, q, state.chi(i))
                out.append((min(bev.v_in, bev.v_out), max(bev.v_in, bev.v_out)))
        else:
            tr = med.trace_for_row(state.normals[i].axis, state.rows[i])
            v = state.chi(i) * 2.0 / ell + tr.integrate(*state.endpoints(i)) / ell
            out.append((v, v))
    return out


def advance_to_next_event(state: FlowState, medium: ChessboardMedium, t_max: float):
    """Advance in place; returns the event list ([] means t_max was reached)."""
    return FacetFlow(medium).advance(state, t_max)


def run(initial: Polyrectangle, medium: ChessboardMedium, t_max: float, dt_out: float) -> FlowTrajectory:
    return FacetFlow(medium).run(initial, t_max, dt_out)
