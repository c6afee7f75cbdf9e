"""Rectilinear closed curves as normal/offset strings.

A polyrectangle is stored as the cyclic string of inner normals of its
edges together with the signed coordinate of each supporting line (x for
vertical edges, y for horizontal ones).  The boundary is oriented
counterclockwise, so inner normals are left-hand normals of the traversal
direction.  Vertices, edge intervals, convexity factors and the endpoint
values of the scalar surface field are all derived from the strings.

Distances between shapes are measured in the max norm, the natural metric
of this anisotropy (concentric squares S(l) and S(l+2h) are at distance h).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .medium import ChessboardMedium


class GeometryError(ValueError):
    pass


class Direction(Enum):
    E1 = "e1"
    E2 = "e2"
    ME1 = "-e1"
    ME2 = "-e2"

    @property
    def succ(self) -> "Direction":
        return _SUCC[self]

    @property
    def pred(self) -> "Direction":
        return _PRED[self]

    @property
    def opposite(self) -> "Direction":
        return _SUCC[_SUCC[self]]

    @property
    def axis(self) -> str:
        """'v' if the edge is vertical (normal along x), else 'h'."""
        return "v" if self in (Direction.E1, Direction.ME1) else "h"

    @property
    def inward_sign(self) -> float:
        """Sign linking inward normal motion to the line coordinate."""
        return 1.0 if self in (Direction.E1, Direction.E2) else -1.0

    @property
    def increasing(self) -> bool:
        """Whether CCW traversal runs in the increasing edge coordinate."""
        return self in (Direction.E2, Direction.ME1)

    @property
    def unit(self) -> tuple[float, float]:
        return _UNIT[self]


_SUCC = {
    Direction.E1: Direction.E2,
    Direction.E2: Direction.ME1,
    Direction.ME1: Direction.ME2,
    Direction.ME2: Direction.E1,
}
_PRED = {v: k for k, v in _SUCC.items()}
_UNIT = {
    Direction.E1: (1.0, 0.0),
    Direction.E2: (0.0, 1.0),
    Direction.ME1: (-1.0, 0.0),
    Direction.ME2: (0.0, -1.0),
}

_DIR_FROM_MOVE = {
    # tangent direction of a CCW traversal -> inner (left) normal
    (1, 0): Direction.E2,
    (0, 1): Direction.ME1,
    (-1, 0): Direction.ME2,
    (0, -1): Direction.E1,
}


def turn(a: Direction, b: Direction) -> int:
    """+1 for a convex (left) corner between normals a -> b, -1 for concave."""
    if b is a.succ:
        return 1
    if b is a.pred:
        return -1
    raise GeometryError(f"normals {a} -> {b} are not orthogonal")


@dataclass(frozen=True)
class Polyrectangle:
    normals: tuple[Direction, ...]
    offsets: tuple[float, ...]

    def __post_init__(self):
        m = len(self.normals)
        if m < 4 or m % 2 != 0:
            raise GeometryError(f"need an even number >= 4 of edges, got {m}")
        if len(self.offsets) != m:
            raise GeometryError("normals and offsets must have equal length")
        total = 0
        for i in range(m):
            total += turn(self.normals[i], self.normals[(i + 1) % m])
        if total != 4:
            raise GeometryError(f"turning number {total // 4} != 1, not a simple CCW curve")
        for i in range(m):
            p, q = self.edge_interval(i)
            if q - p < -1e-12 * max(1.0, abs(p), abs(q)):
                raise GeometryError(f"edge {i} has negative length {q - p}")

    @property
    def m(self) -> int:
        return len(self.normals)

    def vertex_before(self, i: int) -> tuple[float, float]:
        """Corner between edges i-1 and i."""
        j = (i - 1) % self.m
        if self.normals[j].axis == "v":
            return (self.offsets[j], self.offsets[i])
        return (self.offsets[i], self.offsets[j])

    def vertices(self) -> list[tuple[float, float]]:
        """CCW vertex list; segment k runs along edge k."""
        return [self.vertex_before(i) for i in range(self.m)]

    def edge_interval(self, i: int) -> tuple[float, float]:
        """Endpoint coordinates (p <= q) of edge i along its line."""
        a = self.offsets[(i - 1) % self.m]
        b = self.offsets[(i + 1) % self.m]
        return (a, b) if self.normals[i].increasing else (b, a)

    def length(self, i: int) -> float:
        p, q = self.edge_interval(i)
        return q - p

    def chi(self, i: int) -> int:
        """Convexity factor: +1 if both corners convex, -1 if both concave."""
        m = self.m
        t0 = turn(self.normals[(i - 1) % m], self.normals[i])
        t1 = turn(self.normals[i], self.normals[(i + 1) % m])
        return (t0 + t1) // 2

    def endpoint_values(self, i: int) -> tuple[int, int]:
        """Prescribed scalar field values (n_p, n_q) at the edge endpoints.

        The value at an endpoint is the component, along this edge's running
        coordinate, of the outward normal of the adjacent edge there.
        """
        m = self.m
        comp = 1 if self.normals[i].axis == "v" else 0

        def nval(j: int) -> int:
            return int(-self.normals[j].unit[comp])

        prev, nxt = (i - 1) % m, (i + 1) % m
        if self.normals[i].increasing:
            return nval(prev), nval(nxt)
        return nval(nxt), nval(prev)

    def area(self) -> float:
        vs = self.vertices()
        s = 0.0
        for k in range(len(vs)):
            x0, y0 = vs[k]
            x1, y1 = vs[(k + 1) % len(vs)]
            s += x0 * y1 - x1 * y0
        return 0.5 * s

    def bbox(self) -> tuple[float, float, float, float]:
        vs = self.vertices()
        xs = [v[0] for v in vs]
        ys = [v[1] for v in vs]
        return min(xs), min(ys), max(xs), max(ys)

    def center(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bbox()
        return 0.5 * (x0 + x1), 0.5 * (y0 + y1)

    def translate(self, dx: float, dy: float) -> "Polyrectangle":
        off = []
        for nu, s in zip(self.normals, self.offsets):
            off.append(s + (dx if nu.axis == "v" else dy))
        return Polyrectangle(self.normals, tuple(off))

    def is_simple(self) -> bool:
        vs = self.vertices()
        m = len(vs)
        segs = [(vs[k], vs[(k + 1) % m]) for k in range(m)]
        for a in range(m):
            for b in range(a + 1, m):
                if b == a + 1 or (a == 0 and b == m - 1):
                    continue
                if _segments_cross(segs[a], segs[b]):
                    return False
        return True

    @classmethod
    def from_vertices(cls, pts: list[tuple[float, float]]) -> "Polyrectangle":
        """Build from an axis-aligned simple closed vertex chain.

        Accepts either orientation; the stored representation is CCW.  A
        repeated final vertex is tolerated.
        """
        pts = [tuple(map(float, p)) for p in pts]
        if len(pts) >= 2 and _close(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < 4:
            raise GeometryError(f"need at least 4 vertices, got {len(pts)}")
        area = 0.0
        for k in range(len(pts)):
            x0, y0 = pts[k]
            x1, y1 = pts[(k + 1) % len(pts)]
            area += 0.5 * (x0 * y1 - x1 * y0)
        if area < 0:
            pts = [pts[0]] + pts[:0:-1]
        normals, offsets = [], []
        n = len(pts)
        for k in range(n):
            x0, y0 = pts[k]
            x1, y1 = pts[(k + 1) % n]
            dx, dy = x1 - x0, y1 - y0
            if (dx != 0.0) == (dy != 0.0):
                raise GeometryError(f"segment {k} from {pts[k]} to {pts[(k + 1) % n]} is not a rectilinear move")
            move = (int(math.copysign(1, dx)) if dx else 0, int(math.copysign(1, dy)) if dy else 0)
            nu = _DIR_FROM_MOVE[move]
            normals.append(nu)
            offsets.append(y0 if nu.axis == "h" else x0)
        for k in range(n):
            if normals[k].axis == normals[(k + 1) % n].axis:
                raise GeometryError("consecutive moves must alternate horizontal/vertical")
        # rotate so that the input's first vertex is the corner before edge 0
        poly = cls(tuple(normals), tuple(offsets))
        if not poly.is_simple():
            raise GeometryError("boundary is self-intersecting")
        return poly

    def to_text(self) -> str:
        vs = self.vertices()
        vs = vs + [vs[0]]
        return "\n".join(f"{x:.17g} {y:.17g}" for x, y in vs) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Polyrectangle":
        pts = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GeometryError(f"line {ln}: expected 'x y', got {raw!r}")
            try:
                pts.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise GeometryError(f"line {ln}: {exc}") from exc
        return cls.from_vertices(pts)


def _close(a, b, tol=1e-12):
    return abs(a[0] - b[0]) <= tol and abs(a[1] - b[1]) <= tol


def _segments_cross(s1, s2, tol: float = 1e-12) -> bool:
    """Proper crossing or positive-length overlap of axis-aligned segments.

    Touching at a single point is tolerated: breaking and merging pass
    through degenerate configurations where pieces meet end to end.
    """
    (ax0, ay0), (ax1, ay1) = s1
    (bx0, by0), (bx1, by1) = s2
    a_vert = abs(ax1 - ax0) <= tol
    b_vert = abs(bx1 - bx0) <= tol
    if abs(ax1 - ax0) <= tol and abs(ay1 - ay0) <= tol:
        return False
    if abs(bx1 - bx0) <= tol and abs(by1 - by0) <= tol:
        return False
    if a_vert != b_vert:
        if a_vert:
            (ax0, ay0), (ax1, ay1), (bx0, by0), (bx1, by1) = (bx0, by0), (bx1, by1), (ax0, ay0), (ax1, ay1)
        hx0, hx1 = min(ax0, ax1), max(ax0, ax1)
        vy0, vy1 = min(by0, by1), max(by0, by1)
        return hx0 + tol < bx0 < hx1 - tol and vy0 + tol < ay0 < vy1 - tol
    if a_vert:
        if abs(ax0 - bx0) > tol:
            return False
        lo = max(min(ay0, ay1), min(by0, by1))
        hi = min(max(ay0, ay1), max(by0, by1))
        return hi - lo > tol
    if abs(ay0 - by0) > tol:
        return False
    lo = max(min(ax0, ax1), min(bx0, bx1))
    hi = min(max(ax0, ax1), max(bx0, bx1))
    return hi - lo > tol


@dataclass(frozen=True)
class EdgeView:
    """One facet of a polyrectangle with everything the 1D theory needs."""

    index: int
    normal: Direction
    line_offset: float
    p: float
    q: float
    chi: int
    n_p: int
    n_q: int
    on_grid: bool

    @property
    def length(self) -> float:
        return self.q - self.p

    @property
    def axis(self) -> str:
        """Axis of the trace the edge lives on ('h' for horizontal edges)."""
        return "h" if self.normal.axis == "h" else "v"


def edges(poly: Polyrectangle, medium: ChessboardMedium) -> list[EdgeView]:
    out = []
    for i in range(poly.m):
        p, q = poly.edge_interval(i)
        n_p, n_q = poly.endpoint_values(i)
        out.append(
            EdgeView(
                index=i,
                normal=poly.normals[i],
                line_offset=poly.offsets[i],
                p=p,
                q=q,
                chi=poly.chi(i),
                n_p=n_p,
                n_q=n_q,
                on_grid=medium.is_on_grid(poly.offsets[i]),
            )
        )
    return out


# Max-norm distances ---------------------------------------------------------

def _pt_seg_dist(px, py, ax, ay, bx, by) -> float:
    """Max-norm distance from a point to a segment (exact)."""
    dx, dy = bx - ax, by - ay
    u0, w0 = ax - px, ay - py
    cands = [0.0, 1.0]
    for denom, numer in (
        (dx, -u0),
        (dy, -w0),
        (dx - dy, w0 - u0),
        (dx + dy, -(u0 + w0)),
    ):
        if denom != 0.0:
            t = numer / denom
            if 0.0 < t < 1.0:
                cands.append(t)
    best = math.inf
    for t in cands:
        v = max(abs(u0 + dx * t), abs(w0 + dy * t))
        if v < best:
            best = v
    return best


def _point_in_polygon(px, py, verts) -> bool:
    inside = False
    n = len(verts)
    for k in range(n):
        x0, y0 = verts[k]
        x1, y1 = verts[(k + 1) % n]
        if (y0 > py) != (y1 > py):
            xc = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
            if xc > px:
                inside = not inside
    return inside


def _dist_to_filled(px, py, verts) -> float:
    if len(verts) >= 3 and _point_in_polygon(px, py, verts):
        return 0.0
    best = math.inf
    n = len(verts)
    for k in range(max(n - 1, 1) if n < 3 else n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        d = _pt_seg_dist(px, py, ax, ay, bx, by)
        if d < best:
            best = d
    return best


def _seg_param_candidates(p0, p1, verts) -> list[float]:
    """Parameters along segment p0->p1 where dist(., polygon) may kink."""
    x0, y0 = p0
    dx, dy = p1[0] - x0, p1[1] - y0
    ts = {0.0, 1.0}

    def add(t):
        if 0.0 < t < 1.0:
            ts.add(t)

    for vx, vy in verts:
        if dx != 0.0:
            add((vx - x0) / dx)
        if dy != 0.0:
            add((vy - y0) / dy)
        if dx + dy != 0.0:
            add((vx + vy - x0 - y0) / (dx + dy))
        if dx - dy != 0.0:
            add((vx - vy - x0 + y0) / (dx - dy))
    # boundary crossings
    n = len(verts)
    for k in range(n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        ex, ey = bx - ax, by - ay
        den = dx * ey - dy * ex
        if den != 0.0:
            t = ((ax - x0) * ey - (ay - y0) * ex) / den
            add(t)
    return sorted(ts)


def _directed_hausdorff(averts, bverts) -> float:
    if len(averts) == 1:
        return _dist_to_filled(averts[0][0], averts[0][1], bverts)
    best = 0.0
    n = len(averts)
    segments = [(averts[k], averts[(k + 1) % n]) for k in range(n)] if n > 2 else [(averts[0], averts[1])]
    for p0, p1 in segments:
        dx, dy = p1[0] - p0[0], p1[1] - p0[1]

        def f(t):
            return _dist_to_filled(p0[0] + dx * t, p0[1] + dy * t, bverts)

        ts = _seg_param_candidates(p0, p1, bverts)
        vals = [f(t) for t in ts]
        best = max(best, max(vals))
        for k in range(len(ts) - 1):
            lo, hi = ts[k], ts[k + 1]
            flo, fhi = vals[k], vals[k + 1]
            if flo == 0.0 and fhi == 0.0:
                continue
            # f is concave on [lo, hi]; ternary search for the maximum
            for _ in range(48):
                m1 = lo + (hi - lo) / 3.0
                m2 = hi - (hi - lo) / 3.0
                if f(m1) < f(m2):
                    lo = m1
                else:
                    hi = m2
            best = max(best, f(0.5 * (lo + hi)))
    return best


def polygon_hausdorff(averts, bverts) -> float:
    """Hausdorff distance (max norm) between two filled simple polygons."""
    if not averts or not bverts:
        raise GeometryError("empty polygon")
    return max(_directed_hausdorff(averts, bverts), _directed_hausdorff(bverts, averts))


def hausdorff_distance(a: Polyrectangle, b: Polyrectangle) -> float:
    return polygon_hausdorff(a.vertices(), b.vertices())


# Energy ---------------------------------------------------------------------

def _slab_rectangles(poly: Polyrectangle):
    """Decompose the enclosed region into horizontal slabs of rectangles."""
    m = poly.m
    ys = sorted({poly.offsets[i] for i in range(m) if poly.normals[i].axis == "h"})
    for y0, y1 in zip(ys[:-1], ys[1:]):
        if y1 - y0 <= 0:
            continue
        ym = 0.5 * (y0 + y1)
        xs = []
        for i in range(m):
            if poly.normals[i].axis != "v":
                continue
            p, q = poly.edge_interval(i)
            if p < ym < q:
                xs.append(poly.offsets[i])
        xs.sort()
        for k in range(0, len(xs) - 1, 2):
            yield xs[k], xs[k + 1], y0, y1


def energy(poly: Polyrectangle, medium: ChessboardMedium) -> float:
    """Perimeter plus the exact forcing volume of the enclosed region."""
    if poly.area() <= 0:
        raise GeometryError("degenerate polyrectangle")
    per = sum(poly.length(i) for i in range(poly.m))
    vol = 0.0
    for x0, x1, y0, y1 in _slab_rectangles(poly):
        vol += medium.rect_integral(x0, x1, y0, y1)
    return per + vol


def from_vertices(pts) -> Polyrectangle:
    return Polyrectangle.from_vertices(pts)
