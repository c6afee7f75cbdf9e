"""Run configuration, initial data construction, and the batch commands.

The commands write fixed filenames under the output directory:
``trajectory.csv`` and ``events.log`` for a simulation, ``effective.csv``
for the limit dynamics, ``report.csv`` for comparisons and sweeps, and
``frames/NNNN.svg`` when frame rendering is enabled.  All floats are
written with a fixed format so repeated runs are byte-identical.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from . import svg
from .effective import RectangleMotion, SquareMotion, invariants
from .flow import FacetFlow, FlowTrajectory
from .geometry import Polyrectangle, polygon_hausdorff
from .medium import ChessboardMedium


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    alpha: float = -3.0
    beta: float = 1.0
    epsilons: tuple[float, ...] = (0.5,)
    shape: tuple = ("square", 1.5)  # ('square', l) | ('rectangle', l1, l2) | ('vertices', path)
    alignment: tuple = ("cell_corner",)  # ('cell_corner',) | ('offset', dx, dy)
    t_max: float = 1.0
    dt_out: float = 0.05
    outdir: str = "out"
    frames: bool = True
    workers: int = 1

    def validate(self):
        if not self.alpha < 0 < self.beta:
            raise ConfigError("alpha must be negative and beta positive")
        for eps in self.epsilons:
            if not 0 < eps < 8.0 / (self.beta - self.alpha):
                raise ConfigError(f"epsilon {eps} outside (0, 8/(beta-alpha))")
        if self.shape[0] == "square" and self.shape[1] <= 0:
            raise ConfigError("square side must be positive")
        if self.shape[0] == "rectangle" and (self.shape[1] <= 0 or self.shape[2] <= 0):
            raise ConfigError("rectangle sides must be positive")
        if self.t_max <= 0 or self.dt_out <= 0:
            raise ConfigError("t_max and dt_out must be positive")


def parse_config_file(path: str) -> dict:
    vals: dict = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected key=value, got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            vals[key] = val
    return vals


def odd_halfcell_multiple(length: float, eps: float) -> float:
    """Nearest odd multiple of eps/2 (ties resolved deterministically)."""
    half = 0.5 * eps
    k = round((length / half - 1.0) / 2.0)
    k = max(k, 0)
    return (2 * k + 1) * half


def build_initial(config: RunConfig, eps: float) -> Polyrectangle:
    """Initial polyrectangle for one period; cell_corner squares/rectangles
    are anchored at the origin with sides snapped to odd half-cell counts,
    so every corner has an inside alpha cell."""
    kind = config.shape[0]
    if kind == "square":
        side = odd_halfcell_multiple(config.shape[1], eps)
        pts = [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side)]
        poly = Polyrectangle.from_vertices(pts)
    elif kind == "rectangle":
        a = odd_halfcell_multiple(config.shape[1], eps)
        b = odd_halfcell_multiple(config.shape[2], eps)
        pts = [(0.0, 0.0), (a, 0.0), (a, b), (0.0, b)]
        poly = Polyrectangle.from_vertices(pts)
    elif kind == "vertices":
        with open(config.shape[1]) as fh:
            poly = Polyrectangle.from_text(fh.read())
    else:
        raise ConfigError(f"unknown shape kind {kind!r}")
    if config.alignment[0] == "offset":
        poly = poly.translate(config.alignment[1], config.alignment[2])
    return poly


def pinned_octagon(medium: ChessboardMedium, straight_len: float, steps: int | None = None) -> Polyrectangle:
    """Symmetric pinned octagon: four straight facets joined by half-cell
    staircases, with every vertex on an inside-alpha cell corner.

    The straight length is snapped to an odd number of half cells; the
    staircase extent defaults to roughly half the straight length.
    """
    h = medium.half
    side = odd_halfcell_multiple(straight_len, medium.epsilon)
    if steps is None:
        steps = max(1, round(0.5 * side / h))
    pts = [(0.0, 0.0), (side, 0.0)]
    x, y = side, 0.0
    for _ in range(steps):  # lower-right staircase: up, right
        y += h
        pts.append((x, y))
        x += h
        pts.append((x, y))
    y += side  # right facet
    pts.append((x, y))
    for _ in range(steps):  # upper-right: left, up
        x -= h
        pts.append((x, y))
        y += h
        pts.append((x, y))
    x -= side  # top facet
    pts.append((x, y))
    for _ in range(steps):  # upper-left: down, left
        y -= h
        pts.append((x, y))
        x -= h
        pts.append((x, y))
    y -= side  # left facet
    pts.append((x, y))
    for _ in range(steps):  # lower-left: right, down
        x += h
        pts.append((x, y))
        y -= h
        pts.append((x, y))
    return Polyrectangle.from_vertices(pts)


# -- output writers ----------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_trajectory_csv(traj: FlowTrajectory, path: str):
    with open(path, "w") as fh:
        fh.write("time,edge_index,normal,offset,length,pinned\n")
        for sample in traj.samples:
            poly = sample.poly
            for i in range(poly.m):
                fh.write(
                    f"{_fmt(sample.time)},{i},{poly.normals[i].value},"
                    f"{_fmt(poly.offsets[i])},{_fmt(poly.length(i))},{int(sample.pinned[i])}\n"
                )


def write_events_log(traj: FlowTrajectory, path: str):
    with open(path, "w") as fh:
        for ev in traj.events:
            idx = " ".join(str(i) for i in ev.edges)
            fh.write(f"{_fmt(ev.time)} {ev.kind.value}{' ' + idx if idx else ''}\n")
        fh.write(f"{_fmt(traj.final_time)} status {traj.status}\n")


def write_frames(traj: FlowTrajectory, medium: ChessboardMedium, outdir: str):
    frames_dir = os.path.join(outdir, "frames")
    os.makedirs(frames_dir, exist_ok=True)
    bounds = None
    for sample in traj.samples:
        x0, y0, x1, y1 = sample.poly.bbox()
        pad = 2 * medium.half
        b = (x0 - pad, y0 - pad, x1 + pad, y1 + pad)
        bounds = b if bounds is None else (
            min(bounds[0], b[0]), min(bounds[1], b[1]), max(bounds[2], b[2]), max(bounds[3], b[3])
        )
    for k, sample in enumerate(traj.samples):
        poly = sample.poly
        pinned_segs = []
        vs = poly.vertices()
        for i in range(poly.m):
            if sample.pinned[i] and poly.length(i) > 1e-12:
                pinned_segs.append((vs[i], vs[(i + 1) % poly.m]))
        doc = svg.render_frame(vs, medium, pinned_segs, bounds, label=f"t={_fmt(sample.time)}")
        with open(os.path.join(frames_dir, f"{k:04d}.svg"), "w") as fh:
            fh.write(doc)


# -- commands ----------------------------------------------------------------

def _single_eps(config: RunConfig) -> float:
    if len(config.epsilons) != 1:
        raise ConfigError("this command needs exactly one epsilon")
    return config.epsilons[0]


def simulate_once(config: RunConfig, eps: float) -> tuple[FlowTrajectory, Polyrectangle, ChessboardMedium]:
    medium = ChessboardMedium(config.alpha, config.beta, eps)
    initial = build_initial(config, eps)
    flow = FacetFlow(medium)
    traj = flow.run(initial, config.t_max, config.dt_out)
    return traj, initial, medium


def cmd_simulate(config: RunConfig) -> int:
    config.validate()
    eps = _single_eps(config)
    traj, _, medium = simulate_once(config, eps)
    os.makedirs(config.outdir, exist_ok=True)
    write_trajectory_csv(traj, os.path.join(config.outdir, "trajectory.csv"))
    write_events_log(traj, os.path.join(config.outdir, "events.log"))
    if config.frames:
        write_frames(traj, medium, config.outdir)
    return 0


def effective_motion(config: RunConfig, center=(0.0, 0.0)):
    if config.shape[0] == "square":
        return SquareMotion(config.shape[1], config.alpha, config.beta, config.t_max, center)
    if config.shape[0] == "rectangle":
        l1, l2 = max(config.shape[1:3]), min(config.shape[1:3])
        if l1 == l2:
            return SquareMotion(l1, config.alpha, config.beta, config.t_max, center)
        return RectangleMotion(l1, l2, config.alpha, config.beta, config.t_max, center)
    raise ConfigError("the limit dynamics needs a square or rectangle shape")


def cmd_effective(config: RunConfig) -> int:
    config.validate()
    motion = effective_motion(config)
    os.makedirs(config.outdir, exist_ok=True)
    times = _time_grid(config.t_max, config.dt_out)
    with open(os.path.join(config.outdir, "effective.csv"), "w") as fh:
        fh.write("time,kind,l1,l2,U,J\n")
        for t in times:
            stt = motion.state(t)
            if stt.kind == "point":
                u = j = float("nan")
            else:
                u, j = invariants(max(stt.l1, 1e-300), max(stt.l2, 1e-300), config.alpha, config.beta)
            fh.write(f"{_fmt(t)},{stt.kind},{_fmt(stt.l1)},{_fmt(stt.l2)},{_fmt(u)},{_fmt(j)}\n")
    with open(os.path.join(config.outdir, "case.txt"), "w") as fh:
        fh.write(motion.tag.value + "\n")
        if getattr(motion, "extinction_time", None) is not None:
            fh.write(f"extinction {_fmt(motion.extinction_time)}\n")
        if getattr(motion, "switch_time", None) is not None:
            fh.write(f"octagon_switch {_fmt(motion.switch_time)}\n")
    if config.shape[0] == "rectangle":
        doc = svg.render_phase_portrait(config.alpha, config.beta, config.shape[1], config.shape[2], config.t_max)
        with open(os.path.join(config.outdir, "phase_portrait.svg"), "w") as fh:
            fh.write(doc)
    return 0


def _time_grid(t_max: float, dt: float) -> list[float]:
    n = int(round(t_max / dt))
    return [k * dt for k in range(n + 1)]


def sample_polygons(traj: FlowTrajectory, times: list[float]) -> list[list[tuple[float, float]]]:
    """Polygon at each requested time (nearest recorded sample at or before)."""
    out = []
    k = 0
    last_center = traj.samples[-1].poly.center()
    for t in times:
        while k + 1 < len(traj.samples) and traj.samples[k + 1].time <= t + 1e-12:
            k += 1
        if traj.status == "extinct" and t >= traj.final_time - 1e-12:
            out.append([last_center])
        else:
            out.append(traj.samples[k].poly.vertices())
    return out


@dataclass
class ComparisonReport:
    epsilons: list[float]
    sup_distances: list[float]
    distances: list[list[float]] = field(default_factory=list)

    def ratios(self) -> list[float]:
        return [
            self.sup_distances[k] / self.sup_distances[k - 1] if self.sup_distances[k - 1] > 0 else float("nan")
            for k in range(1, len(self.sup_distances))
        ]


def compare_flows(config: RunConfig) -> ComparisonReport:
    """Hausdorff distance between each period's flow and the limit motion."""
    config.validate()
    times = _time_grid(config.t_max, config.dt_out)
    report = ComparisonReport([], [])
    for eps in config.epsilons:
        traj, initial, medium = simulate_once(config, eps)
        center = initial.center()
        motion = effective_motion(config, center)
        polys = sample_polygons(traj, times)
        dists = []
        for t, pv in zip(times, polys):
            limit = motion.state(t).polygon()
            dists.append(polygon_hausdorff(pv, limit))
        report.epsilons.append(eps)
        report.sup_distances.append(max(dists))
        report.distances.append(dists)
    return report


def cmd_compare(config: RunConfig) -> int:
    report = compare_flows(config)
    os.makedirs(config.outdir, exist_ok=True)
    times = _time_grid(config.t_max, config.dt_out)
    with open(os.path.join(config.outdir, "report.csv"), "w") as fh:
        fh.write("epsilon,sup_hausdorff,ratio_to_previous\n")
        prev = None
        for eps, sup in zip(report.epsilons, report.sup_distances):
            ratio = "" if prev is None or prev == 0 else _fmt(sup / prev)
            fh.write(f"{_fmt(eps)},{_fmt(sup)},{ratio}\n")
            prev = sup
    with open(os.path.join(config.outdir, "distances.csv"), "w") as fh:
        fh.write("time," + ",".join(f"eps_{_fmt(e)}" for e in report.epsilons) + "\n")
        for k, t in enumerate(times):
            row = ",".join(_fmt(report.distances[j][k]) for j in range(len(report.epsilons)))
            fh.write(f"{_fmt(t)},{row}\n")
    return 0


def _sweep_one(args):
    config, eps = args
    sub = replace(config, epsilons=(eps,), outdir=os.path.join(config.outdir, f"eps_{_fmt(eps)}"))
    cmd_simulate(sub)
    traj, _, _ = simulate_once(sub, eps)
    return eps, traj.status, traj.final_time, len(traj.events)


def cmd_sweep(config: RunConfig) -> int:
    config.validate()
    os.makedirs(config.outdir, exist_ok=True)
    jobs = [(config, eps) for eps in config.epsilons]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    with open(os.path.join(config.outdir, "report.csv"), "w") as fh:
        fh.write("epsilon,status,final_time,events\n")
        for eps, status, t, nev in results:
            fh.write(f"{_fmt(eps)},{status},{_fmt(t)},{nev}\n")
    return 0
