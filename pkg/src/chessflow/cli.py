"""Command-line front end: simulate, effective, compare, sweep."""

from __future__ import annotations

import argparse
import sys

from .flow import FlowError
from .geometry import GeometryError
from .harness import ConfigError, RunConfig, cmd_compare, cmd_effective, cmd_simulate, cmd_sweep, parse_config_file
from .medium import MediumError


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value config file; command-line flags override it")
    p.add_argument("--alpha", type=float, help="negative forcing value")
    p.add_argument("--beta", type=float, help="positive forcing value")
    p.add_argument("--epsilon", help="cell period, or comma list for compare/sweep")
    p.add_argument("--square", type=float, help="initial square side")
    p.add_argument("--rectangle", help="initial rectangle sides 'L1,L2'")
    p.add_argument("--vertices", help="initial polyrectangle vertex file (x y per line, closed)")
    p.add_argument("--align", help="'cell_corner' (default) or 'offset:dx,dy'")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--dt-out", type=float, dest="dt_out")
    p.add_argument("--out", help="output directory")
    p.add_argument("--no-frames", action="store_true", help="skip SVG frame rendering")
    p.add_argument("--workers", type=int, help="parallel workers for sweep")


def _build_config(args) -> RunConfig:
    vals: dict = {}
    if args.config:
        vals.update(parse_config_file(args.config))

    def pick(key, cast=str, default=None):
        cli = getattr(args, key, None)
        if cli is not None and cli is not False:
            return cli
        if key in vals:
            return cast(vals[key])
        return default

    cfg = RunConfig()
    alpha = pick("alpha", float, cfg.alpha)
    beta = pick("beta", float, cfg.beta)
    eps_raw = pick("epsilon", str, None)
    if eps_raw is None:
        epsilons = cfg.epsilons
    else:
        epsilons = tuple(float(tok) for tok in str(eps_raw).split(",") if tok.strip())
    shape = cfg.shape
    if pick("square", float, None) is not None:
        shape = ("square", float(pick("square", float)))
    elif pick("rectangle", str, None) is not None:
        l1, l2 = (float(tok) for tok in str(pick("rectangle", str)).split(","))
        shape = ("rectangle", l1, l2)
    elif pick("vertices", str, None) is not None:
        shape = ("vertices", str(pick("vertices", str)))
    align_raw = pick("align", str, "cell_corner")
    if align_raw == "cell_corner":
        alignment: tuple = ("cell_corner",)
    elif align_raw.startswith("offset:"):
        dx, dy = (float(tok) for tok in align_raw[len("offset:"):].split(","))
        alignment = ("offset", dx, dy)
    else:
        raise ConfigError(f"unknown alignment {align_raw!r}")
    frames = not args.no_frames if args.no_frames else str(vals.get("frames", "1")) not in ("0", "false", "no")
    return RunConfig(
        alpha=alpha,
        beta=beta,
        epsilons=epsilons,
        shape=shape,
        alignment=alignment,
        t_max=pick("t_max", float, cfg.t_max),
        dt_out=pick("dt_out", float, cfg.dt_out),
        outdir=pick("out", str, cfg.outdir),
        frames=frames,
        workers=int(pick("workers", int, 1)),
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chessflow",
        description="Facet dynamics of rectilinear curves forced by a chessboard medium.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("simulate", "run one finite-period flow and write its trajectory"),
        ("effective", "integrate the limit dynamics of a square or rectangle"),
        ("compare", "run flows for several periods against the limit motion"),
        ("sweep", "run one flow per period value"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
    args = parser.parse_args(argv)
    try:
        config = _build_config(args)
        if args.command == "simulate":
            return cmd_simulate(config)
        if args.command == "effective":
            return cmd_effective(config)
        if args.command == "compare":
            return cmd_compare(config)
        return cmd_sweep(config)
    except (ConfigError, MediumError, GeometryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FlowError as exc:
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
