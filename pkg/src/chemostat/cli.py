"""Command line front end.

    chemostat steady-states      [--S-in X --D Y]
    chemostat simulate           [--ic S,x1,x2 ...] [--random N --seed K]
    chemostat operating-diagram  [--S-in-range A B --D-range C E --resolution N M]
    chemostat bifurcation        [--S-in X --D-range C E]

Every subcommand accepts ``--config PATH`` (JSON, see
:mod:`chemostat.config`), ``--out DIR`` and ``--format csv,svg``. Exit codes:
0 success, 2 configuration error, 3 internal-consistency error,
4 integrator failure.
"""
from __future__ import annotations

import argparse
import csv
import random
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import GridMode, LineMode, OutputConfig, PointMode, RunConfig
from .diagram import (CURVE_COLORS, REGION_COLORS, branch_table, classify_region,
                      codim2_candidates, curves_to_csv, grid_diagram, scan_dilution)
from .dynamics import integrate, omega_bound
from .equilibria import OperatingPoint, find_steady_states
from .errors import ConsistencyError, IntegrationError, ParameterError
from .growth import default_model
from .stability import with_stability
from .svg import Figure

EXIT_OK, EXIT_CONFIG, EXIT_CONSISTENCY, EXIT_INTEGRATOR = 0, 2, 3, 4
STATE_COLORS = {"E0": "black", "E1": "red", "E2": "blue", "Estar": "orange"}


def fmt(v) -> str:
    return f"{v:.12g}"


def _writer(path):
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- subcommands ------------------------------------------------------------

def cmd_steady_states(cfg: RunConfig, stdout=None) -> list:
    """Print and save every steady state at the configured point."""
    stdout = stdout or sys.stdout
    if cfg.point is None:
        raise ParameterError("steady-states needs point mode")
    p = cfg.parameters
    model = default_model(p)
    op = OperatingPoint(cfg.point.S_in, cfg.point.D)
    states = with_stability(find_steady_states(op, model, p), op, model, p)
    region = classify_region(op, model, p).label
    rows = [[s.kind, fmt(s.S), fmt(s.x1), fmt(s.x2), s.stability.classification,
             s.stability.letter, fmt(s.residual), region] for s in states]
    header = ["kind", "S", "x1", "x2", "stability", "letter", "residual", "region"]
    print(f"S_in={fmt(op.S_in)} D={fmt(op.D)} region={region}", file=stdout)
    for r in rows:
        print(f"  {r[0]:<6} S={r[1]:<16} x1={r[2]:<16} x2={r[3]:<16} {r[4]}", file=stdout)
    out = _outdir(cfg)
    if "csv" in cfg.output.formats:
        fh, w = _writer(out / "steady_states.csv")
        with fh:
            w.writerow(header)
            w.writerows(rows)
    return states


def cmd_simulate(cfg: RunConfig, ics, stdout=None) -> list:
    """Integrate each initial condition and label the attractor it reaches."""
    stdout = stdout or sys.stdout
    if cfg.point is None:
        raise ParameterError("simulate needs point mode")
    if not ics:
        raise ParameterError("simulate needs at least one initial condition")
    p = cfg.parameters
    model = default_model(p)
    op = OperatingPoint(cfg.point.S_in, cfg.point.D)
    eq = with_stability(find_steady_states(op, model, p), op, model, p)
    out = _outdir(cfg)
    trajs = []
    for k, ic in enumerate(ics):
        tr = integrate(ic, op, model, p, cfg.integrator, eq)
        trajs.append((ic, tr))
        if "csv" in cfg.output.formats:
            tr.to_csv(out / f"trajectory_{k:03d}.csv")
    summary = [[k, *map(fmt, ic), tr.settled_on or "unsettled", *map(fmt, tr.final), fmt(tr.times[-1])]
               for k, (ic, tr) in enumerate(trajs)]
    for row in summary:
        print(f"  ic#{row[0]:03d} ({row[1]}, {row[2]}, {row[3]}) -> {row[4]}", file=stdout)
    if "csv" in cfg.output.formats:
        fh, w = _writer(out / "summary.csv")
        with fh:
            w.writerow(["index", "S0", "x1_0", "x2_0", "attractor", "S", "x1", "x2", "t_final"])
            w.writerows(summary)
    if "svg" in cfg.output.formats:
        top = max([omega_bound(op, p)] + [max(ic[1], ic[2]) for ic in ics])
        fig = Figure((0, top), (0, top), f"S_in={op.S_in:g}, D={op.D:g}", "x1", "x2")
        for _, tr in trajs:
            fig.polyline(tr.states[:, 1], tr.states[:, 2], "gray", width=1)
            fig.marker(tr.states[0, 1], tr.states[0, 2], "white", size=2.5)
        for s in eq:
            color = "red" if s.stability.letter == "S" else "blue"
            fig.marker(s.x1, s.x2, color, label=s.kind)
        fig.save(out / "phase_x1_x2.svg")
    return trajs


def cmd_operating_diagram(cfg: RunConfig, stdout=None):
    """Region grid, boundary curves and codimension-two candidates."""
    stdout = stdout or sys.stdout
    if cfg.grid is None:
        raise ParameterError("operating-diagram needs grid mode")
    p = cfg.parameters
    model = default_model(p)
    g = cfg.grid
    grid = grid_diagram(g.S_in_range, g.D_range, g.resolution, model, p)
    cands = codim2_candidates(model, p, g.D_range, S_in_max=g.S_in_range[1])
    cands = [c for c in cands if g.S_in_range[0] <= c.S_in <= g.S_in_range[1]]
    counts = grid.counts()
    print("regions: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())), file=stdout)
    for c in cands:
        print(f"  candidate {c.kind}: S_in={fmt(c.S_in)} D={fmt(c.D)} curves={'/'.join(c.curves)}",
              file=stdout)
    out = _outdir(cfg)
    if "csv" in cfg.output.formats:
        grid.to_csv(out / "regions.csv")
        curves_to_csv(grid.curves, out / "curves.csv")
        fh, w = _writer(out / "codim2.csv")
        with fh:
            w.writerow(["kind", "S_in", "D", "curves", "S", "x1", "x2"])
            for c in cands:
                w.writerow([c.kind, fmt(c.S_in), fmt(c.D), "/".join(c.curves), *map(fmt, c.state)])
    if "svg" in cfg.output.formats:
        fig = Figure(tuple(g.S_in_range), tuple(g.D_range), "Operating diagram", "S_in", "D")
        dS = (g.S_in_range[1] - g.S_in_range[0]) / len(grid.S_in)
        dD = (g.D_range[1] - g.D_range[0]) / len(grid.D)
        for r, D in enumerate(grid.D):
            row = grid.labels[r]
            start = 0
            for c in range(1, len(row) + 1):
                if c == len(row) or row[c] != row[start]:
                    fig.rect(grid.S_in[start] - dS / 2, D - dD / 2, grid.S_in[c - 1] + dS / 2,
                             D + dD / 2, REGION_COLORS[row[start]])
                    start = c
        for cv in grid.curves:
            if cv.samples:
                xs, ys = zip(*cv.samples)
                fig.polyline(xs, ys, CURVE_COLORS[cv.id], width=2)
        for c in cands:
            fig.marker(c.S_in, c.D, "white", shape="diamond", label=_cand_label(c))
        fig.save(out / "operating_diagram.svg")
    return grid, cands


def _cand_label(c):
    return {"intersection": "ZH?", "neutral-saddle": "ZH?", "zero-dilution-limit": "BT?"}.get(c.kind, "")


def cmd_bifurcation(cfg: RunConfig, stdout=None):
    """Transcritical points along ``D`` and the steady-state branches."""
    stdout = stdout or sys.stdout
    if cfg.line is None:
        raise ParameterError("bifurcation needs line mode")
    p = cfg.parameters
    model = default_model(p)
    ln = cfg.line
    points = scan_dilution(ln.S_in, ln.D_range, model, p)
    Ds = np.geomspace(ln.D_range[0], ln.D_range[1], ln.n)
    rows = branch_table(ln.S_in, Ds, model, p)
    for b in points:
        print(f"  D={fmt(b.value)} {b.type} {b.pair[0]}={b.pair[1]} ({b.curve})", file=stdout)
    out = _outdir(cfg)
    if "csv" in cfg.output.formats:
        fh, w = _writer(out / "sigma.csv")
        with fh:
            w.writerow(["value", "type", "pair", "curve"])
            for b in points:
                w.writerow([fmt(b.value), b.type, f"{b.pair[0]}={b.pair[1]}", b.curve])
        fh, w = _writer(out / "branches.csv")
        with fh:
            w.writerow(["D", "kind", "S", "x1", "x2", "stability"])
            for row in rows:
                for kind, state in row["states"].items():
                    w.writerow([fmt(row["D"]), kind, *map(fmt, state), row[kind]])
    if "svg" in cfg.output.formats:
        _bifurcation_svg(ln, rows, points, out / "bifurcation.svg")
    return points, rows


def _bifurcation_svg(ln, rows, points, path):
    fig = Figure(tuple(ln.D_range), (0, ln.S_in * 1.05), f"S_in={ln.S_in:g}", "D", "S")
    for kind in ("E0", "E1", "E2", "Estar"):
        run, letter = [], None
        for row in rows + [{"D": None, kind: None, "states": {}}]:
            cur = row.get(kind)
            if cur != letter and run:
                xs, ys = zip(*run)
                stable = letter == "S"
                fig.polyline(xs, ys, "red" if stable else "blue", width=2, dashed=not stable)
                run = [run[-1]] if cur is not None else []
            if cur is not None:
                run.append((row["D"], row["states"][kind][0]))
            letter = cur
    for b in points:
        fig.marker(b.value, b.state[0], "green", shape="diamond", size=6)
    fig.save(path)


# -- argument handling --------------------------------------------------------

def _parse_ic(text):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad initial condition {text!r}") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("initial condition needs three values S,x1,x2")
    return vals


def _formats(text):
    return tuple(f.strip() for f in text.split(",") if f.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON run configuration")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--format", type=_formats, default=argparse.SUPPRESS,
                        help="comma separated subset of csv,svg")

    parser = argparse.ArgumentParser(prog="chemostat", parents=[common],
                                     description="Two-species interspecific competition chemostat")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("steady-states", parents=[common], help="steady states at one point")
    sp.add_argument("--S-in", type=float, dest="S_in")
    sp.add_argument("--D", type=float)

    sp = sub.add_parser("simulate", parents=[common], help="integrate trajectories")
    sp.add_argument("--S-in", type=float, dest="S_in")
    sp.add_argument("--D", type=float)
    sp.add_argument("--ic", type=_parse_ic, action="append", default=[], help="S,x1,x2")
    sp.add_argument("--random", type=int, default=0, help="add N random positive initial conditions")
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("operating-diagram", parents=[common], help="region map over (S_in, D)")
    sp.add_argument("--S-in-range", type=float, nargs=2, dest="S_in_range")
    sp.add_argument("--D-range", type=float, nargs=2, dest="D_range")
    sp.add_argument("--resolution", type=int, nargs=2)

    sp = sub.add_parser("bifurcation", parents=[common], help="one-parameter scan in D")
    sp.add_argument("--S-in", type=float, dest="S_in")
    sp.add_argument("--D-range", type=float, nargs=2, dest="D_range")
    sp.add_argument("--n", type=int)
    return parser


_MODE_OF = {"steady-states": "point", "simulate": "point",
            "operating-diagram": "grid", "bifurcation": "line"}
_MODE_CLASS = {"point": PointMode, "line": LineMode, "grid": GridMode}


def resolve_config(args) -> RunConfig:
    """Configuration file (or defaults) with command line overrides applied."""
    mode = _MODE_OF[args.command]
    if getattr(args, "config", None):
        cfg = cfgmod.load(args.config)
        current = getattr(cfg, mode)
        if current is None:
            raise ParameterError(f"{args.command} needs '{mode}' in the configuration's operating section")
    else:
        current = _MODE_CLASS[mode]()
        cfg = RunConfig(**{mode: current})
    overrides = {}
    for name in ("S_in", "D", "S_in_range", "D_range", "resolution", "n"):
        v = getattr(args, name, None)
        if v is not None and hasattr(current, name):
            overrides[name] = tuple(v) if isinstance(v, list) else v
    if overrides:
        cfg = replace(cfg, **{mode: replace(current, **overrides)})
    out = {}
    if getattr(args, "out", None):
        out["directory"] = args.out
    if getattr(args, "format", None) is not None:
        out["formats"] = args.format
    if out:
        cfg = replace(cfg, output=replace(cfg.output, **out))
    return cfg


def _random_ics(cfg, n, seed):
    op = OperatingPoint(cfg.point.S_in, cfg.point.D)
    top = omega_bound(op, cfg.parameters)
    rng = random.Random(seed)
    return [tuple(rng.uniform(0.01, 1.0) * top / 3 for _ in range(3)) for _ in range(n)]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "steady-states":
            cmd_steady_states(cfg)
        elif args.command == "simulate":
            ics = list(args.ic) + _random_ics(cfg, args.random, args.seed)
            cmd_simulate(cfg, ics)
        elif args.command == "operating-diagram":
            cmd_operating_diagram(cfg)
        else:
            cmd_bifurcation(cfg)
    except ParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except IntegrationError as exc:
        print(f"integrator failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
