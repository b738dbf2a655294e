"""Command-line entry point.

Subcommands: simulate, decay, symbols, verify.  Exit codes: 0 success,
2 config error, 3 numerical failure/blow-up, 4 acceptance failure.
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import (__version__, acceptance, config as cfgmod, diagnostics, solver,
               spectral, symbols)
from .config import ConfigError
from .solver import BlowUpError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4

GNUPLOT_SCRIPT = """# gnuplot script for the emitted series files
set logscale xy
plot for [f in system("ls *.dat")] f using 1:2 with lines title f
"""


def _out_dir(base, label, chash):
    """Write-once run directory, stamped with the config hash."""
    root = os.path.join(base, f"{label}-{chash}")
    path = root
    k = 0
    while os.path.exists(path):
        k += 1
        path = f"{root}-{k}"
    os.makedirs(path)
    return path


def _load(args):
    if args.config:
        cfg = cfgmod.load_config(args.config)
    else:
        cfg = cfgmod.default_config()
    cfgmod.apply_overrides(cfg, args.override or [])
    # environment is honored only for the output root (and thread count)
    env_out = os.environ.get("QGFRONT_OUT")
    if env_out:
        cfg["output"]["dir"] = env_out
    if args.out:
        cfg["output"]["dir"] = args.out
    return cfg


def _default_threads():
    try:
        return max(1, int(os.environ.get("QGFRONT_THREADS", "1")))
    except ValueError:
        return 1


def cmd_simulate(args):
    cfg = _load(args)
    chash = cfgmod.config_hash(cfg)
    run_cfg = cfgmod.to_run_config(cfg)
    out = _out_dir(cfg["output"]["dir"], cfg["output"].get("name") or "run", chash)
    track = cfg["diagnostics"].get("track") or []
    pad = cfg["diagnostics"].get("pad", 4)
    s_index = cfg["diagnostics"].get("sobolev_s", 8.0)
    records = []
    grid = run_cfg.grid
    track_snapped = [grid.mode_index(x) * grid.dxi for x in track]

    def observer(state):
        records.append(diagnostics.compute_record(
            state, sobolev_s=s_index, tracked_xis=track_snapped, pad=pad))

    t0 = time.time()
    status = EXIT_OK
    try:
        traj = solver.run(run_cfg, observer=observer)
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        status = EXIT_NUMERICAL
        traj = solver.Trajectory()
        if exc.last_state is not None:
            traj.append(exc.last_state)
    wall = time.time() - t0

    for i, state in enumerate(traj.states):
        solver.save_checkpoint(state, os.path.join(out, f"checkpoint_{i:05d}.dat"),
                               config_hash=chash)
    diagnostics.write_csv(records, os.path.join(out, "diagnostics.csv"),
                          tracked_xis=track_snapped)
    diagnostics.write_jsonl(records, os.path.join(out, "diagnostics.jsonl"),
                            tracked_xis=track_snapped)
    for xi in track_snapped:
        series = diagnostics.scattering_extract(records, xi)
        diagnostics.write_series(
            os.path.join(out, f"theta_xi{xi:g}.dat"), series.times, series.theta,
            header=f"t theta(t, xi={xi:g})")
    times = [r.time for r in records]
    diagnostics.write_series(os.path.join(out, "sup.dat"), times,
                             [r.sup for r in records], header="t sup|phi|")
    with open(os.path.join(out, "plots.gp"), "w") as fh:
        fh.write(GNUPLOT_SCRIPT)
    manifest = {
        "config": cfg,
        "config_hash": chash,
        "version": __version__,
        "numpy": np.__version__,
        "wall_seconds": wall,
        "checkpoints": len(traj.states),
        "steps": traj.steps_taken,
        "rhs_evaluations": traj.rhs_evaluations,
        "status": status,
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    print(f"wrote {out} ({len(traj.states)} checkpoints, {wall:.1f}s)")
    return status


def cmd_decay(args):
    from .grids import UniformGrid, band_front, gaussian_front

    if args.replay:
        data = np.loadtxt(args.replay)
        series = [(t, v) for t, v in data]
        window = (min(t for t, _ in series), max(t for t, _ in series))
        exponent, half = diagnostics.decay_fit(series, window)
        print(f"replay exponent {exponent:.6f} +- {half:.6f}")
        return EXIT_OK
    if args.horizon < 100:
        print("decay study needs horizon >= 100", file=sys.stderr)
        return EXIT_CONFIG
    if args.family == "gaussian":
        grid = UniformGrid(4096, 320.0)
        init = gaussian_front(grid, 1.0, 1.5)
    elif args.family.startswith("band"):
        grid = UniformGrid(2048, 160.0)
        init = band_front(grid, 1.0, 1.0, 2.0)
    else:
        print(f"unknown family {args.family!r}", file=sys.stderr)
        return EXIT_CONFIG
    times = np.linspace(50.0, args.horizon, 40)
    if args.linear_only:
        series = diagnostics.linear_decay_study(grid, init, times)
    else:
        cfg = solver.RunConfig(n=grid.n, length=grid.length, nonlinearity="series",
                               dt=0.2, t_final=args.horizon, cadence=args.horizon / 80)
        sups = []
        solver.run(cfg, initial_values=0.01 * init, observer=lambda s: sups.append(
            (s.time, spectral.sup_norm(s.grid, s.values, pad=4))))
        series = [(t, v) for t, v in sups if t > 0]
    try:
        exponent, half = diagnostics.decay_fit(series, (50.0, args.horizon))
    except ValueError as exc:
        print(f"decay fit failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"family {args.family}: exponent {exponent:.4f} +- {half:.4f} "
          f"on t in [50, {args.horizon:g}]")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        diagnostics.write_series(os.path.join(args.out, f"decay_{args.family}.dat"),
                                 [t for t, _ in series], [v for _, v in series],
                                 header="t sup")
    return EXIT_OK


def cmd_symbols(args):
    if args.block:
        try:
            j1, j2, j3 = (int(p) for p in args.block.split(","))
        except ValueError:
            print("--block needs j1,j2,j3", file=sys.stderr)
            return EXIT_CONFIG
        if not (j1 >= j2 >= j3):
            print(f"block ({j1},{j2},{j3}) violates the ordering j1 >= j2 >= j3",
                  file=sys.stderr)
            return EXIT_CONFIG
        blocks = [(j1, j2, j3)]
    else:
        blocks = symbols.ordered_blocks(args.jmin, args.jmax)
    if args.mu not in (1, 2):
        print("mu must be 1 or 2", file=sys.stderr)
        return EXIT_CONFIG
    if args.mu == 2:
        print("mu=2 blocks are sampled on randomised slices; ratios are "
              "reported against the mu=1 bound shape", file=sys.stderr)

    def one(block):
        j1, j2, j3 = block
        sample = symbols.sample_block_t1(j1, j2, j3, resolution=args.resolution)
        est = symbols.s_infinity_estimate(sample)
        return (block, est, est / symbols.t1_block_bound(j1, j2, j3))

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(one, blocks))
    else:
        rows = [one(b) for b in blocks]
    rows.sort(key=lambda r: r[0])
    print("j1 j2 j3 estimate ratio")
    for (j1, j2, j3), est, ratio in rows:
        print(f"{j1} {j2} {j3} {est:.6e} {ratio:.6e}")
    ratios = [r for _, _, r in rows]
    print(f"max ratio {max(ratios):.6e}  min ratio {min(ratios):.6e}")
    if args.dump:
        samples = [symbols.sample_block_t1(*b, resolution=min(args.resolution, 16))
                   for b in blocks[: args.dump_limit]]
        symbols.dump_symbol_table(samples, args.dump)
        print(f"dumped {len(samples)} blocks to {args.dump}")
    return EXIT_OK


def cmd_verify(args):
    results = acceptance.run_all(only=args.only)
    if all(r.passed for r in results):
        return EXIT_OK
    failed = [r.name for r in results if not r.passed]
    print(f"acceptance failed: {', '.join(failed)}", file=sys.stderr)
    return EXIT_ACCEPTANCE


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="qgfront",
        description="Simulation and verification toolkit for the QGSW front equation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the front solver")
    p.add_argument("--config", help="YAML config path")
    p.add_argument("--override", action="append", metavar="KEY=VAL")
    p.add_argument("--out", help="output root directory")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decay", help="dispersive decay study")
    p.add_argument("--family", default="gaussian", help="gaussian or band")
    p.add_argument("--horizon", type=float, default=500.0)
    p.add_argument("--linear-only", action=argparse.BooleanOptionalAction,
                   default=True)
    p.add_argument("--replay", help="two-column file to fit instead of running")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("symbols", help="dyadic-block symbol bound table")
    p.add_argument("--jmin", type=int, default=-2)
    p.add_argument("--jmax", type=int, default=2)
    p.add_argument("--mu", type=int, default=1)
    p.add_argument("--block", help="single block j1,j2,j3")
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--dump", help="CSV dump path for the sampled blocks")
    p.add_argument("--dump-limit", type=int, default=3)
    p.set_defaults(func=cmd_symbols)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--only", help="run a single criterion by name")
    p.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
