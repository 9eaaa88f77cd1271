#!/usr/bin/env python3
"""Temperwise - command-line entry point.

Runs temperature sweeps and tau-selection studies from JSON configs, and
tabulates the analytic normal-location risk. Every command writes plot-ready
CSV files plus a manifest.json into the output directory.

Typical usage:
    python src/main.py sweep configs/normal_tvd.json --out output/fig1
    python src/main.py select configs/normal_select.json --threads 8
    python src/main.py risk --n 10 100 1000 --schedule coarsened:0.5
"""

import argparse
import math
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from config import (  # noqa: E402
    EXIT_CONFIG, EXIT_INCOMPATIBLE, EXIT_INTERNAL, GRID_POINTS, LIMITS_FILE,
    LIMITS_HEADER, MANIFEST_FILE, OUTPUT_DIR, REPLICATES_FILE,
    REPLICATES_HEADER, RISK_FILE, RISK_HEADER, SELECTION_FILE,
    SELECTION_HEADER, SWEEP_FILE, SWEEP_HEADER, TAU_MAX, TAU_MIN, VERSION
)
from config_loader import (  # noqa: E402
    ConfigError, IncompatibleConfigError, config_to_dict, load_config
)
from dists import random_source  # noqa: E402
from experiments import (  # noqa: E402
    ExperimentConfig, run_replicates, summarize, tau_selection_histogram
)
from selection import (  # noqa: E402
    Coarsened, Fixed, PowerDecay, TempGrid, TempSchedule, risk_normal,
    schedule_tau
)
from utils import (  # noqa: E402
    create_output_dir, parse_grid, write_csv, write_manifest
)


def parse_schedule(text: str) -> TempSchedule:
    """Parse 'fixed:T', 'power:C:GAMMA' or 'coarsened:ALPHA'.

    Raises:
        ValueError: On an unknown kind or bad parameters.
    """
    kind, _, rest = text.partition(':')
    params = [float(p) for p in rest.split(':')] if rest else []
    if kind == 'fixed' and len(params) == 1:
        return Fixed(params[0])
    if kind == 'power' and len(params) == 2:
        return PowerDecay(params[0], params[1])
    if kind == 'coarsened' and len(params) == 1:
        return Coarsened(params[0])
    raise ValueError(
        f"bad schedule '{text}'; use fixed:T, power:C:GAMMA or coarsened:ALPHA"
    )


def parse_prior_var(text: str) -> float:
    if text == 'flat':
        return math.inf
    value = float(text)
    if not value > 0:
        raise ValueError(f"prior variance must be positive, got {text}")
    return value


def _load(config_path: str, seed: Optional[int]) -> ExperimentConfig:
    cfg = load_config(config_path)
    if seed is not None:
        try:
            cfg = replace(cfg, root_seed=seed)
        except ValueError as e:
            raise ConfigError(f"--seed: {e}")
    cfg.validate()
    return cfg


def _manifest(command: str, echo: Dict, root_seed: Optional[int],
              outputs: List[Path], started: float) -> Dict:
    return {
        "command": command,
        "version": VERSION,
        "root_seed": root_seed,
        "config": echo,
        "outputs": [p.name for p in outputs],
        "runtime_seconds": round(time.perf_counter() - started, 3),
    }


def cmd_sweep(config_path: str, out_dir: str = OUTPUT_DIR,
              seed: Optional[int] = None, threads: int = 1,
              verbose: bool = True) -> List[Path]:
    """Metric-versus-tau sweep: sweep.csv, replicates.csv and a manifest.

    Also writes limits.csv when the config asks for limit predictives.
    """
    started = time.perf_counter()
    cfg = _load(config_path, seed)
    out = create_output_dir(out_dir)

    table = run_replicates(cfg, threads=threads, verbose=verbose)
    curve = summarize(table, cfg.scale_by_sqrt_n)

    outputs = [
        write_csv(out / SWEEP_FILE, SWEEP_HEADER, zip(
            curve.n.tolist(), curve.tau.tolist(), curve.mean.tolist(),
            curve.q05.tolist(), curve.q95.tolist(),
            [curve.scaled] * len(curve), curve.degenerate_fraction.tolist(),
        )),
        write_csv(out / REPLICATES_FILE, REPLICATES_HEADER, table.rows()),
    ]
    if cfg.limits:
        outputs.append(write_csv(out / LIMITS_FILE, LIMITS_HEADER,
                                 table.limits))
    manifest = write_manifest(out / MANIFEST_FILE, _manifest(
        "sweep", config_to_dict(cfg), cfg.root_seed, outputs, started))

    if verbose:
        for path in outputs + [manifest]:
            print(f"  ✓ Wrote {path}")
    return outputs + [manifest]


def cmd_select(config_path: str, out_dir: str = OUTPUT_DIR,
               seed: Optional[int] = None, threads: int = 1,
               verbose: bool = True) -> List[Path]:
    """Leave-one-out tau selection per replicate: selection.csv and a manifest."""
    started = time.perf_counter()
    cfg = _load(config_path, seed)
    out = create_output_dir(out_dir)

    rows = tau_selection_histogram(cfg, threads=threads, verbose=verbose)
    outputs = [write_csv(out / SELECTION_FILE, SELECTION_HEADER, [
        (r.n, r.replicate, r.selection.tau_star, r.selection.elpd_at_star,
         r.selection.at_lower_boundary, r.selection.at_upper_boundary)
        for r in rows
    ])]
    manifest = write_manifest(out / MANIFEST_FILE, _manifest(
        "select", config_to_dict(cfg), cfg.root_seed, outputs, started))

    if verbose:
        for path in outputs + [manifest]:
            print(f"  ✓ Wrote {path}")
    return outputs + [manifest]


def cmd_risk(n_values: Sequence[int], grid: TempGrid, prior_var: float,
             schedules: Sequence[TempSchedule] = (),
             out_dir: str = OUTPUT_DIR, scale_by_n: bool = False,
             root_seed: Optional[int] = None,
             verbose: bool = True) -> List[Path]:
    """Analytic risk on the grid, plus one column per schedule.

    No simulation is involved; root_seed is only recorded in the manifest.
    """
    started = time.perf_counter()
    if not n_values or any(n < 1 for n in n_values):
        raise ConfigError("--n: sample sizes must be positive integers")
    out = create_output_dir(out_dir)

    header = list(RISK_HEADER) + [f"risk[{s.label}]" for s in schedules]
    rows = []
    for n in n_values:
        factor = n if scale_by_n else 1
        at_schedule = [factor * float(risk_normal(n, schedule_tau(s, n),
                                                  prior_var))
                       for s in schedules]
        for tau in grid:
            rows.append([n, tau, factor * float(risk_normal(n, tau, prior_var))]
                        + at_schedule)

    outputs = [write_csv(out / RISK_FILE, header, rows)]
    echo = {
        "n_values": list(n_values),
        "grid": {"points": grid.points.tolist()},
        "prior_var": "flat" if math.isinf(prior_var) else prior_var,
        "schedules": [s.label for s in schedules],
        "scale_by_n": scale_by_n,
    }
    manifest = write_manifest(out / MANIFEST_FILE, _manifest(
        "risk", echo, root_seed, outputs, started))

    if verbose:
        for path in outputs + [manifest]:
            print(f"  ✓ Wrote {path}")
    return outputs + [manifest]


def coarsened_draws(count: int, seed: int) -> List[Coarsened]:
    """count coarsening schedules with alpha ~ Exp(1), drawn from seed."""
    rng = random_source(seed, "coarsened")
    return [Coarsened(float(a)) for a in rng.exponential(1.0, count)]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--seed',
        type=int,
        metavar='N',
        help='Override the config root_seed (risk: seed for --coarsened-draws)'
    )
    common.add_argument(
        '--threads',
        type=int,
        default=1,
        metavar='N',
        help='Worker threads for replicates; results match any other count'
    )
    common.add_argument(
        '--out',
        default=OUTPUT_DIR,
        metavar='DIR',
        help=f'Output directory (default: {OUTPUT_DIR})'
    )
    common.add_argument(
        '--quiet',
        action='store_true',
        help='Only print errors'
    )
    common.add_argument(
        '--debug',
        action='store_true',
        help='Print tracebacks on unexpected errors'
    )

    parser = argparse.ArgumentParser(
        description='Tempered posterior predictives: sweeps, tau selection '
                    'and analytic risk',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f'''
Examples:
  %(prog)s sweep configs/normal_tvd.json               # TVD versus tau
  %(prog)s sweep configs/normal_kl.json --threads 8    # same results, faster
  %(prog)s select configs/normal_select.json --seed 7  # tau* per replicate
  %(prog)s risk --n 10 100 1000 --prior-var flat       # analytic risk curve
  %(prog)s risk --n 100000 --schedule coarsened:0.5 --schedule coarsened:5

Config defaults: grid {TAU_MIN}:{TAU_MAX}:{GRID_POINTS} (log-spaced),
replicates 200, mc_samples 10000, metric tvd, root_seed 0.

Exit codes: 0 success, 1 internal error, 2 config error, 3 incompatible
metric and model.
        '''
    )
    commands = parser.add_subparsers(dest='command', required=True)

    sweep = commands.add_parser('sweep', parents=[common],
                                help='Metric versus tau over replicates')
    sweep.add_argument('config', help='JSON experiment config')

    select = commands.add_parser('select', parents=[common],
                                 help='Leave-one-out tau selection')
    select.add_argument('config', help='JSON experiment config')

    risk = commands.add_parser('risk', parents=[common],
                               help='Analytic normal-location risk')
    risk.add_argument('--n', type=int, nargs='+', default=[10, 100, 1000],
                      metavar='N', help='Sample sizes (default: 10 100 1000)')
    risk.add_argument('--grid', default=f'{TAU_MIN}:{TAU_MAX}:{GRID_POINTS}',
                      metavar='LO:HI:COUNT', help='Log-spaced tau grid')
    risk.add_argument('--prior-var', default='flat', metavar='VAR',
                      help="Prior variance, or 'flat' (default)")
    risk.add_argument('--schedule', action='append', default=[],
                      metavar='SPEC',
                      help='fixed:T, power:C:GAMMA or coarsened:ALPHA '
                           '(repeatable)')
    risk.add_argument('--coarsened-draws', type=int, default=0, metavar='K',
                      help='Add K coarsened schedules with alpha ~ Exp(1)')
    risk.add_argument('--scale-by-n', action='store_true',
                      help='Report n times the risk')
    return parser


def _run(args: argparse.Namespace) -> None:
    verbose = not args.quiet
    if args.threads < 1:
        raise ConfigError("--threads: must be at least 1")

    if args.command == 'risk':
        try:
            lo, hi, count = parse_grid(args.grid)
            grid = TempGrid.log_spaced(lo, hi, count)
        except ValueError as e:
            raise ConfigError(f"--grid: {e}")
        try:
            prior_var = parse_prior_var(args.prior_var)
        except ValueError as e:
            raise ConfigError(f"--prior-var: {e}")
        try:
            schedules = [parse_schedule(s) for s in args.schedule]
        except ValueError as e:
            raise ConfigError(f"--schedule: {e}")
        if args.coarsened_draws < 0:
            raise ConfigError("--coarsened-draws: must be nonnegative")
        if args.coarsened_draws:
            seed = 0 if args.seed is None else args.seed
            schedules += coarsened_draws(args.coarsened_draws, seed)
        cmd_risk(args.n, grid, prior_var, schedules, args.out,
                 args.scale_by_n, args.seed, verbose)
        return

    command = cmd_sweep if args.command == 'sweep' else cmd_select
    command(args.config, args.out, args.seed, args.threads, verbose)


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main entry point for the command line."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if not args.quiet:
            print("\n" + "=" * 60)
            print(f"Temperwise {VERSION} - {args.command}")
            print("=" * 60 + "\n")

        _run(args)

        if not args.quiet:
            print(f"\n✅ Done! Outputs in: {args.out}")

    except KeyboardInterrupt:
        print("\n\nInterrupted by user")
        sys.exit(EXIT_INTERNAL)
    except ConfigError as e:
        print(f"\n✗ Config error: {e}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)
    except IncompatibleConfigError as e:
        print(f"\n✗ Incompatible config: {e}", file=sys.stderr)
        sys.exit(EXIT_INCOMPATIBLE)
    except PermissionError as e:
        print(f"\n\nPermission error: {e}", file=sys.stderr)
        print("Please check file/directory permissions", file=sys.stderr)
        sys.exit(EXIT_INTERNAL)
    except Exception as e:
        print(f"\n\nUnexpected error: {e}", file=sys.stderr)
        if args.debug:
            import traceback
            traceback.print_exc()
        sys.exit(EXIT_INTERNAL)


if __name__ == "__main__":
    main()
