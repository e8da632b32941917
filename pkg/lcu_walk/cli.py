"""
Command-line interface for the LCU walk simulator.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional, Tuple

from .errors import LcuWalkError, ParameterError
from .harness import (
    INSTANCE_KINDS,
    SUITES,
    ExperimentConfig,
    cmd_instance,
    cmd_simulate,
    cmd_sweep,
    cmd_verify,
    exit_code_for,
)
from .simulator import STRATEGIES

LOG_ENV = "LCUWALK_LOG"
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(value: Optional[str] = None) -> int:
    """Install a stderr handler at the level named by LCUWALK_LOG."""
    name = (value if value is not None else os.environ.get(LOG_ENV, "info")).strip().lower()
    if name not in LOG_LEVELS:
        raise ParameterError(f"{LOG_ENV} must be one of {', '.join(LOG_LEVELS)}, got {name!r}")
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(LOG_LEVELS[name])
    return LOG_LEVELS[name]


def _float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(item) for item in text.split(",") if item.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(item) for item in text.split(",") if item.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _time(text: str) -> Optional[float]:
    if text.lower() == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", choices=INSTANCE_KINDS, default="random", help="Hamiltonian source (default: random)")
    common.add_argument("--n", type=int, default=2, help="Qubit count for random instances (default: 2)")
    common.add_argument("--d", type=int, default=2, help="Sparsity, or blow-up factor for blowup instances (default: 2)")
    common.add_argument("--seed", type=int, default=0, help="Seed for instances and verification (default: 0)")
    common.add_argument("--hmax", type=float, default=None, help="Target max-entry norm")
    common.add_argument("--N", dest="N", type=int, default=4, help="Path length for parity instances (default: 4)")
    common.add_argument("--x", default=None, help="Bit string for parity instances (default: random from --seed)")
    common.add_argument("--variant", choices=("H1", "H2"), default="H2", help="Parity path variant (default: H2)")
    common.add_argument("--path", default=None, help="Hamiltonian JSON file for --instance file")
    common.add_argument("--t", type=_time, default=1.0, help="Evolution time, or 'auto' for parity instances")
    common.add_argument("--eps", type=float, default=1e-6, help="Error budget (default: 1e-6)")
    common.add_argument("--strategy", choices=STRATEGIES, default="fixed_z", help="Segment strategy (default: fixed_z)")
    common.add_argument("--alpha", type=float, default=1.0, help="Tradeoff exponent (default: 1.0)")
    common.add_argument("--X", dest="X", type=float, default=None, help="Walk scale parameter (default: max-entry norm)")
    common.add_argument("--out", default=None, help="Output file")
    common.add_argument("--jobs", type=int, default=1, help="Concurrent sweep points (default: 1)")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json", help="Report format (default: json)")

    parser = argparse.ArgumentParser(
        description="Quantum-walk + LCU Hamiltonian simulation: dense simulator and verifier"
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("simulate", parents=[common], help="Run one simulation")

    sweep = commands.add_parser("sweep", parents=[common], help="Sweep tau, epsilon, d and alpha")
    sweep.add_argument("--taus", type=_float_list, default=(), help="Comma-separated tau values")
    sweep.add_argument("--epsilons", type=_float_list, default=(), help="Comma-separated error budgets")
    sweep.add_argument("--ds", type=_int_list, default=(), help="Comma-separated sparsities")
    sweep.add_argument("--alphas", type=_float_list, default=(), help="Comma-separated tradeoff exponents")
    sweep.add_argument("--plot", default=None, help="Also write a PNG chart to this path")

    verify = commands.add_parser("verify", parents=[common], help="Run invariant suites")
    verify.add_argument("suite", nargs="?", choices=SUITES + ("all",), default="all")

    commands.add_parser("instance", parents=[common], help="Write an instance as JSON")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        instance=args.instance,
        n=args.n,
        d=args.d,
        seed=args.seed,
        hmax=args.hmax,
        N=args.N,
        x=args.x,
        variant=args.variant,
        path=args.path,
        t=args.t,
        epsilon=args.eps,
        strategy=args.strategy,
        alpha=args.alpha,
        X=args.X,
        taus=getattr(args, "taus", ()),
        epsilons=getattr(args, "epsilons", ()),
        ds=getattr(args, "ds", ()),
        alphas=getattr(args, "alphas", ()),
        out=args.out,
        jobs=args.jobs,
        fmt=args.fmt,
        plot=getattr(args, "plot", None),
        suite=getattr(args, "suite", "all"),
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    args = build_parser().parse_args(argv)
    try:
        configure_logging()
        config = config_from_args(args)
        if args.command == "simulate":
            cmd_simulate(config)
        elif args.command == "sweep":
            cmd_sweep(config)
        elif args.command == "verify":
            if not cmd_verify(config).passed:
                sys.exit(1)
        else:
            cmd_instance(config)
    except KeyboardInterrupt:
        print("\nExiting...")
        sys.exit(130)
    except (LcuWalkError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(exit_code_for(e))
    return 0


if __name__ == "__main__":
    main()
