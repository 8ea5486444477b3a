"""Command-line entry point: ``tauberian --instance NAME --mode MODE [...]``."""

from __future__ import annotations

import argparse
import sys

from .certificates import ParameterError
from .experiments import MODES, RunConfig, parse_grid, run
from .instances import INSTANCE_CARDS, UnknownInstance


def build_parser() -> argparse.ArgumentParser:
    catalog = "; ".join(f"{k}: {v}" for k, v in INSTANCE_CARDS.items())
    parser = argparse.ArgumentParser(
        prog="tauberian",
        description="Value sweeps, strategy certificates and mean-bound checks for "
                    "finite deterministic zero-sum games.",
        epilog=f"Catalog instances (or an instance file path): {catalog}")
    parser.add_argument("--instance", default="cycle01",
                        help="catalog name, const:<c>, or path to an instance file")
    parser.add_argument("--mode", choices=MODES, default="convergence")
    parser.add_argument("--n-grid", default="10,100,1000",
                        help="comma-separated horizons; discounts default to 1-exp(-1/n)")
    parser.add_argument("--k-list", default="8,16", help="comma-separated certificate sizes")
    parser.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    parser.add_argument("--tol", type=float, default=1e-11,
                        help="value-iteration tolerance for discounted values")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(instance=args.instance, mode=args.mode, n_grid=parse_grid(args.n_grid),
                        k_list=parse_grid(args.k_list), out=args.out, tol=args.tol)
        table = run(cfg)
    except (UnknownInstance, ParameterError, ValueError) as exc:
        print(f"tauberian: error: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            table.write(fh)
    else:
        table.write(sys.stdout)
    if not table.passed:
        print("tauberian: some checks failed", file=sys.stderr)
    return 0 if table.passed else 1


if __name__ == "__main__":
    sys.exit(main())
