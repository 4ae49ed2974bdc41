"""Serve a seeded synthetic oracle over stdio or TCP (``python -m smattr.oracle.server``)."""

import argparse
import sys

from .protocol import serve_stream, serve_tcp
from .synthetic import SyntheticOracle


def main(argv=None):
    """Serve a synthetic oracle over stdio or TCP."""
    parser = argparse.ArgumentParser(prog="python -m smattr.oracle.server", description=main.__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--feature-dim", type=int, default=32)
    parser.add_argument("--categories", type=int, default=10)
    parser.add_argument("--height", type=int, required=True)
    parser.add_argument("--width", type=int, required=True)
    parser.add_argument("--channels", type=int, default=3)
    parser.add_argument("--listen", metavar="HOST:PORT", help="serve TCP instead of stdio")
    args = parser.parse_args(argv)
    oracle = SyntheticOracle((args.height, args.width, args.channels), seed=args.seed,
                             feature_dim=args.feature_dim, n_categories=args.categories)
    if args.listen:
        host, _, port = args.listen.rpartition(":")

        def ready(addr):
            print(f"listening {addr[0]}:{addr[1]}", file=sys.stderr, flush=True)

        serve_tcp(oracle, host or "127.0.0.1", int(port), ready)
    else:
        serve_stream(oracle, sys.stdin, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
