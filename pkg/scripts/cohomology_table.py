"""Print dim H^0 and H^1 of O(n) on P^1 per weight, next to the Laurent-monomial count."""

import argparse

from nccech.cech import ext
from nccech.coeff import Window
from nccech.examples import line_bundle, p1, structure_module


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmin", type=int, default=-4)
    ap.add_argument("--nmax", type=int, default=4)
    ap.add_argument("--window", type=int, default=6, help="weights -W..W")
    args = ap.parse_args()
    S, W = p1(), Window.interval(-args.window, args.window)
    print("%4s %4s %4s %10s" % ("n", "H0", "H1", "expected"))
    for n in range(args.nmin, args.nmax + 1):
        rep = ext(structure_module(S), line_bundle(S, n), W)
        print("%4d %4d %4d %10s" % (n, rep.dim(0), rep.dim(1), (max(n + 1, 0), max(-n - 1, 0))))


if __name__ == "__main__":
    main()
