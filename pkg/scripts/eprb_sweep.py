"""Singlet spin correlation against -cos(theta) over a sweep of analyser angles."""
import argparse
import math
import time

import numpy as np

from quasiphys.quantum import direction, eprb_statistics


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=17)
    parser.add_argument("--points", type=int, default=13)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    print("theta,correlation,expected,std_error,z")
    for theta in np.linspace(0.0, math.pi, args.points):
        start = time.perf_counter()
        s = eprb_statistics([0, 0, 1], direction(theta), args.trials, args.seed, workers=args.workers)
        expected = -math.cos(theta)
        z = (s.correlation - expected) / s.std_error if s.std_error > 0 else 0.0
        print(f"{theta:.6f},{s.correlation:.6f},{expected:.6f},{s.std_error:.6f},{z:+.2f}  ({time.perf_counter() - start:.2f}s)")


if __name__ == "__main__":
    main()
