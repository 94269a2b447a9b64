"""Simulate one circular two-body orbit and report residuals, drift and period."""
import argparse
import math
import time

from quasiphys.mss import Gravity, conservation_drift, simulate, validate
from quasiphys.mss.orbits import circular_two_body, kepler_period, measured_period


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--h", type=float, default=1e-3)
    parser.add_argument("--tol", type=float, default=1e-4)
    args = parser.parse_args()

    period = kepler_period(1.0, 1.0, 1.0)
    t1 = math.ceil(period / args.h) * args.h
    start = time.perf_counter()
    masses, pos, vel = circular_two_body(1.0, 1.0, 1.0)
    sys = simulate(masses, pos, vel, Gravity(1.0), h=args.h, interval=(0.0, t1))
    report = validate(sys, tol=args.tol)
    dp, dl = conservation_drift(sys)
    measured = measured_period(sys, "p1", "p2")
    for c in report:
        print(f"{c.name}: {'pass' if c.passed else 'FAIL'} max residual {c.max_residual:.3e}")
    print(f"momentum drift {dp:.3e}, angular momentum drift {dl:.3e}")
    print(f"period {measured:.12f} vs closed form {period:.12f} (relative {abs(measured - period) / period:.2e})")
    print(f"{time.perf_counter() - start:.2f}s")


if __name__ == "__main__":
    main()
