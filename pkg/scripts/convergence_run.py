"""Holonomy convergence of latitude loops, one table per colatitude."""

import argparse
import math

from histphase.geometry import bloch_latitude_loop, convergence_study, fitted_order, solid_angle_phase


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--thetas", type=float, nargs="+", default=[math.pi / 6, math.pi / 3, math.pi / 2, 2 * math.pi / 3])
    ap.add_argument("--max-log2n", type=int, default=12)
    args = ap.parse_args()
    ns = [2**k for k in range(3, args.max_log2n + 1)]
    for theta in args.thetas:
        rows = convergence_study(bloch_latitude_loop(theta), ns, reference_n=2**16)
        print(f"theta = {theta:.6f}  exact = {solid_angle_phase(theta):+.15f}  fitted order = {fitted_order(rows):.3f}")
        for r in rows:
            print(f"  n = {r.n_steps:6d}  angle = {r.angle:+.15f}  error = {r.abs_error_vs_reference:.3e}")


if __name__ == "__main__":
    main()
