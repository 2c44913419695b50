"""Dense-discretization oracle for latitude-loop holonomies.

Computes the discrete holonomy directly from the overlap formula with plain
numpy (no library code), at n = 2**14 and with one Richardson step, and prints
the values that the test suite freezes.
"""

import argparse
import json
import math

import numpy as np


def holonomy(theta: float, n: int) -> float:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    phi = 2 * math.pi * np.arange(n) / n
    vecs = np.stack([np.full(n, c, dtype=complex), s * np.exp(1j * phi)], axis=1)
    nxt = np.roll(vecs, -1, axis=0)
    # sum of arg <psi_{k+1}|psi_k> around the closed loop
    log_sum = np.sum(np.log(np.einsum("ij,ij->i", nxt.conj(), vecs)))
    return float(np.angle(np.exp(1j * log_sum.imag)))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2**14)
    args = ap.parse_args()
    out = {}
    for label, theta in [("pi/6", math.pi / 6), ("pi/3", math.pi / 3), ("pi/2", math.pi / 2), ("2pi/3", 2 * math.pi / 3)]:
        a_n = holonomy(theta, args.n)
        a_2n = holonomy(theta, 2 * args.n)
        rich = math.remainder(a_2n + math.remainder(a_2n - a_n, 2 * math.pi) / 3, 2 * math.pi)
        exact = math.remainder(-math.pi * (1 - math.cos(theta)), 2 * math.pi)
        out[label] = {"dense": a_n, "richardson": rich, "closed_form": exact, "dense_error": abs(a_n - exact)}
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
