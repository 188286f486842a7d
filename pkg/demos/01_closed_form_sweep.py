#!/usr/bin/env python3
"""Closed-form photon statistics of the fully inverted 8x8 lattice.

Walks the operator-free inverted-array expression across separations and
locates the landmark features: the Dicke value at d = 0, the critical
separation where the statistics turn sub-Poissonian, the superradiance
revival, and the independent-emitter floor at large d.
"""

import argparse

import numpy as np

from photocorr import (
    build_square_lattice,
    coupling_matrices,
    dicke_value,
    independent_value,
    inverted_array_closed_form,
)

Z = (0.0, 0.0, 1.0)


def curve(side, ds):
    out = []
    for d in ds:
        gamma = coupling_matrices(build_square_lattice(side, d, Z)).gamma
        out.append(inverted_array_closed_form(gamma))
    return np.array(out)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--side", type=int, default=8, help="lattice side length")
    args = parser.parse_args()

    n = args.side**2
    ds = np.arange(0.02, 1.5, 0.002)
    vals = curve(args.side, ds)

    print(f"N = {n} emitters, dipoles perpendicular to the lattice plane")
    print(f"Dicke limit (d -> 0):        {dicke_value(n):.6f}")
    print(f"independent limit (d -> oo): {independent_value(n):.6f}")

    above = vals > 1.0
    for i in range(len(ds) - 1):
        if above[i] and not above[i + 1]:
            frac = (vals[i] - 1.0) / (vals[i] - vals[i + 1])
            print(f"critical separation:         {ds[i] + frac * 0.002:.4f} lambda")
            break

    for i in range(1, len(ds) - 1):
        if 0.45 < ds[i] < 0.8 and vals[i] > vals[i - 1] and vals[i] > vals[i + 1]:
            print(f"revival local maximum:       d = {ds[i]:.3f}, value = {vals[i]:.6f}")

    print("\n d/lambda   correlation")
    for d in (0.05, 0.2, 0.41, 0.55, 0.8, 1.2):
        k = np.argmin(np.abs(ds - d))
        print(f"   {ds[k]:.3f}     {vals[k]:.6f}")


if __name__ == "__main__":
    main()
