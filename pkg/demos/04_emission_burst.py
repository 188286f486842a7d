#!/usr/bin/env python3
"""Superradiant burst of a 9-emitter chain and its m-wise reconstruction.

The exact emission rate of the inverted chain (d = lambda/10, dipoles
perpendicular to the axis) rises before it decays. Pair samples (m = 2)
cannot reproduce the burst; larger subset sizes recover it progressively.

    python demos/04_emission_burst.py --out-dir out/burst
"""

import argparse
import json
import tempfile

import numpy as np

from photocorr import run_emission_trace


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out/burst")
    parser.add_argument("--n", type=int, default=9)
    parser.add_argument("--samples", type=int, default=100)
    parser.add_argument("--m-values", type=int, nargs="+", default=[2, 4, 6])
    parser.add_argument("--t-max", type=float, default=2.0)
    parser.add_argument("--seed", type=int, default=20260810)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    config = {
        "geometry": {"kind": "chain", "count": args.n, "spacing": 0.1},
        "protocol": "inverted-free-decay",
        "flavor": "total",
        "time": 0.0,
        "t_grid": list(np.linspace(0.0, args.t_max, 41)),
        "methods": ["exact", "m-wise"],
        "sampling": {"m": max(args.m_values), "samples_mwise": args.samples},
        "seed": args.seed,
        "m_values": args.m_values,
    }
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(config, fh)
        cfg_path = fh.name

    result = run_emission_trace(cfg_path, out_dir=args.out_dir, threads=args.threads)
    exact = result.traces.get("exact")
    if exact is not None:
        peak = exact[0].max()
        t_peak = result.t_grid[np.argmax(exact[0])]
        print(f"exact trace: peak R(t)/R(0) = {peak:.4f} at t = {t_peak:.3f}/gamma_0")
    for m in args.m_values:
        trace = result.traces[f"m-wise(m={m})"][0]
        burst = trace.max() > 1.0 + 1e-6
        print(f"m = {m}: peak {trace.max():.4f}  burst reproduced: {burst}")
    print(f"wrote {result.csv_path}")


if __name__ == "__main__":
    main()
