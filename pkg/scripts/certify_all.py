#!/usr/bin/env python3
"""Run the full certification battery: density oracles for three stability
indices and the mollifier certification (shape, two-sided bounds, derivative
cap, generator identity) over the standard parameter matrix. Writes one
report.json per combination and prints a summary table."""

import argparse
import time
from pathlib import Path

import numpy as np

import stablesde as ss


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/certify", type=Path)
    ap.add_argument("--alphas", type=float, nargs="+", default=[1.2, 1.5, 1.8])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.5, 0.1, 0.02])
    ap.add_argument("--deltas", type=float, nargs="+", default=[2.0, 4.0, 16.0])
    ap.add_argument("--grid-points", type=int, default=2001)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    print(f"{'alpha':>6} {'eps':>6} {'delta':>6} {'shape':>6} {'bounds':>7} "
          f"{'deriv':>6} {'identity':>9} {'secs':>6}")
    grid = np.linspace(-5.0, 5.0, args.grid_points)
    grid = grid[grid != 0.0]
    all_ok = True
    for alpha in args.alphas:
        law = ss.make_stable_law(alpha)
        for eps in args.eps:
            for delta in args.deltas:
                t0 = time.time()
                m = ss.build_mollifier(alpha, eps, delta)
                s = ss.SmoothedDistance(m)
                shape = ss.certify_mollifier_shape(m)
                sand = ss.certify_sandwich(s, grid)
                deriv = ss.certify_derivative_bound(s, grid)
                a_s, b_s = m.support
                thetas = np.concatenate([
                    np.linspace(a_s * 1.01, b_s * 0.99, 24),
                    [2 * eps, -2 * eps, 1.0]])
                kom = ss.certify_komatsu(s, law, thetas)
                tag = f"a{alpha}_e{eps}_d{delta}".replace(".", "p")
                for rep in (shape, sand, deriv, kom):
                    rep.to_json(args.out / f"{tag}_{rep.name}.json")
                ok = all(r.passed for r in (shape, sand, deriv, kom))
                all_ok &= ok
                print(f"{alpha:6.2f} {eps:6.3f} {delta:6.1f} "
                      f"{str(shape.passed):>6} {str(sand.passed):>7} "
                      f"{str(deriv.passed):>6} {str(kom.passed):>9} "
                      f"{time.time() - t0:6.1f}")
    print("all certifications passed" if all_ok else "FAILURES above")
    return 0 if all_ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
