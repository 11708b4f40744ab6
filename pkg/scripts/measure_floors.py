"""Measure the best residuals reached on the hexagon and pentagon targets.

The printed numbers are the source of the regression floors frozen in the
acceptance tests. Run with the same seeds and budgets used there.
"""
import argparse
import json
import time

from psdcone.configurations import gram, hexagon, pentagon
from psdcone.orthant import factorize_nonneg
from psdcone.realization import pentagon_psd_diagnostics, realize


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--restarts", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = {"hexagon": {}, "pentagon": {}}
    g_hex = gram(hexagon())
    for m in (6, 8, 12):
        t = time.perf_counter()
        f, rep = factorize_nonneg(g_hex, m=m, restarts=args.restarts, seed=args.seed)
        out["hexagon"][m] = {"best": rep.best_residual, "seconds": time.perf_counter() - t}
        print(f"hexagon m={m:2d} best={rep.best_residual:.10g}", flush=True)

    g_pent = gram(pentagon())
    for d in (2, 4, 8, 16):
        t = time.perf_counter()
        real, rep = realize(g_pent, d, r=d, restarts=args.restarts, seed=args.seed)
        diag = pentagon_psd_diagnostics(real)
        out["pentagon"][d] = {"best": rep.best_residual, "max_defect": diag.max_defect,
                              "violated": diag.violated_link,
                              "seconds": time.perf_counter() - t}
        print(f"pentagon d={d:2d} best={rep.best_residual:.10g} "
              f"defect={diag.max_defect:.6g} ({diag.violated_link})", flush=True)
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
