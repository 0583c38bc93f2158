"""Seed stability of the 1-D boundary and LOO ranking as the chain length varies."""

import argparse

import numpy as np

from latentgp.demos import demo_config, run_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--iterations", type=int, nargs="+", default=[10000, 40000])
    args = ap.parse_args()
    for iters in args.iterations:
        cfg = demo_config("oned")
        cfg.mcmc.iterations = iters
        cfg.mcmc.burnin = min(cfg.mcmc.burnin, iters // 4)
        meds, hits = [], 0
        for seed in range(args.seeds):
            s = run_demo("oned", seed, cfg=cfg)
            meds.append(s["boundary"]["median"])
            hits += sorted(s["loo_top2_x"]) == [6.0, 8.0]
            print(f"iterations {iters} seed {seed}: median {meds[-1]:.3f}, "
                  f"width {s['boundary_interval_width']:.2f}, LOO top2 x {sorted(s['loo_top2_x'])}")
        print(f"iterations {iters}: median range [{min(meds):.3f}, {max(meds):.3f}], "
              f"LOO top2 correct on {hits}/{args.seeds} seeds, median spread sd {np.std(meds):.3f}")


if __name__ == "__main__":
    main()
