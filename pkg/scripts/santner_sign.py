"""Posterior mean of the constant term and the label balance on the annulus example."""

import argparse

from latentgp.demos import run_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()
    for seed in range(args.seeds):
        s = run_demo("santner", seed)
        print(f"seed {seed}: n_l1 {s['n_l1']}, n_l2 {s['n_l2']}, beta0 {s['beta0_posterior_mean']:+.3f}, "
              f"LOO mean rate L1 {s['loo_mean_rate_l1']:.4f} vs L2 {s['loo_mean_rate_l2']:.4f}")


if __name__ == "__main__":
    main()
