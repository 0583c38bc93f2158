"""Run the built-in demos for a range of seeds and print their headline numbers."""

import argparse
import json
import time
from pathlib import Path

from latentgp.demos import DEMOS, run_demo

KEYS = ("boundary", "loo_top2_x", "min_prob_r1_x1_lt_1", "max_prob_r1_x1_gt_5",
        "level_set_max_abs_dev_from_3", "gp_draw_disagreement_max", "bernoulli_half_disagreement",
        "beta0_posterior_mean", "loo_mean_rate_l1", "loo_mean_rate_l2",
        "logistic_avg_bernoulli_max_abs_dev")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--demos", nargs="+", default=list(DEMOS), choices=DEMOS)
    ap.add_argument("--seeds", type=int, default=1)
    ap.add_argument("--out", default="runs")
    args = ap.parse_args()
    for name in args.demos:
        for seed in range(args.seeds):
            start = time.perf_counter()
            summary = run_demo(name, seed, Path(args.out) / f"{name}-{seed}")
            picked = {k: summary[k] for k in KEYS if k in summary}
            print(f"{name} seed {seed} ({time.perf_counter() - start:.1f}s): {json.dumps(picked)}")


if __name__ == "__main__":
    main()
