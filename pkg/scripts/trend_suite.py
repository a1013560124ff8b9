"""Finite-n trends of the binning scheme on a binary single-state model.

Prints max error and key TV over n in {6, 9, 12} (Monte Carlo), exact
secrecy leakage per symbol over n in {4, 6, 8}, and exact vs Monte-Carlo
error at n = 6.
"""

import argparse

import numpy as np

from keyregion.discrete import DiscreteCompoundModel, TestChannelPair
from keyregion.info import CondDist
from keyregion.simulate import SimConfig, rates_from_test_channel, run_trials

MODEL = DiscreteCompoundModel([0.5, 0.5], CondDist.identity(2), [CondDist.bsc(0.02)], [CondDist.bsc(0.4)])
DELTA = 0.8
CHANNELS = TestChannelPair(CondDist.bsc(0.25), CondDist.constant(2, 1))


def trend_runs(seed=0, trials=10_000, mc_ns=(6, 9, 12), exact_ns=(4, 6, 8)):
    rates = rates_from_test_channel(MODEL, CHANNELS, margin=0.1)
    mc = {n: run_trials(MODEL, CHANNELS, SimConfig(n=n, rates=rates, delta=DELTA, seed=seed, trials=trials)) for n in mc_ns}
    exact = {n: run_trials(MODEL, CHANNELS, SimConfig(n=n, rates=rates, delta=DELTA, seed=seed, mode="exact")) for n in exact_ns}
    return rates, mc, exact


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10_000)
    args = p.parse_args()
    rates, mc, exact = trend_runs(args.seed, args.trials)
    print("rates", {k: round(v, 4) for k, v in rates.items()})
    for n, rep in mc.items():
        print(f"mc    n={n:2d} max_error={rep.max_error:.4f} ci={rep.error_ci_per_k[0]} key_tv={rep.key_tv_uniform:.4f} events={rep.event_counts}")
    for n, rep in exact.items():
        print(f"exact n={n:2d} max_error={rep.max_error:.4f} secrecy/n={np.max(rep.secrecy_leak_per_l) / n:.5f} key_tv={rep.key_tv_uniform:.4f}")


if __name__ == "__main__":
    main()
