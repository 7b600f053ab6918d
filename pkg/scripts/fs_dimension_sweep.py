#!/usr/bin/env python3
"""Binary discriminant subspace accuracy as the dimension grows.

The synthetic set spreads the class-mean gap evenly across many
unit-noise axes and keeps the training sets smaller than the dimension,
so each added discriminant direction recovers signal that the noisy
scatter estimate scattered elsewhere: mean accuracy climbs with the
subspace dimension.
"""

import argparse
from pathlib import Path

import numpy as np

from fewshot_subspaces.classify import KnnConfig
from fewshot_subspaces.config import ExperimentConfig, SplitConfig
from fewshot_subspaces.dataset import LabeledDataset
from fewshot_subspaces.harness import dimension_sweep, sweep_to_csv


def build_dataset(rng, n_per_class, dims, total_gap):
    gap = np.full(dims, total_gap / np.sqrt(dims))
    f0 = rng.normal(size=(n_per_class, dims))
    f1 = rng.normal(size=(n_per_class, dims)) + gap
    labels = np.array([0] * n_per_class + [1] * n_per_class)
    return LabeledDataset(np.vstack([f0, f1]), labels, 2)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/fs_sweep", help="output directory")
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--dims", type=int, default=64, help="feature dimension")
    parser.add_argument("--max-sweep", type=int, default=10)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    dataset = build_dataset(rng, n_per_class=60, dims=args.dims, total_gap=3.5)
    cfg = ExperimentConfig(
        dataset_path=f"synthetic://spread-gap/seed={args.seed}",
        split=SplitConfig(train_per_class=30, test_per_class=25, repetitions=10),
        methods=("fs_binary",),
        knn=KnnConfig(k_values=(1, 5, 10, 15)),
        base_seed=100,
    )
    rows = dimension_sweep(
        cfg, "fs_binary", list(range(1, args.max_sweep + 1)), dataset=dataset
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(sweep_to_csv(rows))
    print("dim  mean    std")
    for row in rows:
        print(f"{row.dim:>3}  {row.mean:.4f}  {row.std:.4f}")


if __name__ == "__main__":
    main()
