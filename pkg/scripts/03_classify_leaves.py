import argparse

import numpy as np

from leafscope.bundles import describe, enumerate_leaf_families
from leafscope.classify import AmbiguousClassification, classify, sample_leaf
from leafscope.curve import CurveSpec
from leafscope.poisson import PoissonCache

# Round trip over the leaf catalogue: draw a point on each family's leaf,
# classify it and compare the bracket rank with the leaf dimension.


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--spec", type=str, default="spec.json")
    ap.add_argument("--cache", type=str, default="cache.json")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    spec = CurveSpec.load(args.spec)
    cache = PoissonCache.load(args.cache)
    rng = np.random.default_rng(args.seed)

    print("🔎 Leaf families:")
    for i, fam in enumerate(enumerate_leaf_families(spec), start=1):
        b = fam.representative(rng, spec)
        label = classify(sample_leaf(b, rng, spec), spec, cache)
        if isinstance(label, AmbiguousClassification):
            print(f"{i:02d}. {fam.name:<22} ambiguous: {label.reason}")
            continue
        print(
            f"{i:02d}. {fam.name:<22} -> {describe(label.bundle, spec):<32} "
            f"rank={label.rank} leaf dim={fam.leaf_dim}"
        )

    print("\nDone ✅")


if __name__ == "__main__":
    main()
