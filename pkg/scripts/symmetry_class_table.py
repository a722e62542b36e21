"""Which coefficient equalities each symmetry class enforces, checked on random centers.

For every kind (C, K, Q, P) and mapping (identity, interchange) a random
operator and an ensemble of centers symmetric under it are drawn.  The table
reports the fraction of centers on which each equality holds over a momentum
grid, alongside what the class predicts.
"""
import argparse

import numpy as np

from symscatter.network import two_port_network
from symscatter.scattering import open_k_grid, two_port
from symscatter.symmetry import (
    IDENTITY,
    INTERCHANGE,
    SymmetrySpec,
    classify_mapping,
    generate_ensemble,
    make_operator,
    predict,
)

TOL = 1e-8


def equalities(c, alpha):
    def close(a, b):
        return abs(a - b) <= TOL * max(1.0, abs(a), abs(b))

    return {
        "|t|": close(abs(c.t_l), abs(c.t_r)),
        "t phase": close(c.t_l, np.exp(1j * alpha) * c.t_r),
        "|r|": close(abs(c.r_l), abs(c.r_r)),
        "r": close(c.r_l, c.r_r),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sites", type=int, default=4)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--alpha", type=float, default=0.0, help="site phase for the identity mapping")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    ks = open_k_grid(12)
    n = args.sites
    print(f"{'class':<6} {'|t|':>6} {'t phase':>8} {'|r|':>6} {'r':>6}  predicted")
    for kind in "CKQP":
        for variant in (IDENTITY, INTERCHANGE):
            alpha = args.alpha if (kind in "CK" and variant == IDENTITY) else 0.0
            u = make_operator(kind, variant, n, 0, n - 1, rng, alpha)
            spec = SymmetrySpec(kind, 1, u)
            mapping = classify_mapping(u, 0, n - 1)
            hits = {"|t|": 0, "t phase": 0, "|r|": 0, "r": 0}
            for h in generate_ensemble(kind, 1, u, seed=int(rng.integers(2**31)), count=args.count):
                net = two_port_network(h, sites=(0, n - 1))
                per_k = [equalities(two_port(net, 1, 2, k), mapping.alpha) for k in ks]
                for key in hits:
                    hits[key] += all(e[key] for e in per_k)
            frac = {key: v / args.count for key, v in hits.items()}
            label = f"{kind}_{mapping.subscript}"
            pred = "; ".join(predict(spec, mapping).describe())
            print(f"{label:<6} {frac['|t|']:6.2f} {frac['t phase']:8.2f} {frac['|r|']:6.2f} {frac['r']:6.2f}  {pred}")


if __name__ == "__main__":
    main()
