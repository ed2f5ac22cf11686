"""Convergence of the SU(2) spin-network Gram matrix under Monte Carlo.

Prints, per sample size, the worst |G_ij - delta_ij| in units of the
reported standard error.
"""
import argparse
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from genconn import catalog
from genconn.basis import gram_matrix, make_spin_network
from genconn.groupoid import TameSubgroupoid, edge
from genconn.groups import Group
from genconn.methods import MonteCarlo


@dataclass
class Config:
    spins: tuple = (0, Fraction(1, 2), 1, Fraction(3, 2))
    sizes: tuple = (10**3, 10**4, 10**5, 10**6)
    seed: int = 0
    workers: int = 1


def run(cfg: Config):
    G = Group.su2()
    A = catalog.pair()
    L = TameSubgroupoid((edge(A, ["a"]),))
    funcs = [make_spin_network(L, (j,), G) for j in cfg.spins]
    print(f"{'N':>9} {'max|dev|':>10} {'max z':>7}")
    for n in cfg.sizes:
        gram = gram_matrix(funcs, MonteCarlo(n, cfg.seed, cfg.workers))
        dev, z = 0.0, 0.0
        for i, row in enumerate(gram):
            for j, est in enumerate(row):
                d = abs(est.mean - float(i == j))
                dev = max(dev, d)
                if est.stderr > 0:
                    z = max(z, d / est.stderr)
        print(f"{n:>9} {dev:>10.2e} {z:>7.2f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-exp", type=int, default=6, help="largest sample size is 10**max_exp")
    a = p.parse_args()
    run(Config(sizes=tuple(10**k for k in range(3, a.max_exp + 1)), seed=a.seed, workers=a.workers))
