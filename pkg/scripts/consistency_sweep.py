"""Detectability of a biased two-atom Z_2 family.

Mixes the uniform table with a point mass at weight ``eps`` and reports
the discrepancy found by the exact consistency check.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from genconn import catalog
from genconn.groupoid import TameSubgroupoid, atoms_subgroupoid, edge
from genconn.groups import Group
from genconn.measure import FiniteFamily, check_consistency


@dataclass
class Config:
    eps: tuple = (0.0, 0.01, 0.05, 0.1, 0.2, 0.4)


def run(cfg: Config):
    G = Group.zn(2)
    A = catalog.pair()
    top = atoms_subgroupoid(A)
    joined = TameSubgroupoid((edge(A, ["a", "b"]),))
    print(f"{'eps':>6} {'discrepancy':>12} {'pass':>5}")
    for eps in cfg.eps:
        fine = (1 - eps) * np.full((2, 2), 0.25)
        fine[0, 0] += eps
        fam = FiniteFamily(G, {top: fine, joined: np.array([0.5, 0.5])})
        rep = check_consistency(fam, joined, top, G)
        print(f"{eps:>6.2f} {rep.max_discrepancy:>12.4f} {str(rep.passed):>5}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", type=float, nargs="+")
    a = p.parse_args()
    run(Config(eps=tuple(a.eps)) if a.eps else Config())
