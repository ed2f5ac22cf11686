"""Count consistent families over all tame subgroupoids of small alphabets.

The projective limit over one alphabet should be in bijection with
connections, i.e. have |G|^(#atoms) points; this enumerates it directly.
"""
import argparse
import time
from dataclasses import dataclass

from genconn import catalog
from genconn.family import consistent_families
from genconn.groupoid import all_tame_subgroupoids, nested_pairs
from genconn.groups import Group


@dataclass
class Config:
    orders: tuple = (2, 3)
    alphabets: tuple = ("pair", "path3", "triangle", "theta", "loop_and_arc")


def run(cfg: Config):
    print(f"{'alphabet':>13} {'N':>3} {'|L|':>4} {'pairs':>6} {'families':>9} {'|G|^atoms':>10} {'secs':>6}")
    for name in cfg.alphabets:
        A = getattr(catalog, name)()
        Ls = all_tame_subgroupoids(A)
        n_pairs = sum(1 for _ in nested_pairs(Ls))
        for N in cfg.orders:
            t0 = time.perf_counter()
            count = sum(1 for _ in consistent_families(Group.zn(N), Ls))
            dt = time.perf_counter() - t0
            print(f"{name:>13} {N:>3} {len(Ls):>4} {n_pairs:>6} {count:>9} {N ** len(A.atoms):>10} {dt:>6.2f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--orders", type=int, nargs="+", default=[2, 3])
    a = p.parse_args()
    run(Config(orders=tuple(a.orders)))
