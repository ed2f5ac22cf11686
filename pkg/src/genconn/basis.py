"""Character-sector spin-network functions, Wilson loops and Gram matrices."""
from __future__ import annotations

from typing import Sequence

from .cyl import CharProd, CylFunction, rewrite_over_paths
from .errors import AlphabetMismatch, InvalidLabel, NotClosed
from .groupoid import PathWord, TameSubgroupoid
from .groups import Group
from .measure import UNIFORM, IntegralEstimate, inner_product
from .methods import EXACT


class SpinNetworkFunction(CylFunction):
    """prod_i chi_{j_i}(A(e_i)) over the generators of a tame subgroupoid."""

    @property
    def labels(self) -> tuple:
        return self.expr.labels

    @property
    def nontrivial(self) -> dict:
        return {i: j for i, j in enumerate(self.labels) if not self.group.is_trivial_label(j)}


def make_spin_network(L: TameSubgroupoid, labels: Sequence, group: Group) -> SpinNetworkFunction:
    if len(labels) != len(L):
        raise InvalidLabel(f"{len(labels)} labels for {len(L)} edges")
    labels = tuple(group.check_label(j) for j in labels)
    return SpinNetworkFunction(L, CharProd(labels), group)


def wilson_loop(p: PathWord, label, group: Group) -> CylFunction:
    """A -> chi_label(A(p)) for a closed path p."""
    if not p.is_closed:
        raise NotClosed(f"{p} is not closed (s={p.source!r}, r={p.target!r})")
    return rewrite_over_paths(CharProd((group.check_label(label),)), [p], group)


def gram_matrix(funcs: Sequence[CylFunction], method=EXACT, m=UNIFORM) -> list[list[IntegralEstimate]]:
    if len({f.label.alphabet for f in funcs}) > 1:
        raise AlphabetMismatch("Gram matrix entries must share one alphabet")
    return [[inner_product(f, h, m, method) for h in funcs] for f in funcs]
