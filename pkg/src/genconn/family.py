"""The projective family A_L = Hom[L, G] and its limit over one alphabet.

Charts and connections hold raw group values, so a single object may also
carry a whole batch of configurations along a leading axis; every map here
is vectorized over that axis.

Fold convention: the holonomy of ``[l1, ..., lk]`` is ``A(lk) ... A(l1)``,
i.e. later letters multiply from the left.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import MissingTop, NotComparable, PathOutsideSubgroupoid, UnknownAtom
from .groupoid import Alphabet, PathWord, TameSubgroupoid, decompose, subgroupoid_leq
from .groups import Group


def fold(group: Group, factors: Sequence[tuple]):
    """Travel-ordered signed product of ``(value, sign)`` pairs."""
    acc = None
    for value, sign in factors:
        g = group.power(value, sign)
        acc = g if acc is None else group.mul(g, acc)
    return group.identity() if acc is None else acc


def batch_shape(group: Group, value) -> tuple:
    shape = np.shape(value)
    return shape[: len(shape) - len(group.value_shape)]


@dataclass(frozen=True, eq=False)
class Chart:
    """A point (or batch of points) of A_L in the coordinates of L's generators."""

    subgroupoid: TameSubgroupoid
    values: tuple
    group: Group

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != len(self.subgroupoid):
            raise ValueError(
                f"chart has {len(self.values)} values for {len(self.subgroupoid)} generators"
            )

    def equals(self, other: "Chart", tol: float | None = None) -> bool:
        return self.group == other.group and all(
            self.group.all_close(a, b, tol) for a, b in zip(self.values, other.values)
        )

    def max_discrepancy(self, other: "Chart") -> float:
        g = self.group
        worst = 0.0
        for a, b in zip(self.values, other.values):
            if g.kind == "zn":
                d = float(np.max(np.not_equal(a, b)))
            elif g.kind == "u1":
                r = np.mod(np.subtract(a, b), 2 * np.pi)
                d = float(np.max(np.minimum(r, 2 * np.pi - r)))
            else:
                d = float(np.max(np.linalg.norm(np.subtract(a, b), axis=-1)))
            worst = max(worst, d)
        return worst

    @property
    def batch_shape(self) -> tuple:
        return batch_shape(self.group, self.values[0]) if self.values else ()

    def to_json(self) -> list:
        return [self.group.element_to_json(v) for v in self.values]


@dataclass(frozen=True, eq=False)
class AmbientConnection:
    """Assignment atom -> G; the alphabet-level model of a generalized connection."""

    group: Group
    alphabet: Alphabet
    assignment: Mapping

    def __post_init__(self):
        missing = [a for a in self.alphabet.atom_ids if a not in self.assignment]
        if missing:
            raise UnknownAtom(f"connection has no value for atoms {missing}")
        extra = [a for a in self.assignment if a not in self.alphabet.atom_map]
        if extra:
            raise UnknownAtom(f"connection assigns unknown atoms {extra}")
        object.__setattr__(self, "assignment", {a: self.assignment[a] for a in self.alphabet.atom_ids})

    def __getitem__(self, atom_id):
        try:
            return self.assignment[atom_id]
        except KeyError:
            raise UnknownAtom(f"atom {atom_id!r} not in connection") from None

    def equals(self, other: "AmbientConnection", tol: float | None = None) -> bool:
        return (
            self.group == other.group
            and self.alphabet == other.alphabet
            and all(self.group.all_close(self[a], other[a], tol) for a in self.alphabet.atom_ids)
        )

    def to_json(self) -> dict:
        return {a: self.group.element_to_json(v) for a, v in self.assignment.items()}

    @classmethod
    def from_json(cls, group: Group, alphabet: Alphabet, obj: Mapping) -> "AmbientConnection":
        return cls(group, alphabet, {a: group.element_from_json(v) for a, v in obj.items()})

    @classmethod
    def sample(cls, group: Group, alphabet: Alphabet, rng: np.random.Generator, size=None):
        return cls(group, alphabet, {a: group.sample(rng, size) for a in alphabet.atom_ids})


def evaluate(source, p: PathWord):
    """Holonomy of ``p`` under a connection or a chart."""
    if isinstance(source, Chart):
        word = decompose(p, source.subgroupoid)
        if word is None:
            raise PathOutsideSubgroupoid(f"{p} is not in {source.subgroupoid}")
        return fold(source.group, [(source.values[k], s) for k, s in word])
    return fold(source.group, [(source[a], s) for a, s in p.letters])


def coordinates(conn: AmbientConnection, L: TameSubgroupoid) -> Chart:
    """The projection p_L: restrict a connection to L and read off generator images."""
    for a in L.support:
        if a not in conn.assignment:
            raise UnknownAtom(f"atom {a!r} of {L} is not assigned by the connection")
    return Chart(L, tuple(evaluate(conn, e) for e in L.generators), conn.group)


def _decomposition(L: TameSubgroupoid, Lp: TameSubgroupoid):
    d = subgroupoid_leq(L, Lp)
    if d is None:
        raise NotComparable(f"{L} is not a subgroupoid of {Lp}")
    return d


def project(L: TameSubgroupoid, Lp: TameSubgroupoid, chart: Chart) -> Chart:
    """p_{L,L'}: A_{L'} -> A_L as signed products over the decomposition."""
    if chart.subgroupoid != Lp:
        raise ValueError("chart is not a chart on the finer subgroupoid")
    d = _decomposition(L, Lp)
    g = chart.group
    return Chart(L, tuple(fold(g, [(chart.values[k], s) for k, s in w]) for w in d.words), g)


def surjectivity_witness(L: TameSubgroupoid, Lp: TameSubgroupoid, target: Chart) -> Chart:
    """A preimage of ``target`` under p_{L,L'}.

    Each fine generator occurs at most once in the decomposition of a coarse
    one, so putting h_i on the first slot and the identity elsewhere works.
    """
    if target.subgroupoid != L:
        raise ValueError("target is not a chart on the coarser subgroupoid")
    d = _decomposition(L, Lp)
    g = target.group
    shape = target.batch_shape
    values = [g.identity(shape) if shape else g.identity() for _ in Lp.generators]
    for h, w in zip(target.values, d.words):
        k, s = w[0]
        values[k] = g.power(h, s)
    return Chart(Lp, tuple(values), g)


def all_charts(group: Group, L: TameSubgroupoid) -> Chart:
    """Every point of A_L for a finite group, as one batched chart."""
    return Chart(L, tuple(group.grid(len(L))), group)


def top_subgroupoid(charts: Mapping) -> TameSubgroupoid:
    for L in charts:
        alph = L.alphabet
        if all(len(e) == 1 for e in L.generators) and L.support == frozenset(alph.atom_ids):
            return L
    raise MissingTop("family lacks a level generated by all single atoms")


@dataclass(frozen=True, eq=False)
class Inconsistent:
    coarse: TameSubgroupoid
    fine: TameSubgroupoid
    discrepancy: float

    def __bool__(self):
        return False

    def __str__(self):
        return f"inconsistent pair {self.coarse} <= {self.fine} (discrepancy {self.discrepancy:g})"


def reconstruct_from_family(charts: Mapping) -> AmbientConnection | Inconsistent:
    """Recover the connection behind a consistent family, or name a violated pair."""
    for L, c in charts.items():
        if c.subgroupoid != L:
            raise ValueError(f"chart keyed by {L} lives on {c.subgroupoid}")
    top = top_subgroupoid(charts)
    chart = charts[top]
    conn = AmbientConnection(
        chart.group,
        top.alphabet,
        {e.letters[0][0]: chart.group.power(v, e.letters[0][1]) for e, v in zip(top.generators, chart.values)},
    )
    keys = list(charts)
    for L in keys:
        for Lp in keys:
            if L is Lp:
                continue
            d = subgroupoid_leq(L, Lp)
            if d is None:
                continue
            projected = project(L, Lp, charts[Lp])
            if not projected.equals(charts[L]):
                return Inconsistent(L, Lp, projected.max_discrepancy(charts[L]))
    return conn


def family_from_connection(conn: AmbientConnection, levels: Sequence[TameSubgroupoid]) -> dict:
    return {L: coordinates(conn, L) for L in levels}


def consistent_families(group: Group, levels: Sequence[TameSubgroupoid]):
    """Yield every consistent family over ``levels`` for a finite group.

    Plain backtracking over the product of all A_L: a partial assignment is
    abandoned as soon as one comparable pair of assigned levels disagrees.
    """
    levels = sorted(levels, key=len, reverse=True)
    relations = {}
    for i, L in enumerate(levels):
        for j in range(i):
            M = levels[j]
            if subgroupoid_leq(L, M) is not None:
                relations.setdefault(i, []).append((j, "coarse"))
            if subgroupoid_leq(M, L) is not None:
                relations.setdefault(i, []).append((j, "fine"))
    candidates = [list(zip(*group.grid(len(L)))) for L in levels]
    chosen: list = [None] * len(levels)

    def ok(i: int) -> bool:
        for j, role in relations.get(i, ()):
            coarse, fine = (i, j) if role == "coarse" else (j, i)
            if not project(levels[coarse], levels[fine], chosen[fine]).equals(chosen[coarse]):
                return False
        return True

    def search(i: int):
        if i == len(levels):
            yield {L: c for L, c in zip(levels, chosen)}
            return
        for values in candidates[i]:
            chosen[i] = Chart(levels[i], tuple(int(v) for v in values), group)
            if ok(i):
                yield from search(i + 1)
        chosen[i] = None

    yield from search(0)
