"""Gauge transformations and alphabet automorphisms acting on connections,
on cylindrical functions (the unitary action f -> f o T^-1) and the
corresponding invariance audits of the uniform measure."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .cyl import CylFunction, Twist
from .errors import AlphabetMismatch, KindMismatch
from .family import AmbientConnection
from .groupoid import Alphabet, Edge, PathWord, TameSubgroupoid
from .groups import Group
from .measure import SIGMAS, UNIFORM, inner_product, integrate
from .methods import EXACT, Exact, MonteCarlo


@dataclass(frozen=True, eq=False)
class GaugeTransformation:
    """Vertex -> G, identity off the declared support."""

    group: Group
    values: Mapping

    def __post_init__(self):
        object.__setattr__(self, "values", {v: self.group.validate(x) for v, x in self.values.items()})

    def at(self, vertex):
        return self.values.get(vertex, self.group.identity())

    def __mul__(self, other: "GaugeTransformation") -> "GaugeTransformation":
        """Pointwise product: (h * g)(x) = h(x) g(x)."""
        if other.group != self.group:
            raise KindMismatch("gauge transformations in different groups")
        keys = list(dict.fromkeys(list(self.values) + list(other.values)))
        return GaugeTransformation(self.group, {v: _scalar(self.group, self.group.mul(self.at(v), other.at(v))) for v in keys})

    def inverse(self) -> "GaugeTransformation":
        return GaugeTransformation(self.group, {v: _scalar(self.group, self.group.inv(x)) for v, x in self.values.items()})

    def is_identity(self) -> bool:
        return all(self.group.all_close(x, self.group.identity()) for x in self.values.values())

    def to_json(self) -> dict:
        return {v: self.group.element_to_json(x) for v, x in self.values.items()}


def _scalar(group: Group, v):
    if group.kind == "zn":
        return int(v)
    if group.kind == "u1":
        return float(v)
    return np.asarray(v) / np.linalg.norm(v)


def gauge_act(g: GaugeTransformation, conn: AmbientConnection) -> AmbientConnection:
    """A_g(a) = g(r(a)) A(a) g(s(a))^-1 on every atom."""
    if g.group != conn.group:
        raise KindMismatch(f"gauge in {g.group}, connection in {conn.group}")
    G = conn.group
    out = {}
    for atom in conn.alphabet.atoms:
        left, right = g.at(atom.dst), G.inv(g.at(atom.src))
        out[atom.id] = G.mul(G.mul(left, conn[atom.id]), right)
    return AmbientConnection(G, conn.alphabet, out)


@dataclass(frozen=True, eq=False)
class GroupoidAutomorphism:
    """Incidence-preserving signed bijection of vertices and atoms."""

    alphabet: Alphabet
    vertex_map: Mapping
    atom_map: Mapping  # atom id -> (image atom id, sign)

    def __post_init__(self):
        alph = self.alphabet
        vm = {v: self.vertex_map.get(v, v) for v in alph.vertices}
        am = {a: tuple(self.atom_map.get(a, (a, 1))) for a in alph.atom_ids}
        if sorted(vm.values()) != sorted(alph.vertices):
            raise AlphabetMismatch("vertex map is not a bijection of the alphabet's vertices")
        if sorted(b for b, _ in am.values()) != sorted(alph.atom_ids):
            raise AlphabetMismatch("atom map is not a bijection of the alphabet's atoms")
        for a, (b, s) in am.items():
            src, dst = alph.atom(a).src, alph.atom(a).dst
            image = alph.atom(b)
            want = (vm[src], vm[dst]) if s > 0 else (vm[dst], vm[src])
            if (image.src, image.dst) != want:
                raise AlphabetMismatch(f"atom map {a}->{b}{'+' if s > 0 else '-'} breaks incidence")
        object.__setattr__(self, "vertex_map", vm)
        object.__setattr__(self, "atom_map", am)

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "GroupoidAutomorphism":
        return cls(alphabet, {}, {})

    def is_identity(self) -> bool:
        return all(v == w for v, w in self.vertex_map.items()) and all(
            a == b and s > 0 for a, (b, s) in self.atom_map.items()
        )

    def apply(self, p: PathWord) -> PathWord:
        letters = tuple((self.atom_map[a][0], s * self.atom_map[a][1]) for a, s in p.letters)
        cls = Edge if isinstance(p, Edge) else PathWord
        if not letters:
            return PathWord(self.alphabet, (), self.vertex_map[p.base])
        return cls(self.alphabet, letters)

    def apply_subgroupoid(self, L: TameSubgroupoid) -> TameSubgroupoid:
        return TameSubgroupoid(tuple(self.apply(e) for e in L.generators))

    def inverse(self) -> "GroupoidAutomorphism":
        return GroupoidAutomorphism(
            self.alphabet,
            {w: v for v, w in self.vertex_map.items()},
            {b: (a, s) for a, (b, s) in self.atom_map.items()},
        )

    def __matmul__(self, other: "GroupoidAutomorphism") -> "GroupoidAutomorphism":
        """``F @ G`` applies G first."""
        if other.alphabet != self.alphabet:
            raise AlphabetMismatch("automorphisms of different alphabets")
        vm = {v: self.vertex_map[w] for v, w in other.vertex_map.items()}
        am = {}
        for a, (b, s) in other.atom_map.items():
            c, t = self.atom_map[b]
            am[a] = (c, s * t)
        return GroupoidAutomorphism(self.alphabet, vm, am)

    def to_json(self) -> dict:
        return {
            "vertices": dict(self.vertex_map),
            "atoms": {a: {"to": b, "sign": s} for a, (b, s) in self.atom_map.items()},
        }

    @classmethod
    def from_json(cls, alphabet: Alphabet, obj: dict) -> "GroupoidAutomorphism":
        atoms = {a: (spec["to"], int(spec.get("sign", 1))) for a, spec in obj.get("atoms", {}).items()}
        return cls(alphabet, dict(obj.get("vertices", {})), atoms)


def all_automorphisms(alphabet: Alphabet) -> list[GroupoidAutomorphism]:
    """Every incidence-preserving automorphism of a small alphabet."""
    atoms = alphabet.atoms
    out = []
    for perm in itertools.permutations(alphabet.vertices):
        vm = dict(zip(alphabet.vertices, perm))

        def extend(i: int, used: set, chosen: dict):
            if i == len(atoms):
                out.append(GroupoidAutomorphism(alphabet, vm, dict(chosen)))
                return
            a = atoms[i]
            for b in atoms:
                if b.id in used:
                    continue
                for s in (1, -1):
                    want = (vm[a.src], vm[a.dst]) if s > 0 else (vm[a.dst], vm[a.src])
                    if (b.src, b.dst) == want:
                        chosen[a.id] = (b.id, s)
                        extend(i + 1, used | {b.id}, chosen)
                        del chosen[a.id]

        extend(0, set(), {})
    return out


def automorphism_act(F: GroupoidAutomorphism, conn: AmbientConnection) -> AmbientConnection:
    """(F A)(p) = A(F^-1 p)."""
    if F.alphabet != conn.alphabet:
        raise AlphabetMismatch("automorphism and connection live on different alphabets")
    G = conn.group
    out = {}
    for b, (a, s) in F.atom_map.items():
        # F(b) = a^s, so F^-1 [a+] = [b^s]
        out[a] = G.power(conn[b], s)
    return AmbientConnection(G, conn.alphabet, out)


def act(T, conn: AmbientConnection) -> AmbientConnection:
    if isinstance(T, GaugeTransformation):
        return gauge_act(T, conn)
    return automorphism_act(T, conn)


def inverse(T):
    return T.inverse()


def act_on_function(T, f: CylFunction) -> CylFunction:
    """(U_T f)(A) = f(T^-1 A)."""
    if isinstance(T, GaugeTransformation):
        if T.group != f.group:
            raise KindMismatch(f"gauge in {T.group}, function on {f.group}")
        if T.is_identity():
            return f
        G = f.group
        gi = T.inverse()
        left = tuple(gi.at(e.target) for e in f.label.generators)
        right = tuple(T.at(e.source) for e in f.label.generators)
        return CylFunction(f.label, Twist(f.expr, left, right), G)
    if isinstance(T, GroupoidAutomorphism):
        if T.alphabet != f.label.alphabet:
            raise AlphabetMismatch("automorphism and function live on different alphabets")
        image = T.apply_subgroupoid(f.label)
        if image == f.label:
            return f
        return CylFunction(image, f.expr, f.group)
    raise TypeError(f"unknown transformation {T!r}")


@dataclass
class InvarianceReport:
    lhs: object
    rhs: object
    passed: bool
    discrepancy: float

    def to_json(self) -> dict:
        return {
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
            "pass": self.passed,
            "discrepancy": self.discrepancy,
        }


def _compare(lhs, rhs) -> InvarianceReport:
    diff = abs(lhs.mean - rhs.mean)
    if lhs.method == "exact" and rhs.method == "exact":
        return InvarianceReport(lhs, rhs, lhs.mean == rhs.mean, diff)
    return InvarianceReport(lhs, rhs, diff <= SIGMAS * math.hypot(lhs.stderr, rhs.stderr), diff)


def invariance_report(f: CylFunction, T, method=EXACT) -> InvarianceReport:
    """Compare the uniform integral of f with that of U_T f."""
    g = act_on_function(T, f)
    if isinstance(method, Exact):
        return _compare(integrate(f, UNIFORM, method), integrate(g, UNIFORM, method))
    if isinstance(method, MonteCarlo):
        return _compare(integrate(f, UNIFORM, method, stream=0), integrate(g, UNIFORM, method, stream=1))
    raise TypeError(f"unknown method {method!r}")


def unitarity_report(f: CylFunction, h: CylFunction, T, method=EXACT) -> InvarianceReport:
    """Compare <U_T f, U_T h> with <f, h>."""
    Uf, Uh = act_on_function(T, f), act_on_function(T, h)
    if isinstance(method, Exact):
        return _compare(inner_product(f, h, UNIFORM, method), inner_product(Uf, Uh, UNIFORM, method))
    return _compare(
        inner_product(f, h, UNIFORM, method, stream=0), inner_product(Uf, Uh, UNIFORM, method, stream=1)
    )
