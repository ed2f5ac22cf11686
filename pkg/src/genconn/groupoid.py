"""Combinatorial path groupoid over a finite alphabet of atomic segments.

A path is a reduced word of signed atoms.  Words are read in travel
order: ``[l1, l2, ...]`` traverses ``l1`` first.  Composition ``p2 p1``
(first ``p1``, then ``p2``) therefore concatenates ``p1``'s letters before
``p2``'s and cancels retracings ``(a,+)(a,-)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import (
    EndpointMismatch,
    NotComposable,
    NotIndependent,
    NotSimple,
    UnknownAtom,
)

Letter = tuple  # (atom id, sign)


@dataclass(frozen=True)
class Atom:
    id: str
    src: str
    dst: str


@dataclass(frozen=True)
class Alphabet:
    vertices: tuple
    atoms: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "atoms", tuple(a if isinstance(a, Atom) else Atom(*a) for a in self.atoms))
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex labels")
        ids = [a.id for a in self.atoms]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate atom ids")
        vs = set(self.vertices)
        for a in self.atoms:
            if a.src not in vs or a.dst not in vs:
                raise ValueError(f"atom {a.id!r} has an endpoint outside the vertex set")

    @classmethod
    def from_triples(cls, triples: Iterable[tuple]) -> "Alphabet":
        triples = list(triples)
        verts: list = []
        for _, s, t in triples:
            for v in (s, t):
                if v not in verts:
                    verts.append(v)
        return cls(tuple(verts), tuple(Atom(*t) for t in triples))

    @cached_property
    def atom_map(self) -> dict:
        return {a.id: a for a in self.atoms}

    @property
    def atom_ids(self) -> tuple:
        return tuple(a.id for a in self.atoms)

    def atom(self, atom_id) -> Atom:
        try:
            return self.atom_map[atom_id]
        except KeyError:
            raise UnknownAtom(f"atom {atom_id!r} not in alphabet") from None

    def letter_source(self, letter: Letter):
        a = self.atom(letter[0])
        return a.src if letter[1] > 0 else a.dst

    def letter_target(self, letter: Letter):
        a = self.atom(letter[0])
        return a.dst if letter[1] > 0 else a.src

    def outgoing(self, vertex) -> list:
        """All letters whose source is ``vertex``."""
        out = []
        for a in self.atoms:
            if a.src == vertex:
                out.append((a.id, 1))
            if a.dst == vertex:
                out.append((a.id, -1))
        return out

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "atoms": [{"id": a.id, "src": a.src, "dst": a.dst} for a in self.atoms],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Alphabet":
        return cls(
            tuple(obj["vertices"]),
            tuple(Atom(a["id"], a["src"], a["dst"]) for a in obj["atoms"]),
        )


@dataclass(frozen=True, eq=False)
class PathWord:
    alphabet: Alphabet = field(repr=False)
    letters: tuple
    base: str | None = None

    def __post_init__(self):
        letters = tuple((a, int(s)) for a, s in self.letters)
        object.__setattr__(self, "letters", letters)
        for a, s in letters:
            self.alphabet.atom(a)
            if s not in (1, -1):
                raise ValueError(f"letter sign must be +1 or -1, got {s}")
        for x, y in zip(letters, letters[1:]):
            if self.alphabet.letter_target(x) != self.alphabet.letter_source(y):
                raise NotComposable(f"letters {x} and {y} do not meet")
            if x[0] == y[0] and x[1] == -y[1]:
                raise ValueError(f"word is not reduced at {x}{y}; use reduce()")
        if letters:
            object.__setattr__(self, "base", None)
        elif self.base not in self.alphabet.vertices:
            raise ValueError(f"identity word needs a base vertex of the alphabet, got {self.base!r}")

    def __eq__(self, other):
        if not isinstance(other, PathWord):
            return NotImplemented
        return (self.alphabet, self.letters, self.base) == (other.alphabet, other.letters, other.base)

    def __hash__(self):
        return hash((self.letters, self.base))

    @property
    def source(self):
        return self.alphabet.letter_source(self.letters[0]) if self.letters else self.base

    @property
    def target(self):
        return self.alphabet.letter_target(self.letters[-1]) if self.letters else self.base

    s = source
    r = target

    @property
    def is_identity(self) -> bool:
        return not self.letters

    @property
    def is_closed(self) -> bool:
        return self.source == self.target

    def __len__(self):
        return len(self.letters)

    def vertex_sequence(self) -> list:
        seq = [self.source]
        for let in self.letters:
            seq.append(self.alphabet.letter_target(let))
        return seq

    @property
    def support(self) -> frozenset:
        return frozenset(a for a, _ in self.letters)

    def inverse(self) -> "PathWord":
        return PathWord(self.alphabet, tuple((a, -s) for a, s in reversed(self.letters)), self.base)

    def __matmul__(self, other: "PathWord") -> "PathWord":
        """``p2 @ p1`` is the groupoid product p2 p1 (first p1)."""
        return compose_paths(self, other)

    def to_json(self) -> list:
        return [a if s > 0 else "~" + a for a, s in self.letters]

    def __str__(self):
        if not self.letters:
            return f"1_{self.base}"
        return "[" + ",".join(a + ("+" if s > 0 else "-") for a, s in self.letters) + "]"


def identity_word(alphabet: Alphabet, vertex) -> PathWord:
    return PathWord(alphabet, (), vertex)


def parse_letters(tokens: Sequence[str]) -> list:
    """``["a", "~b"]`` -> ``[("a", 1), ("b", -1)]``."""
    out = []
    for t in tokens:
        if not isinstance(t, str) or not t.lstrip("~"):
            raise ValueError(f"bad letter token {t!r}")
        out.append((t[1:], -1) if t.startswith("~") else (t, 1))
    return out


def reduce(alphabet: Alphabet, letters: Iterable, base=None) -> PathWord:
    """Cancel all retracings of a composable letter sequence."""
    letters = [(a, int(s)) for a, s in letters]
    for x, y in zip(letters, letters[1:]):
        if alphabet.letter_target(x) != alphabet.letter_source(y):
            raise NotComposable(f"letters {x} and {y} do not meet")
    if letters:
        if base is not None and base != alphabet.letter_source(letters[0]):
            raise NotComposable(f"base {base!r} is not the source of the first letter")
        base = alphabet.letter_source(letters[0])
    stack: list = []
    for let in letters:
        if stack and stack[-1][0] == let[0] and stack[-1][1] == -let[1]:
            stack.pop()
        else:
            stack.append(let)
    return PathWord(alphabet, tuple(stack), None if stack else base)


def word(alphabet: Alphabet, tokens: Sequence[str], base=None) -> PathWord:
    return reduce(alphabet, parse_letters(tokens), base)


def compose_paths(p2: PathWord, p1: PathWord) -> PathWord:
    if p1.alphabet != p2.alphabet:
        raise EndpointMismatch("paths live on different alphabets")
    if p2.source != p1.target:
        raise EndpointMismatch(f"s(p2)={p2.source!r} differs from r(p1)={p1.target!r}")
    return reduce(p1.alphabet, p1.letters + p2.letters, p1.source)


def invert_path(p: PathWord) -> PathWord:
    return p.inverse()


# -- edges and independence ----------------------------------------------------


def is_simple(p: PathWord) -> bool:
    if not p.letters:
        return False
    ids = [a for a, _ in p.letters]
    if len(set(ids)) != len(ids):
        return False
    seq = p.vertex_sequence()
    interior = seq[1:-1]
    ends = {seq[0], seq[-1]}
    return len(set(interior)) == len(interior) and not ends.intersection(interior)


class Edge(PathWord):
    """A nonempty simple word: no repeated atom, no interior self-crossing."""

    def __post_init__(self):
        if not self.letters:
            raise NotSimple("an edge cannot be an identity word")
        super().__post_init__()
        if not is_simple(self):
            raise NotSimple(f"{self} is not a simple word")

    @classmethod
    def of(cls, p: PathWord) -> "Edge":
        return cls(p.alphabet, p.letters)

    def inverse(self) -> "Edge":
        return Edge(self.alphabet, tuple((a, -s) for a, s in reversed(self.letters)))

    def interior_vertices(self) -> set:
        return set(self.vertex_sequence()[1:-1])

    def vertices(self) -> set:
        return set(self.vertex_sequence())


def edge(alphabet: Alphabet, tokens: Sequence[str]) -> Edge:
    return Edge(alphabet, tuple(parse_letters(tokens)))


def is_independent(edges: Sequence[Edge]) -> bool:
    edges = list(edges)
    for i, e in enumerate(edges):
        for f in edges[i + 1 :]:
            if e.support & f.support:
                return False
            if e.interior_vertices() & f.vertices() or f.interior_vertices() & e.vertices():
                return False
    return True


@dataclass(frozen=True)
class TameSubgroupoid:
    """Subgroupoid freely generated by an ordered, oriented independent edge set."""

    generators: tuple

    def __post_init__(self):
        gens = tuple(g if isinstance(g, Edge) else Edge.of(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise NotIndependent("a tame subgroupoid needs at least one generator")
        alph = gens[0].alphabet
        if any(g.alphabet != alph for g in gens):
            raise NotIndependent("generators live on different alphabets")
        if not is_independent(gens):
            raise NotIndependent("generators are not independent: " + ", ".join(map(str, gens)))

    @property
    def alphabet(self) -> Alphabet:
        return self.generators[0].alphabet

    def __len__(self):
        return len(self.generators)

    @cached_property
    def support(self) -> frozenset:
        return frozenset().union(*(g.support for g in self.generators))

    @cached_property
    def objects(self) -> frozenset:
        return frozenset(v for g in self.generators for v in (g.source, g.target))

    @cached_property
    def _atom_index(self) -> dict:
        return {a: k for k, g in enumerate(self.generators) for a, _ in g.letters}

    def reoriented(self, signs: Sequence[int]) -> "TameSubgroupoid":
        return TameSubgroupoid(tuple(g if s > 0 else g.inverse() for g, s in zip(self.generators, signs)))

    def permuted(self, order: Sequence[int]) -> "TameSubgroupoid":
        return TameSubgroupoid(tuple(self.generators[k] for k in order))

    def canonical_key(self) -> tuple:
        """Presentation-independent identity of the generated subgroupoid."""
        return tuple(sorted(_canonical_letters(g) for g in self.generators))

    def same_subgroupoid(self, other: "TameSubgroupoid") -> bool:
        return self.canonical_key() == other.canonical_key()

    def to_json(self) -> list:
        return [g.to_json() for g in self.generators]

    def __str__(self):
        return "<" + ", ".join(map(str, self.generators)) + ">"


def atoms_subgroupoid(alphabet: Alphabet, atom_ids: Iterable | None = None) -> TameSubgroupoid:
    """The subgroupoid generated by single atoms (the finest level)."""
    ids = alphabet.atom_ids if atom_ids is None else [a for a in alphabet.atom_ids if a in set(atom_ids)]
    return TameSubgroupoid(tuple(Edge(alphabet, ((a, 1),)) for a in ids))


def _canonical_letters(e: PathWord) -> tuple:
    fwd = e.letters
    bwd = tuple((a, -s) for a, s in reversed(fwd))
    return min(fwd, bwd, key=lambda w: tuple((a, -s) for a, s in w))


# -- decomposition and the partial order ---------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """Per coarse generator, the travel-ordered signed indices of fine generators."""

    words: tuple

    def is_identity(self) -> bool:
        return all(w == ((i, 1),) for i, w in enumerate(self.words))


def decompose(p: PathWord, L: TameSubgroupoid) -> tuple | None:
    """Write ``p`` as a word in the generators of ``L``, or ``None``."""
    if p.alphabet != L.alphabet:
        return None
    if not p.letters:
        return () if p.base in L.objects else None
    index = L._atom_index
    out = []
    pos, n = 0, len(p.letters)
    while pos < n:
        a, s = p.letters[pos]
        k = index.get(a)
        if k is None:
            return None
        gen = L.generators[k].letters
        if gen[0] == (a, s):
            chunk, sign = gen, 1
        elif gen[-1] == (a, -s):
            chunk, sign = tuple((b, -t) for b, t in reversed(gen)), -1
        else:
            return None
        if p.letters[pos : pos + len(chunk)] != chunk:
            return None
        out.append((k, sign))
        pos += len(chunk)
    return tuple(out)


def subgroupoid_leq(L: TameSubgroupoid, Lp: TameSubgroupoid) -> Decomposition | None:
    """Decomposition of L's generators over L' when L <= L', else ``None``."""
    words = []
    for e in L.generators:
        w = decompose(e, Lp)
        if w is None:
            return None
        words.append(w)
    return Decomposition(tuple(words))


def leq(L: TameSubgroupoid, Lp: TameSubgroupoid) -> bool:
    return subgroupoid_leq(L, Lp) is not None


def compose_decompositions(d1: Decomposition, d2: Decomposition) -> Decomposition:
    """Given L<=L' (d1) and L'<=L'' (d2), the induced L<=L'' decomposition."""
    words = []
    for w in d1.words:
        letters: list = []
        for k, s in w:
            inner = d2.words[k]
            if s < 0:
                inner = tuple((j, -t) for j, t in reversed(inner))
            for let in inner:
                if letters and letters[-1] == (let[0], -let[1]):
                    letters.pop()
                else:
                    letters.append(let)
        words.append(tuple(letters))
    return Decomposition(tuple(words))


# -- enumeration (small alphabets) ---------------------------------------------


def simple_edges(alphabet: Alphabet, max_length: int | None = None) -> list[Edge]:
    """Every edge of the alphabet, one per orientation class (canonical orientation)."""
    seen: dict = {}
    limit = len(alphabet.atoms) if max_length is None else max_length

    def extend(letters: list):
        p = PathWord(alphabet, tuple(letters))
        if is_simple(p):
            key = _canonical_letters(p)
            seen.setdefault(key, Edge(alphabet, key))
        if len(letters) >= limit or p.is_closed:
            return
        used = p.support
        for let in alphabet.outgoing(p.target):
            if let[0] not in used:
                nxt = letters + [let]
                q = PathWord(alphabet, tuple(nxt))
                seq = q.vertex_sequence()
                # prune walks that already revisit an interior vertex
                if len(set(seq[1:-1])) == len(seq) - 2 and seq[0] not in seq[1:-1]:
                    extend(nxt)

    for a in alphabet.atoms:
        extend([(a.id, 1)])
        extend([(a.id, -1)])
    return sorted(seen.values(), key=lambda e: (len(e), e.letters))


def all_tame_subgroupoids(alphabet: Alphabet, max_generators: int | None = None) -> list[TameSubgroupoid]:
    """All tame subgroupoids, one canonical presentation each."""
    edges = simple_edges(alphabet)
    out = []

    def grow(start: int, chosen: list):
        if chosen:
            out.append(TameSubgroupoid(tuple(chosen)))
        if max_generators is not None and len(chosen) >= max_generators:
            return
        for i in range(start, len(edges)):
            cand = chosen + [edges[i]]
            if is_independent(cand):
                grow(i + 1, cand)

    grow(0, [])
    return out


def nested_pairs(subgroupoids: Sequence[TameSubgroupoid]) -> Iterator[tuple]:
    for L, Lp in itertools.product(subgroupoids, repeat=2):
        d = subgroupoid_leq(L, Lp)
        if d is not None:
            yield L, Lp, d
