"""Small reference alphabets."""
from __future__ import annotations

from .groupoid import Alphabet


def path3() -> Alphabet:
    """v0 -a-> v1 -b-> v2 -c-> v3."""
    return Alphabet.from_triples([("a", "v0", "v1"), ("b", "v1", "v2"), ("c", "v2", "v3")])


def triangle() -> Alphabet:
    """A directed 3-cycle v0 -a-> v1 -b-> v2 -c-> v0."""
    return Alphabet.from_triples([("a", "v0", "v1"), ("b", "v1", "v2"), ("c", "v2", "v0")])


def theta() -> Alphabet:
    """Two vertices joined by three parallel atoms."""
    return Alphabet(("x", "y"), (("a", "x", "y"), ("b", "x", "y"), ("c", "x", "y")))


def loop_and_arc() -> Alphabet:
    """A closed atom at v0 plus an arc v0 -> v1 and a pendant atom v1 -> v2."""
    return Alphabet.from_triples([("l", "v0", "v0"), ("a", "v0", "v1"), ("b", "v1", "v2")])


def pair() -> Alphabet:
    """v0 -a-> v1 -b-> v2."""
    return Alphabet.from_triples([("a", "v0", "v1"), ("b", "v1", "v2")])


THREE_ATOM = {"path3": path3, "triangle": triangle, "theta": theta, "loop_and_arc": loop_and_arc}
