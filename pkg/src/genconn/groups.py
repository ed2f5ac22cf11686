"""Compact oracle groups: Z_N, U(1) and SU(2).

Elements are stored as raw numeric values so that every group operation
broadcasts over a leading batch axis:

* ``zn``  -- integer residue(s) in ``0..N-1``
* ``u1``  -- angle(s) in ``[0, 2*pi)``
* ``su2`` -- unit quaternion(s) ``(w, x, y, z)``, shape ``(..., 4)``

:class:`GroupElement` is the tagged scalar wrapper used at API and
serialization boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .errors import InvalidLabel, KindMismatch, NotFinite

TWO_PI = 2.0 * math.pi
KINDS = ("zn", "u1", "su2")
# below this |sin(theta)| the SU(2) character switches to its polynomial form
_SIN_CUTOFF = 1e-6


@dataclass(frozen=True)
class Group:
    kind: str
    n: int | None = None
    approx_tolerance: float = 1e-9

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KindMismatch(f"unknown group kind {self.kind!r}")
        if self.kind == "zn":
            if self.n is None or int(self.n) != self.n or self.n < 2:
                raise KindMismatch(f"Z_N needs integer N >= 2, got {self.n!r}")
        elif self.n is not None:
            raise KindMismatch(f"{self.kind} takes no order parameter")
        if not self.approx_tolerance > 0:
            raise ValueError("approx_tolerance must be positive")

    @classmethod
    def zn(cls, n: int) -> "Group":
        return cls("zn", n)

    @classmethod
    def u1(cls) -> "Group":
        return cls("u1")

    @classmethod
    def su2(cls) -> "Group":
        return cls("su2")

    def __str__(self):
        return {"zn": f"Z_{self.n}", "u1": "U(1)", "su2": "SU(2)"}[self.kind]

    @property
    def is_finite(self) -> bool:
        return self.kind == "zn"

    @property
    def order(self) -> int:
        if not self.is_finite:
            raise NotFinite(f"{self} is not a finite group")
        return self.n

    @property
    def value_shape(self) -> tuple:
        return (4,) if self.kind == "su2" else ()

    # -- group law (batched) -------------------------------------------------

    def identity(self, size=None):
        if size is None:
            return {"zn": 0, "u1": 0.0, "su2": np.array([1.0, 0.0, 0.0, 0.0])}[self.kind]
        shape = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
        if self.kind == "zn":
            return np.zeros(shape, dtype=np.int64)
        if self.kind == "u1":
            return np.zeros(shape)
        out = np.zeros(shape + (4,))
        out[..., 0] = 1.0
        return out

    def mul(self, a, b):
        """Group product ``a * b`` (``b`` acts first in path language)."""
        if self.kind == "zn":
            return np.mod(np.add(a, b), self.n)
        if self.kind == "u1":
            return _wrap_angle(np.add(a, b))
        return _quat_mul(np.asarray(a, dtype=float), np.asarray(b, dtype=float))

    def inv(self, a):
        if self.kind == "zn":
            return np.mod(np.negative(a), self.n)
        if self.kind == "u1":
            return _wrap_angle(np.negative(a))
        a = np.asarray(a, dtype=float)
        return a * np.array([1.0, -1.0, -1.0, -1.0])

    def power(self, a, sign: int):
        return a if sign > 0 else self.inv(a)

    def close(self, a, b, tol: float | None = None):
        """Elementwise approximate equality (exact for Z_N)."""
        tol = self.approx_tolerance if tol is None else tol
        if self.kind == "zn":
            return np.equal(a, b)
        if self.kind == "u1":
            d = np.mod(np.subtract(a, b), TWO_PI)
            return np.minimum(d, TWO_PI - d) <= tol
        diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        return np.sqrt(np.sum(diff * diff, axis=-1)) <= tol

    def all_close(self, a, b, tol: float | None = None) -> bool:
        return bool(np.all(self.close(a, b, tol)))

    # -- sampling and enumeration ---------------------------------------------

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the normalized Haar measure."""
        if self.kind == "zn":
            out = rng.integers(0, self.n, size=size)
            return int(out) if size is None else out.astype(np.int64)
        if self.kind == "u1":
            out = _wrap_angle(rng.random(size) * TWO_PI)
            return float(out) if size is None else out
        shape = (() if size is None else ((size,) if np.isscalar(size) else tuple(size)))
        # isotropic gaussian in R^4 projected to S^3 is exactly Haar on SU(2)
        v = rng.standard_normal(shape + (4,))
        return v / np.linalg.norm(v, axis=-1, keepdims=True)

    def elements(self) -> list:
        if not self.is_finite:
            raise NotFinite(f"{self} has no finite enumeration")
        return list(range(self.n))

    def grid(self, n_slots: int) -> list[np.ndarray]:
        """All of G^n as ``n_slots`` flat residue arrays (C order, slot 0 slowest)."""
        if not self.is_finite:
            raise NotFinite(f"{self} has no finite enumeration")
        if n_slots == 0:
            return []
        idx = np.indices((self.n,) * n_slots).reshape(n_slots, -1)
        return [row.astype(np.int64) for row in idx]

    # -- representations -------------------------------------------------------

    def check_label(self, label):
        """Validate and normalize an irreducible-character label."""
        if self.kind == "su2":
            return parse_spin(label)
        if isinstance(label, bool) or not _is_integral(label):
            raise InvalidLabel(f"{self} character label must be an integer, got {label!r}")
        k = int(label)
        return k % self.n if self.kind == "zn" else k

    def trivial_label(self):
        return Fraction(0) if self.kind == "su2" else 0

    def is_trivial_label(self, label) -> bool:
        return self.check_label(label) == 0

    def conj_label(self, label):
        label = self.check_label(label)
        if self.kind == "zn":
            return (-label) % self.n
        if self.kind == "u1":
            return -label
        return label

    def product_labels(self, j, k) -> list:
        """Decomposition of chi_j * chi_k into irreducible characters."""
        j, k = self.check_label(j), self.check_label(k)
        if self.kind == "zn":
            return [(j + k) % self.n]
        if self.kind == "u1":
            return [j + k]
        lo, hi = abs(j - k), j + k
        return [lo + i for i in range(int(hi - lo) + 1)]

    def character(self, label, g):
        label = self.check_label(label)
        if self.kind == "zn":
            return np.exp(2j * np.pi * label * np.asarray(g) / self.n)
        if self.kind == "u1":
            return np.exp(1j * label * np.asarray(g, dtype=float))
        return su2_character(label, g).astype(complex)

    def fundamental(self, g):
        """Fundamental-representation matrix, shape ``(..., d, d)``."""
        if self.kind == "zn":
            return np.exp(2j * np.pi * np.asarray(g) / self.n)[..., None, None]
        if self.kind == "u1":
            return np.exp(1j * np.asarray(g, dtype=float))[..., None, None]
        q = np.asarray(g, dtype=float)
        w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
        row0 = np.stack([w - 1j * z, -y - 1j * x], axis=-1)
        row1 = np.stack([y - 1j * x, w + 1j * z], axis=-1)
        return np.stack([row0, row1], axis=-2)

    @property
    def fundamental_dim(self) -> int:
        return 2 if self.kind == "su2" else 1

    # -- validation and serialization -------------------------------------------

    def validate(self, value):
        """Return the canonical raw form of a scalar element or raise."""
        if self.kind == "zn":
            if isinstance(value, bool) or not _is_integral(value):
                raise KindMismatch(f"{self} element must be an integer residue, got {value!r}")
            r = int(value)
            if not 0 <= r < self.n:
                raise KindMismatch(f"residue {r} out of range for {self}")
            return r
        if self.kind == "u1":
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise KindMismatch(f"U(1) element must be an angle, got {value!r}")
            return float(_wrap_angle(float(value)))
        q = np.asarray(value, dtype=float)
        if q.shape != (4,):
            raise KindMismatch(f"SU(2) element must be a quaternion of length 4, got {value!r}")
        if abs(float(q @ q) - 1.0) > self.approx_tolerance:
            raise KindMismatch(f"quaternion {value!r} is not of unit norm")
        return q

    def element_to_json(self, value):
        if self.kind == "zn":
            return int(value)
        if self.kind == "u1":
            return float(value)
        return [float(c) for c in np.asarray(value)]

    def element_from_json(self, obj):
        return self.validate(obj)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "zn":
            out["n"] = self.n
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Group":
        kind = obj.get("kind")
        if kind not in KINDS:
            raise KindMismatch(f"unknown group kind {kind!r}")
        if kind == "zn":
            return cls("zn", obj.get("n"))
        return cls(kind)


GroupDescriptor = Group


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A scalar element tagged with its group."""

    group: Group
    value: Any

    def __post_init__(self):
        v = self.group.validate(self.value)
        object.__setattr__(self, "value", tuple(float(c) for c in v) if self.group.kind == "su2" else v)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)

    def inverse(self) -> "GroupElement":
        return invert(self)

    def __eq__(self, other):
        if not isinstance(other, GroupElement) or other.group != self.group:
            return NotImplemented
        return self.group.all_close(np.asarray(self.value), np.asarray(other.value))

    def __hash__(self):
        # only exact for Z_N; continuous groups hash by kind
        return hash((self.group, self.value if self.group.is_finite else None))

    def __repr__(self):
        return f"GroupElement({self.group}, {self.value!r})"


def identity(group: Group) -> GroupElement:
    return GroupElement(group, group.identity())


def compose(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.group != b.group:
        raise KindMismatch(f"cannot compose elements of {a.group} and {b.group}")
    g = a.group
    v = g.mul(np.asarray(a.value), np.asarray(b.value))
    if g.kind == "su2":
        v = v / np.linalg.norm(v)
    return GroupElement(g, v.item() if g.kind != "su2" else v)


def invert(a: GroupElement) -> GroupElement:
    v = a.group.inv(np.asarray(a.value))
    return GroupElement(a.group, v if a.group.kind == "su2" else v.item())


def haar_sample(group: Group, rng: np.random.Generator) -> GroupElement:
    return GroupElement(group, group.sample(rng))


def enumerate_group(group: Group) -> list[GroupElement]:
    return [GroupElement(group, r) for r in group.elements()]


def character(group: Group, label, g: GroupElement) -> complex:
    if g.group != group:
        raise KindMismatch(f"element of {g.group} passed to {group} character")
    return complex(group.character(label, np.asarray(g.value)))


def parse_spin(label) -> Fraction:
    if isinstance(label, bool):
        raise InvalidLabel(f"invalid spin {label!r}")
    try:
        j = Fraction(label) if not isinstance(label, float) else Fraction(label).limit_denominator(2)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InvalidLabel(f"invalid spin {label!r}") from None
    if isinstance(label, float) and float(j) != label:
        raise InvalidLabel(f"spin {label!r} is not a half-integer")
    if j < 0 or (2 * j).denominator != 1:
        raise InvalidLabel(f"spin must be a non-negative half-integer, got {label!r}")
    return j


def spin_to_json(j: Fraction):
    return int(j) if j.denominator == 1 else f"{j.numerator}/{j.denominator}"


def su2_character(j, g) -> np.ndarray:
    """Weyl character chi_j(g) = sin((2j+1)t)/sin(t) with cos(t) = w."""
    q = np.asarray(g, dtype=float)
    w = np.clip(q[..., 0], -1.0, 1.0)
    dim = int(2 * j) + 1
    theta = np.arccos(w)
    s = np.sin(theta)
    small = np.abs(s) < _SIN_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        regular = np.sin(dim * theta) / np.where(small, 1.0, s)
    if not np.any(small):
        return regular
    return np.where(small, _chebyshev_u(dim - 1, w), regular)


def _chebyshev_u(m: int, x):
    """U_m(x), which equals chi_{m/2} as a polynomial in cos(theta)."""
    prev, cur = np.ones_like(x), 2.0 * x
    if m == 0:
        return prev
    for _ in range(m - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def _wrap_angle(x):
    out = np.mod(x, TWO_PI)
    # mod of a tiny negative can round up to exactly 2*pi
    return np.where(out >= TWO_PI, 0.0, out)


def _quat_mul(a, b):
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def _is_integral(x) -> bool:
    if isinstance(x, (int, np.integer)):
        return True
    if isinstance(x, (float, np.floating)):
        return float(x).is_integer()
    return False


def substream(seed: int, worker: int = 0, stream: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, stream, worker)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(worker))))


def stack_elements(group: Group, values: Sequence) -> np.ndarray:
    return np.stack([np.asarray(v) for v in values]) if group.kind == "su2" else np.asarray(values)
