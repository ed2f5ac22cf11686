"""Cylindrical functions F(A(e_1), ..., A(e_n)) over a tame subgroupoid.

``F`` is a closed expression tree over ``n`` group-valued slots.  Every node
evaluates on raw (possibly batched) slot values and returns a complex
array, so the same tree serves exact enumeration and Monte Carlo.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import KindMismatch, NotComparable, TooLargeForExact
from .family import AmbientConnection, batch_shape, coordinates, fold
from .groupoid import (
    PathWord,
    TameSubgroupoid,
    atoms_subgroupoid,
    decompose,
    is_independent,
    is_simple,
    reduce,
    subgroupoid_leq,
    Edge,
)
from .groups import Group, spin_to_json, substream
from .methods import Exact, MonteCarlo

EXACT_LIMIT = 10**6


class Expression:
    arity: int | None = None

    def evaluate(self, group: Group, slots: Sequence) -> np.ndarray:
        raise NotImplementedError

    def char_series(self, group: Group, arity: int) -> dict | None:
        """Expansion into character products, or ``None`` if not expressible."""
        return None

    def __add__(self, other):
        return Add((self, other))

    def __mul__(self, other):
        return Mul((self, other))

    def conj(self):
        return Conj(self)


@dataclass(frozen=True)
class Const(Expression):
    value: complex

    def evaluate(self, group, slots):
        return np.asarray(complex(self.value))

    def char_series(self, group, arity):
        return {(group.trivial_label(),) * arity: complex(self.value)}

    def to_json(self, group):
        return {"op": "const", "re": float(np.real(self.value)), "im": float(np.imag(self.value))}


@dataclass(frozen=True)
class CharProd(Expression):
    """Product of irreducible characters, one label per slot."""

    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def arity(self):
        return len(self.labels)

    def evaluate(self, group, slots):
        out = np.asarray(1.0 + 0j)
        for label, g in zip(self.labels, slots):
            if not group.is_trivial_label(label):
                out = out * group.character(label, g)
        return out

    def char_series(self, group, arity):
        return {tuple(group.check_label(x) for x in self.labels): 1.0 + 0j}

    def to_json(self, group):
        enc = spin_to_json if group.kind == "su2" else int
        return {"op": "charprod", "labels": [enc(group.check_label(x)) for x in self.labels]}


@dataclass(frozen=True)
class MatPoly(Expression):
    """Polynomial in Re/Im parts of fundamental-representation entries.

    ``terms`` is a tuple of ``(coef, factors)``; each factor is
    ``(slot, row, col, part, power)`` with ``part`` in ``{"re", "im"}``.
    """

    n_slots: int
    terms: tuple

    def __post_init__(self):
        terms = tuple((complex(c), tuple(tuple(f) for f in fs)) for c, fs in self.terms)
        for _, fs in terms:
            for slot, _, _, part, power in fs:
                if not 0 <= slot < self.n_slots or part not in ("re", "im") or power < 0:
                    raise ValueError(f"bad matpoly factor {(slot, part, power)}")
        object.__setattr__(self, "terms", terms)

    @property
    def arity(self):
        return self.n_slots

    def evaluate(self, group, slots):
        mats: dict = {}
        total = np.asarray(0j)
        for coef, fs in self.terms:
            term = np.asarray(coef)
            for slot, i, j, part, power in fs:
                if slot not in mats:
                    mats[slot] = group.fundamental(slots[slot])
                entry = mats[slot][..., i, j]
                term = term * (entry.real if part == "re" else entry.imag) ** power
            total = total + term
        return total

    def to_json(self, group):
        return {
            "op": "matpoly",
            "slots": self.n_slots,
            "terms": [
                {
                    "coef": {"re": c.real, "im": c.imag},
                    "factors": [
                        {"slot": s, "entry": [i, j], "part": p, "power": k} for s, i, j, p, k in fs
                    ],
                }
                for c, fs in self.terms
            ],
        }


@dataclass(frozen=True, eq=False)
class Table(Expression):
    """Explicit function on G^n for a finite group, indexed by residues."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    @property
    def arity(self):
        return self.values.ndim

    def evaluate(self, group, slots):
        if not group.is_finite or any(d != group.n for d in self.values.shape):
            raise KindMismatch(f"table of shape {self.values.shape} does not fit {group}")
        return self.values[tuple(np.asarray(s) for s in slots)]

    @classmethod
    def from_entries(cls, group: Group, n_slots: int, entries) -> "Table":
        arr = np.full((group.order,) * n_slots, np.nan, dtype=complex)
        for key, v in (entries.items() if isinstance(entries, dict) else entries):
            key = (key,) if np.isscalar(key) else tuple(key)
            if len(key) != n_slots:
                raise ValueError(f"table key {key} has wrong length")
            arr[key] = v
        if np.isnan(arr).any():
            raise ValueError("table is not total on G^n")
        return cls(arr)

    def to_json(self, group):
        entries = []
        for idx in np.ndindex(*self.values.shape):
            v = self.values[idx]
            entries.append([list(map(int, idx)), {"re": float(v.real), "im": float(v.imag)}])
        return {"op": "table", "slots": self.arity, "entries": entries}


def _merge_arity(args) -> int | None:
    ar = {a.arity for a in args if a.arity is not None}
    if len(ar) > 1:
        raise ValueError(f"combined expressions disagree on arity: {sorted(ar)}")
    return ar.pop() if ar else None


@dataclass(frozen=True, eq=False)
class Add(Expression):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        _merge_arity(self.args)

    @property
    def arity(self):
        return _merge_arity(self.args)

    def evaluate(self, group, slots):
        out = np.asarray(0j)
        for a in self.args:
            out = out + a.evaluate(group, slots)
        return out

    def char_series(self, group, arity):
        acc: dict = {}
        for a in self.args:
            s = a.char_series(group, arity)
            if s is None:
                return None
            for k, v in s.items():
                acc[k] = acc.get(k, 0j) + v
        return acc

    def to_json(self, group):
        return {"op": "add", "args": [a.to_json(group) for a in self.args]}


@dataclass(frozen=True, eq=False)
class Mul(Expression):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        _merge_arity(self.args)

    @property
    def arity(self):
        return _merge_arity(self.args)

    def evaluate(self, group, slots):
        out = np.asarray(1.0 + 0j)
        for a in self.args:
            out = out * a.evaluate(group, slots)
        return out

    def char_series(self, group, arity):
        acc = {(group.trivial_label(),) * arity: 1.0 + 0j}
        for a in self.args:
            s = a.char_series(group, arity)
            if s is None:
                return None
            nxt: dict = {}
            for (k1, v1), (k2, v2) in itertools.product(acc.items(), s.items()):
                per_slot = [group.product_labels(x, y) for x, y in zip(k1, k2)]
                for combo in itertools.product(*per_slot):
                    nxt[combo] = nxt.get(combo, 0j) + v1 * v2
            acc = nxt
        return acc

    def to_json(self, group):
        return {"op": "mul", "args": [a.to_json(group) for a in self.args]}


@dataclass(frozen=True, eq=False)
class Conj(Expression):
    arg: Expression

    @property
    def arity(self):
        return self.arg.arity

    def evaluate(self, group, slots):
        return np.conj(self.arg.evaluate(group, slots))

    def char_series(self, group, arity):
        s = self.arg.char_series(group, arity)
        if s is None:
            return None
        return {tuple(group.conj_label(x) for x in k): np.conj(v) for k, v in s.items()}

    def to_json(self, group):
        return {"op": "conj", "args": [self.arg.to_json(group)]}


@dataclass(frozen=True, eq=False)
class Subst(Expression):
    """Composition with a signed-product map G^m -> G^n (a projection pi_{n,m})."""

    arg: Expression
    words: tuple
    n_slots: int

    def __post_init__(self):
        words = tuple(tuple((int(k), int(s)) for k, s in w) for w in self.words)
        object.__setattr__(self, "words", words)
        if self.arg.arity is not None and self.arg.arity != len(words):
            raise ValueError(f"substitution supplies {len(words)} slots to arity {self.arg.arity}")
        for w in words:
            for k, s in w:
                if not 0 <= k < self.n_slots or s not in (1, -1):
                    raise ValueError(f"bad substitution letter {(k, s)}")

    @property
    def arity(self):
        return self.n_slots

    def evaluate(self, group, slots):
        inner = [fold(group, [(slots[k], s) for k, s in w]) for w in self.words]
        return self.arg.evaluate(group, inner)

    def char_series(self, group, arity):
        # abelian characters are multiplicative; for SU(2) only slot relabelings
        # (single letters on distinct slots) keep a character product
        if group.kind == "su2":
            used = [k for w in self.words for k, _ in w]
            if any(len(w) > 1 for w in self.words) or len(used) != len(set(used)):
                return None
        inner = self.arg.char_series(group, len(self.words))
        if inner is None:
            return None
        out: dict = {}
        for labels, coef in inner.items():
            outer = [group.trivial_label()] * arity
            for j, w in zip(labels, self.words):
                if not w:
                    coef = coef * complex(group.character(j, group.identity()))
                for k, s in w:
                    lab = j if s > 0 else group.conj_label(j)
                    outer[k] = group.product_labels(outer[k], lab)[0]
            key = tuple(outer)
            out[key] = out.get(key, 0j) + coef
        return out

    def to_json(self, group):
        return {
            "op": "subst",
            "slots": self.n_slots,
            "words": [[[k, s] for k, s in w] for w in self.words],
            "args": [self.arg.to_json(group)],
        }


@dataclass(frozen=True, eq=False)
class Twist(Expression):
    """Slot-wise ``g_i -> left_i * g_i * right_i`` with fixed group elements."""

    arg: Expression
    left: tuple
    right: tuple

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        if len(self.left) != len(self.right):
            raise ValueError("twist needs as many left as right factors")
        if self.arg.arity is not None and self.arg.arity != len(self.left):
            raise ValueError("twist length does not match argument arity")

    @property
    def arity(self):
        return len(self.left)

    def evaluate(self, group, slots):
        moved = [group.mul(group.mul(l, g), r) for l, g, r in zip(self.left, slots, self.right)]
        return self.arg.evaluate(group, moved)

    def char_series(self, group, arity):
        if group.kind == "su2":
            # chi(l g r) = chi(g r l): a class function survives only if r l = 1
            if not all(group.all_close(group.mul(r, l), group.identity()) for l, r in zip(self.left, self.right)):
                return None
            return self.arg.char_series(group, arity)
        inner = self.arg.char_series(group, arity)
        if inner is None:
            return None
        out = {}
        for labels, coef in inner.items():
            for j, l, r in zip(labels, self.left, self.right):
                coef = coef * complex(group.character(j, l) * group.character(j, r))
            out[labels] = coef
        return out

    def to_json(self, group):
        return {
            "op": "twist",
            "left": [group.element_to_json(v) for v in self.left],
            "right": [group.element_to_json(v) for v in self.right],
            "args": [self.arg.to_json(group)],
        }


def expr_from_json(obj: dict, group: Group) -> Expression:
    op = obj.get("op")
    args = lambda: [expr_from_json(a, group) for a in obj.get("args", [])]  # noqa: E731
    if op == "const":
        return Const(complex(obj.get("re", 0.0), obj.get("im", 0.0)))
    if op == "charprod":
        return CharProd(tuple(group.check_label(x) for x in obj["labels"]))
    if op == "table":
        n = int(obj["slots"]) if "slots" in obj else len(obj["entries"][0][0])
        entries = [(tuple(k), _complex(v)) for k, v in obj["entries"]]
        return Table.from_entries(group, n, entries)
    if op == "matpoly":
        terms = []
        for t in obj["terms"]:
            factors = [
                (f["slot"], f["entry"][0], f["entry"][1], f["part"], f.get("power", 1))
                for f in t["factors"]
            ]
            terms.append((_complex(t["coef"]), factors))
        return MatPoly(int(obj["slots"]), tuple(terms))
    if op == "add":
        return Add(tuple(args()))
    if op == "mul":
        return Mul(tuple(args()))
    if op == "conj":
        (a,) = args()
        return Conj(a)
    if op == "subst":
        (a,) = args()
        return Subst(a, obj["words"], int(obj["slots"]))
    if op == "twist":
        (a,) = args()
        return Twist(
            a,
            tuple(group.element_from_json(v) for v in obj["left"]),
            tuple(group.element_from_json(v) for v in obj["right"]),
        )
    raise ValueError(f"unknown expression op {op!r}")


def _complex(v) -> complex:
    if isinstance(v, dict):
        return complex(v.get("re", 0.0), v.get("im", 0.0))
    return complex(v)


# -- cylindrical functions -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class CylFunction:
    label: TameSubgroupoid
    expr: Expression
    group: Group

    def __post_init__(self):
        if self.expr.arity is not None and self.expr.arity != len(self.label):
            raise ValueError(
                f"expression arity {self.expr.arity} != {len(self.label)} generators of {self.label}"
            )
        _check_labels(self.expr, self.group)

    @property
    def n_slots(self) -> int:
        return len(self.label)

    def on_values(self, values: Sequence) -> np.ndarray:
        return self.expr.evaluate(self.group, list(values))

    def __add__(self, other: "CylFunction") -> "CylFunction":
        a, b = common_refinement(self, other)
        return CylFunction(a.label, Add((a.expr, b.expr)), self.group)

    def __mul__(self, other: "CylFunction") -> "CylFunction":
        a, b = common_refinement(self, other)
        return CylFunction(a.label, Mul((a.expr, b.expr)), self.group)

    def conj(self) -> "CylFunction":
        return CylFunction(self.label, Conj(self.expr), self.group)

    def to_json(self) -> dict:
        return {"subgroupoid": self.label.to_json(), "expr": self.expr.to_json(self.group)}


def _check_labels(expr: Expression, group: Group):
    if isinstance(expr, CharProd):
        for x in expr.labels:
            group.check_label(x)
    for child in getattr(expr, "args", ()) or ():
        _check_labels(child, group)
    if hasattr(expr, "arg"):
        _check_labels(expr.arg, group)


def eval_cyl(f: CylFunction, conn: AmbientConnection) -> np.ndarray:
    if conn.group != f.group:
        raise KindMismatch(f"connection in {conn.group} for a function on {f.group}")
    chart = coordinates(conn, f.label)
    out = f.on_values(chart.values)
    return np.broadcast_to(out, batch_shape(f.group, chart.values[0])) if np.ndim(out) == 0 else out


def pullback(f: CylFunction, Lp: TameSubgroupoid) -> CylFunction:
    d = subgroupoid_leq(f.label, Lp)
    if d is None:
        raise NotComparable(f"{f.label} is not a subgroupoid of {Lp}")
    if f.label == Lp:
        return f
    return CylFunction(Lp, Subst(f.expr, d.words, len(Lp)), f.group)


def common_refinement(f: CylFunction, h: CylFunction) -> tuple:
    """Pull both functions back to a shared level (identity when labels agree)."""
    if f.label == h.label:
        return f, h
    if subgroupoid_leq(f.label, h.label) is not None:
        return pullback(f, h.label), h
    if subgroupoid_leq(h.label, f.label) is not None:
        return f, pullback(h, f.label)
    top = atoms_subgroupoid(f.label.alphabet, f.label.support | h.label.support)
    return pullback(f, top), pullback(h, top)


def rewrite_over_paths(expr: Expression, paths: Sequence, group: Group, alphabet=None) -> CylFunction:
    """Express F(A(p_1), ..., A(p_k)) for arbitrary paths over independent edges."""
    words = []
    for p in paths:
        if not isinstance(p, PathWord):
            p = reduce(alphabet, p)
        words.append(p)
    if not words:
        raise ValueError("need at least one path")
    alph = words[0].alphabet
    if all(p.letters and is_simple(p) for p in words):
        edges = [Edge.of(p) for p in words]
        if is_independent(edges):
            return CylFunction(TameSubgroupoid(tuple(edges)), expr, group)
    support = frozenset().union(*(p.support for p in words)) or frozenset(alph.atom_ids)
    L = atoms_subgroupoid(alph, support)
    subst = []
    for p in words:
        w = decompose(p, L)
        if w is None:
            # identity word at a vertex not touched by the chosen atoms
            w = ()
        subst.append(w)
    return CylFunction(L, Subst(expr, tuple(subst), len(L)), group)


# -- sup norms -----------------------------------------------------------------


@dataclass(frozen=True)
class SupNorm:
    value: float
    method: str
    samples: int
    seed: int | None = None

    @property
    def is_lower_bound(self) -> bool:
        return self.method != "exact"


def sup_norm(f: CylFunction, method=Exact()) -> SupNorm:
    n = f.n_slots
    g = f.group
    if isinstance(method, Exact):
        if not g.is_finite:
            raise TooLargeForExact(f"exact sup-norm needs a finite group, not {g}")
        size = g.n**n
        if size > EXACT_LIMIT:
            raise TooLargeForExact(f"|G|^n = {size} exceeds {EXACT_LIMIT}")
        vals = np.broadcast_to(f.on_values(g.grid(n)), (size,))
        return SupNorm(float(np.max(np.abs(vals))), "exact", size)
    if isinstance(method, MonteCarlo):
        rng = substream(method.seed)
        slots = [g.sample(rng, method.samples) for _ in range(n)]
        vals = np.broadcast_to(f.on_values(slots), (method.samples,))
        return SupNorm(float(np.max(np.abs(vals))), "sampled", method.samples, method.seed)
    raise TypeError(f"unknown method {method!r}")
