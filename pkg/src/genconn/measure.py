"""Measures on the projective family: the uniform (Haar product) measure and
explicit finite families, with integration, pushforward, consistency
checks and L2 inner products.

Monte Carlo integration splits the sample budget over ``workers``
substreams derived from ``(seed, stream, worker)``; partial statistics are
merged in ascending worker order so results are bit-identical for a fixed
``(seed, samples, workers)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .cyl import EXACT_LIMIT, CharProd, Conj, CylFunction, Mul, Table, common_refinement, pullback
from .errors import KindMismatch, MissingLevel, NotComparable, NotFinite, TooLargeForExact
from .family import all_charts, project
from .groupoid import TameSubgroupoid, subgroupoid_leq
from .groups import Group, substream
from .methods import EXACT, Exact, MonteCarlo

CHUNK = 1 << 16
SIGMAS = 3.0
TABLE_TOL = 1e-12


@dataclass(frozen=True)
class Uniform:
    """The uniform measure: normalized Haar measure on every G^n."""

    kind = "uniform"


UNIFORM = Uniform()


@dataclass(frozen=True, eq=False)
class FiniteFamily:
    """Explicit probability tables on A_L = G^n, keyed by tame subgroupoid."""

    group: Group
    tables: Mapping

    def __post_init__(self):
        if not self.group.is_finite:
            raise NotFinite(f"finite families need a finite group, not {self.group}")
        clean = {}
        for L, t in self.tables.items():
            arr = np.asarray(t)
            if arr.shape != (self.group.n,) * len(L):
                raise ValueError(f"table for {L} has shape {arr.shape}")
            if arr.dtype != object:
                arr = arr.astype(float)
            if np.any(arr < 0):
                raise ValueError(f"table for {L} has negative mass")
            total = math.fsum(float(x) for x in arr.ravel())
            if abs(total - 1.0) > TABLE_TOL:
                raise ValueError(f"table for {L} has total mass {total}")
            clean[L] = arr
        object.__setattr__(self, "tables", clean)

    kind = "family"

    def level(self, L: TameSubgroupoid, strict: bool = False):
        """Return ``(label, table)`` for ``L`` or, unless strict, a finer level."""
        if L in self.tables:
            return L, self.tables[L]
        if not strict:
            for Lp, t in self.tables.items():
                if subgroupoid_leq(L, Lp) is not None:
                    return Lp, t
        raise MissingLevel(f"no table for {L}")


def haar_table(group: Group, n: int) -> np.ndarray:
    return np.full((group.order,) * n, 1.0 / group.order**n)


@dataclass(frozen=True)
class IntegralEstimate:
    mean: complex
    stderr: float
    samples: int
    method: str
    seed: int | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")
        if self.method == "exact" and self.stderr != 0:
            raise ValueError("exact estimates carry zero stderr")

    def within(self, value, sigmas: float = SIGMAS) -> bool:
        return abs(self.mean - value) <= sigmas * self.stderr

    def to_json(self) -> dict:
        return {
            "mean": {"re": float(self.mean.real), "im": float(self.mean.imag)},
            "stderr": float(self.stderr),
            "samples": int(self.samples),
            "method": self.method,
            "seed": self.seed,
            "workers": self.workers,
        }


def _exact_mean(values: np.ndarray) -> complex:
    # fsum is correctly rounded, hence independent of summation order
    re = math.fsum(np.real(values).ravel().tolist())
    im = math.fsum(np.imag(values).ravel().tolist())
    return complex(re, im)


def integrate(f: CylFunction, m=UNIFORM, method=EXACT, stream: int = 0) -> IntegralEstimate:
    """Integral of a cylindrical function against the measure ``m``."""
    g = f.group
    if isinstance(m, FiniteFamily):
        if m.group != g:
            raise KindMismatch(f"measure on {m.group}, function on {g}")
        L, table = m.level(f.label)
        if L != f.label:
            f = pullback(f, L)
        return _integrate_table(f, table, method, stream)
    if not isinstance(m, Uniform):
        raise TypeError(f"unknown measure {m!r}")
    n = f.n_slots
    if isinstance(method, Exact):
        if g.is_finite and g.n**n <= EXACT_LIMIT:
            vals = np.broadcast_to(f.on_values(g.grid(n)), (g.n**n,))
            return IntegralEstimate(_exact_mean(vals) / g.n**n, 0.0, g.n**n, "exact")
        shortcut = character_shortcut(f)
        if shortcut is not None:
            return IntegralEstimate(shortcut, 0.0, 0, "exact")
        raise TooLargeForExact(f"no exact route for this function on {g}^{n}")
    if isinstance(method, MonteCarlo):
        return _monte_carlo(lambda rng, k: [g.sample(rng, k) for _ in range(n)], f, method, stream)
    raise TypeError(f"unknown method {method!r}")


def character_shortcut(f: CylFunction) -> complex | None:
    """Uniform integral via character orthogonality, when the expression allows it."""
    g = f.group
    series = f.expr.char_series(g, f.n_slots)
    if series is None:
        return None
    trivial = (g.trivial_label(),) * f.n_slots
    return complex(series.get(trivial, 0j))


def _integrate_table(f: CylFunction, table: np.ndarray, method, stream: int) -> IntegralEstimate:
    g = f.group
    n = f.n_slots
    if isinstance(method, Exact):
        vals = np.broadcast_to(f.on_values(g.grid(n)), (g.n**n,))
        weights = np.asarray(table, dtype=float).ravel()
        return IntegralEstimate(_exact_mean(weights * vals), 0.0, g.n**n, "exact")
    if isinstance(method, MonteCarlo):
        p = np.asarray(table, dtype=float).ravel()
        shape = (g.n,) * n

        def draw(rng, k):
            flat = rng.choice(p.size, size=k, p=p)
            return [np.asarray(ix, dtype=np.int64) for ix in np.unravel_index(flat, shape)]

        return _monte_carlo(draw, f, method, stream)
    raise TypeError(f"unknown method {method!r}")


def _chunk_stats(values: np.ndarray) -> tuple:
    mean = complex(np.mean(values))
    dev = values - mean
    return values.size, mean, float(np.sum(dev.real**2 + dev.imag**2))


def _merge(a: tuple, b: tuple) -> tuple:
    na, ma, m2a = a
    nb, mb, m2b = b
    if na == 0:
        return b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, m2a + m2b + abs(delta) ** 2 * na * nb / n


def _monte_carlo(draw, f: CylFunction, method: MonteCarlo, stream: int) -> IntegralEstimate:
    total, workers = method.samples, method.workers
    counts = [total // workers + (1 if w < total % workers else 0) for w in range(workers)]

    def run(w: int) -> tuple:
        rng = substream(method.seed, w, stream)
        acc = (0, 0j, 0.0)
        left = counts[w]
        while left > 0:
            k = min(CHUNK, left)
            vals = np.broadcast_to(f.on_values(draw(rng, k)), (k,)).astype(complex)
            acc = _merge(acc, _chunk_stats(vals))
            left -= k
        return acc

    if workers == 1:
        parts = [run(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(workers)))
    acc = (0, 0j, 0.0)
    for part in parts:
        acc = _merge(acc, part)
    n, mean, m2 = acc
    stderr = math.sqrt(m2 / (n - 1)) / math.sqrt(n)
    return IntegralEstimate(mean, stderr, n, "mc", method.seed, workers)


def inner_product(f: CylFunction, h: CylFunction, m=UNIFORM, method=EXACT, stream: int = 0) -> IntegralEstimate:
    """<f, h> = integral of conj(f) h, on a common refinement."""
    a, b = common_refinement(f, h)
    integrand = CylFunction(a.label, Mul((Conj(a.expr), b.expr)), f.group)
    return integrate(integrand, m, method, stream)


def pushforward(table, L: TameSubgroupoid, Lp: TameSubgroupoid, group: Group) -> np.ndarray:
    """(p_{L,L'})_* of a probability table on A_{L'}."""
    if not group.is_finite:
        raise NotFinite(f"pushforward tables need a finite group, not {group}")
    if subgroupoid_leq(L, Lp) is None:
        raise NotComparable(f"{L} is not a subgroupoid of {Lp}")
    table = np.asarray(table)
    images = project(L, Lp, all_charts(group, Lp))
    shape = (group.n,) * len(L)
    flat = np.ravel_multi_index(tuple(np.asarray(v) for v in images.values), shape)
    bins: list = [[] for _ in range(int(np.prod(shape)))]
    for idx, mass in zip(flat.tolist(), table.ravel().tolist()):
        bins[idx].append(mass)
    exact = table.dtype == object
    out = [sum(b, Fraction(0)) if exact else math.fsum(b) for b in bins]
    return np.array(out, dtype=object if exact else float).reshape(shape)


def delta_table(group: Group, point: Sequence[int]) -> Table:
    arr = np.zeros((group.order,) * len(point))
    arr[tuple(point)] = 1.0
    return Table(arr)


@dataclass
class ConsistencyReport:
    coarse: TameSubgroupoid
    fine: TameSubgroupoid
    passed: bool
    max_discrepancy: float
    method: str
    checks: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "coarse": self.coarse.to_json(),
            "fine": self.fine.to_json(),
            "pass": self.passed,
            "max_discrepancy": self.max_discrepancy,
            "method": self.method,
            "checks": self.checks,
        }


def default_battery(group: Group) -> list:
    return {"su2": [Fraction(1, 2), Fraction(1)], "u1": [1, 2], "zn": [1]}[group.kind]


def check_consistency(
    m, L: TameSubgroupoid, Lp: TameSubgroupoid, group: Group, method=None, battery=None
) -> ConsistencyReport:
    """Compare  int p*_{L,L'} f dmu_{L'}  with  int f dmu_L  over a test set.

    Finite groups use every delta table on A_L (a spanning set, so this is
    exact equality of measures).  Lie groups under the uniform measure use a
    battery of character products and a 3-sigma Monte Carlo criterion.
    """
    if subgroupoid_leq(L, Lp) is None:
        raise NotComparable(f"{L} is not a subgroupoid of {Lp}")
    if group.is_finite:
        if isinstance(m, FiniteFamily):
            m.level(L, strict=True)
            m.level(Lp, strict=True)
        worst = 0.0
        checks = []
        for point in zip(*group.grid(len(L))):
            f = CylFunction(L, delta_table(group, point), group)
            lhs = integrate(pullback(f, Lp), m, EXACT).mean
            rhs = integrate(f, m, EXACT).mean
            d = abs(lhs - rhs)
            worst = max(worst, d)
            checks.append({"point": [int(x) for x in point], "lhs": lhs.real, "rhs": rhs.real})
        return ConsistencyReport(L, Lp, worst <= TABLE_TOL, worst, "exact", checks)
    if not isinstance(m, Uniform):
        raise NotFinite("explicit families are only supported on finite groups")
    if not isinstance(method, MonteCarlo):
        raise TooLargeForExact(f"consistency on {group} needs a Monte Carlo method")
    battery = default_battery(group) if battery is None else [group.check_label(x) for x in battery]
    n = len(L)
    triv = group.trivial_label()
    tests = []
    for label in battery:
        for i in range(n):
            labels = [triv] * n
            labels[i] = label
            tests.append(tuple(labels))
        if n > 1:
            tests.append((label,) * n)
    worst, ok, checks = 0.0, True, []
    for k, labels in enumerate(tests):
        f = CylFunction(L, CharProd(labels), group)
        lhs = integrate(pullback(f, Lp), m, method, stream=2 * k)
        rhs = integrate(f, m, method, stream=2 * k + 1)
        diff = abs(lhs.mean - rhs.mean)
        combined = math.hypot(lhs.stderr, rhs.stderr)
        passed = diff <= SIGMAS * combined
        ok = ok and passed
        worst = max(worst, diff)
        checks.append(
            {
                "labels": [str(x) for x in labels],
                "lhs": lhs.to_json(),
                "rhs": rhs.to_json(),
                "difference": diff,
                "combined_stderr": combined,
                "pass": passed,
            }
        )
    return ConsistencyReport(L, Lp, ok, worst, "mc", checks)
