import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from genconn import catalog
from genconn.cyl import CharProd, Const, CylFunction, MatPoly, Table, pullback
from genconn.errors import MissingLevel, TooLargeForExact
from genconn.groupoid import (
    TameSubgroupoid,
    all_tame_subgroupoids,
    atoms_subgroupoid,
    edge,
    nested_pairs,
)
from genconn.groups import Group
from genconn.measure import (
    UNIFORM,
    FiniteFamily,
    check_consistency,
    haar_table,
    inner_product,
    integrate,
    pushforward,
)
from genconn.methods import EXACT, MonteCarlo

Z2, Z3, U1, SU2 = Group.zn(2), Group.zn(3), Group.u1(), Group.su2()
HALF = Fraction(1, 2)


def two_edges():
    A = catalog.pair()
    return A, TameSubgroupoid((edge(A, ["a"]), edge(A, ["b"])))


def test_integrate_constant_and_indicator():
    A, L = two_edges()
    for G in (Z2, Z3, U1, SU2):
        assert integrate(CylFunction(L, Const(1), G)).mean == 1
    equal = CylFunction(L, Table(np.eye(2)), Z2)
    est = integrate(equal)
    assert est.mean == 0.5 and est.stderr == 0 and est.method == "exact"


def test_su2_character_norm_mc():
    A, L = two_edges()
    e = TameSubgroupoid((edge(A, ["a"]),))
    chi = CylFunction(e, CharProd((HALF,)), SU2)
    est = integrate(chi.conj() * chi, method=MonteCarlo(10**6, seed=0))
    assert est.samples == 10**6
    assert est.within(1.0)
    assert est.stderr < 2e-3


@pytest.mark.parametrize("N", [2, 3, 5])
def test_character_shortcut_matches_enumeration(N):
    """Label arithmetic on Z_N against brute-force averaging over G^2."""
    G = Group.zn(N)
    _, L = two_edges()
    for j1, j2, k1, k2 in itertools.product(range(N), repeat=4):
        f = CylFunction(L, CharProd((j1, j2)), G)
        h = CylFunction(L, CharProd((k1, k2)), G)
        series = (f.conj() * h).expr.char_series(G, 2)
        via_series = series.get((0, 0), 0)
        brute = np.mean(np.conj(f.on_values(G.grid(2))) * h.on_values(G.grid(2)))
        assert abs(via_series - brute) < 1e-12
        assert abs(via_series - float(j1 == k1 and j2 == k2)) < 1e-12


def test_su2_exact_integrals():
    _, L = two_edges()
    assert integrate(CylFunction(L, CharProd((HALF, 0)), SU2)).mean == 0
    f = CylFunction(L, CharProd((HALF, 1)), SU2)
    assert integrate(f.conj() * f).mean == pytest.approx(1)
    # chi_1/2^2 = chi_0 + chi_1 on each slot
    g = CylFunction(L, CharProd((HALF, HALF)), SU2)
    assert integrate(g * g).mean == pytest.approx(1)
    with pytest.raises(TooLargeForExact):
        integrate(CylFunction(L, MatPoly(2, [(1.0, [(0, 0, 0, "re", 2)])]), SU2))


@pytest.mark.parametrize("G", [Z2, Z3], ids=str)
def test_generator_order_and_orientation(G, alphabet3):
    for L in all_tame_subgroupoids(alphabet3):
        n = len(L)
        f = CylFunction(L, Table(np.random.default_rng(n).normal(size=(G.n,) * n)), G)
        base = integrate(f).mean
        for perm in itertools.permutations(range(n)):
            Lp = L.permuted(perm)
            vals = np.transpose(f.expr.values, perm)
            assert integrate(CylFunction(Lp, Table(vals), G)).mean == base
        for signs in itertools.product((1, -1), repeat=n):
            Lp = L.reoriented(list(signs))
            vals = f.expr.values
            for axis, s in enumerate(signs):
                if s < 0:  # relabel by g -> g^-1
                    vals = np.take(vals, (-np.arange(G.n)) % G.n, axis=axis)
            assert integrate(CylFunction(Lp, Table(vals), G)).mean == base


@pytest.mark.parametrize("G", [Z2, Z3], ids=str)
def test_pullback_well_defined(G, alphabet3):
    for L, Lp, _ in nested_pairs(all_tame_subgroupoids(alphabet3)):
        f = CylFunction(L, Table(np.random.default_rng(1).normal(size=(G.n,) * len(L))), G)
        assert abs(integrate(pullback(f, Lp)).mean - integrate(f).mean) < 1e-12


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_positivity(seed):
    _, L = two_edges()
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    f = CylFunction(L, Table(vals), Z3)
    assert integrate(f.conj() * f).mean.real >= 0
    assert integrate(f.conj() * f).mean.imag == pytest.approx(0, abs=1e-12)


def test_finite_family_normalization_and_validation():
    A, L = two_edges()
    fam = FiniteFamily(Z2, {L: haar_table(Z2, 2)})
    assert integrate(CylFunction(L, Const(1), Z2), fam).mean == pytest.approx(1)
    with pytest.raises(ValueError):
        FiniteFamily(Z2, {L: np.full((2, 2), 0.3)})
    with pytest.raises(ValueError):
        FiniteFamily(Z2, {L: np.array([[1.5, -0.5], [0, 0]])})
    e = TameSubgroupoid((edge(A, ["a", "b"]),))
    with pytest.raises(MissingLevel):
        fam.level(e, strict=True)
    # non-strict lookup integrates through the finer level
    f = CylFunction(e, Table(np.array([1.0, 0.0])), Z2)
    assert integrate(f, fam).mean == pytest.approx(0.5)


@pytest.mark.parametrize("workers", [1, 3])
def test_mc_reproducible(workers):
    _, L = two_edges()
    f = CylFunction(L, CharProd((HALF, 1)), SU2)
    m = MonteCarlo(20_000, seed=11, workers=workers)
    a, b = integrate(f, method=m), integrate(f, method=m)
    assert a.mean == b.mean and a.stderr == b.stderr
    assert a.samples == 20_000 and a.workers == workers
    c = integrate(f, method=MonteCarlo(20_000, seed=12, workers=workers))
    assert c.mean != a.mean


def test_mc_against_finite_family():
    A, L = two_edges()
    table = np.array([[0.7, 0.1], [0.1, 0.1]])
    fam = FiniteFamily(Z2, {L: table})
    f = CylFunction(L, Table(np.array([[1.0, 2.0], [3.0, 4.0]])), Z2)
    exact = integrate(f, fam).mean
    assert exact == pytest.approx(0.7 + 0.2 + 0.3 + 0.4)
    est = integrate(f, fam, MonteCarlo(50_000, seed=2))
    assert est.within(exact)


def test_consistency_uniform_and_biased():
    A = catalog.pair()
    top = atoms_subgroupoid(A)
    e = TameSubgroupoid((edge(A, ["a", "b"]),))
    rep = check_consistency(UNIFORM, e, top, Z2)
    assert rep.passed and rep.max_discrepancy == 0
    biased = FiniteFamily(Z2, {top: np.array([[0.7, 0.1], [0.1, 0.1]]), e: np.array([0.5, 0.5])})
    rep = check_consistency(biased, e, top, Z2)
    assert not rep.passed
    assert rep.max_discrepancy == pytest.approx(0.3)
    fixed = FiniteFamily(Z2, {top: np.array([[0.7, 0.1], [0.1, 0.1]]), e: np.array([0.8, 0.2])})
    assert check_consistency(fixed, e, top, Z2).passed


def test_consistency_su2_battery():
    A = catalog.path3()
    L = TameSubgroupoid((edge(A, ["a", "b"]), edge(A, ["c"])))
    Lp = atoms_subgroupoid(A)
    rep = check_consistency(UNIFORM, L, Lp, SU2, MonteCarlo(10**5, seed=3))
    assert rep.passed, rep.checks
    assert len(rep.checks) == 6 and rep.method == "mc"


def test_pushforward_examples():
    A = catalog.pair()
    top = atoms_subgroupoid(A)
    e = TameSubgroupoid((edge(A, ["a", "b"]),))
    haar = np.full((3, 3), Fraction(1, 9), dtype=object)
    assert list(pushforward(haar, e, top, Z3)) == [Fraction(1, 3)] * 3
    point = np.zeros((3, 3))
    point[1, 2] = 1.0
    assert list(pushforward(point, e, top, Z3)) == [1.0, 0.0, 0.0]
    flipped = e.reoriented([-1])
    assert list(pushforward(point, flipped, top, Z3)) == [1.0, 0.0, 0.0]
    point[1, 2], point[2, 2] = 0.0, 1.0
    assert list(pushforward(point, flipped, top, Z3)) == [0.0, 0.0, 1.0]


def test_pushforward_agrees_with_consistency_check(alphabet3):
    rng = np.random.default_rng(5)
    for L, Lp, _ in nested_pairs(all_tame_subgroupoids(alphabet3)):
        t = rng.random((2,) * len(Lp))
        t /= t.sum()
        fam = FiniteFamily(Z2, {Lp: t, L: pushforward(t, L, Lp, Z2)})
        assert check_consistency(fam, L, Lp, Z2).passed


def test_inner_product_examples():
    A, L = two_edges()
    e = TameSubgroupoid((edge(A, ["a"]),))
    f = CylFunction(e, CharProd((1,)), U1)
    h = CylFunction(L, CharProd((1, 0)), U1)
    assert inner_product(f, h).mean == pytest.approx(1)
    assert inner_product(f, CylFunction(L, CharProd((1, 1)), U1)).mean == 0
    t = CylFunction(e, Table(np.array([1.0, 1j])), Z2)
    assert inner_product(t, t).mean == pytest.approx(1)


@pytest.mark.parametrize("G", [Z3, Group.zn(4)], ids=str)
def test_series_through_subst_and_twist_matches_enumeration(G, alphabet3):
    """Exact series route (used for Lie groups) against brute force on Z_N."""
    rng = np.random.default_rng(9)
    for L, Lp, _ in nested_pairs(all_tame_subgroupoids(alphabet3)):
        labels = tuple(int(x) for x in rng.integers(G.n, size=len(L)))
        f = pullback(CylFunction(L, CharProd(labels), G), Lp)
        h = CylFunction(Lp, CharProd(tuple(int(x) for x in rng.integers(G.n, size=len(Lp)))), G)
        g = f.conj() * h
        series = g.expr.char_series(G, len(Lp))
        assert series is not None
        brute = integrate(g).mean
        assert abs(series.get((0,) * len(Lp), 0) - brute) < 1e-12
