import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from genconn import catalog
from genconn.cyl import CharProd, CylFunction, MatPoly, Table, eval_cyl
from genconn.errors import AlphabetMismatch
from genconn.family import AmbientConnection, evaluate
from genconn.groupoid import TameSubgroupoid, all_tame_subgroupoids, edge, word
from genconn.groups import Group, substream
from genconn.measure import delta_table
from genconn.methods import MonteCarlo
from genconn.symmetry import (
    GaugeTransformation,
    GroupoidAutomorphism,
    act,
    act_on_function,
    all_automorphisms,
    automorphism_act,
    gauge_act,
    invariance_report,
    unitarity_report,
)

Z3, U1, SU2 = Group.zn(3), Group.u1(), Group.su2()
HALF = Fraction(1, 2)


def random_gauge(G, alphabet, rng):
    return GaugeTransformation(G, {v: G.sample(rng) for v in alphabet.vertices})


def theta_swap():
    A = catalog.theta()
    return GroupoidAutomorphism(A, {}, {"a": ("b", 1), "b": ("a", 1)})


def test_gauge_example():
    A = catalog.pair()
    conn = AmbientConnection(Z3, A, {"a": 1, "b": 0})
    g = GaugeTransformation(Z3, {"v1": 2})
    out = gauge_act(g, conn)
    assert out["a"] == (2 + 1) % 3 and out["b"] == (0 - 2) % 3
    assert gauge_act(GaugeTransformation(Z3, {}), conn).equals(conn)


@pytest.mark.parametrize("G", [Z3, U1, SU2], ids=str)
def test_gauge_endpoint_law(G, rng):
    A = catalog.triangle()
    conn = AmbientConnection.sample(G, A, rng)
    g = random_gauge(G, A, rng)
    moved = gauge_act(g, conn)
    for tokens in (["a"], ["a", "b"], ["~c", "~b"], ["a", "b", "c"], ["b", "c", "a", "b"]):
        p = word(A, tokens)
        want = G.mul(G.mul(g.at(p.target), evaluate(conn, p)), G.inv(g.at(p.source)))
        assert G.all_close(evaluate(moved, p), want)


@pytest.mark.parametrize("G", [Z3, SU2], ids=str)
def test_gauge_group_action(G, rng):
    A = catalog.triangle()
    conn = AmbientConnection.sample(G, A, rng)
    g, h = random_gauge(G, A, rng), random_gauge(G, A, rng)
    assert gauge_act(h, gauge_act(g, conn)).equals(gauge_act(h * g, conn))
    assert gauge_act(g.inverse(), gauge_act(g, conn)).equals(conn)


def test_automorphism_swap_example():
    A = catalog.theta()
    F = theta_swap()
    conn = AmbientConnection(Z3, A, {"a": 1, "b": 2, "c": 0})
    out = automorphism_act(F, conn)
    assert (out["a"], out["b"], out["c"]) == (2, 1, 0)
    assert F.apply(word(A, ["a", "~c"])) == word(A, ["b", "~c"])


def test_automorphism_validation():
    A = catalog.path3()
    with pytest.raises(AlphabetMismatch):
        GroupoidAutomorphism(A, {}, {"a": ("b", 1), "b": ("a", 1)})
    with pytest.raises(AlphabetMismatch):
        GroupoidAutomorphism(A, {"v0": "v1"}, {})


@pytest.mark.parametrize("name", sorted(catalog.THREE_ATOM))
def test_automorphisms_act_as_a_group(name, rng):
    A = catalog.THREE_ATOM[name]()
    autos = all_automorphisms(A)
    assert sum(F.is_identity() for F in autos) == 1
    conn = AmbientConnection.sample(SU2, A, rng)
    paths = [word(A, [a]) for a in A.atom_ids]
    for F, G in itertools.product(autos, repeat=2):
        assert automorphism_act(F, automorphism_act(G, conn)).equals(automorphism_act(F @ G, conn))
    for F in autos:
        moved = automorphism_act(F, conn)
        for p in paths:  # (F A)(F p) = A(p)
            assert SU2.all_close(evaluate(moved, F.apply(p)), evaluate(conn, p))
        assert (F @ F.inverse()).is_identity()
        assert GroupoidAutomorphism.from_json(A, json.loads(json.dumps(F.to_json()))).atom_map == F.atom_map


def test_automorphism_counts():
    # theta: swap endpoints (with reversal) x permute the three parallel atoms
    assert len(all_automorphisms(catalog.theta())) == 12
    assert len(all_automorphisms(catalog.triangle())) == 6
    assert len(all_automorphisms(catalog.path3())) == 2


@pytest.mark.parametrize("G", [Z3, SU2], ids=str)
@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=15)
def test_action_on_functions_intertwines(G, seed):
    """(U_T f)(T A) = f(A) for gauges and automorphisms."""
    A = catalog.theta()
    rng = substream(seed)
    conn = AmbientConnection.sample(G, A, rng, size=8)
    L = TameSubgroupoid((edge(A, ["a"]), edge(A, ["~b"])))
    f = CylFunction(L, MatPoly(2, [(1.0, [(0, 0, 0, "re", 1), (1, 0, 0, "im", 1)]), (2j, [(1, 0, 0, "re", 2)])]), G)
    autos = all_automorphisms(A)
    transforms = [random_gauge(G, A, rng), autos[int(rng.integers(len(autos)))]]
    for T in transforms:
        lhs = eval_cyl(act_on_function(T, f), act(T, conn))
        assert np.allclose(lhs, eval_cyl(f, conn))


def test_exact_invariance_over_all_delta_tables():
    A = catalog.theta()
    rng = np.random.default_rng(4)
    transforms = all_automorphisms(A) + [random_gauge(Z3, A, rng) for _ in range(3)]
    for L in all_tame_subgroupoids(A):
        for point in itertools.product(range(3), repeat=len(L)):
            f = CylFunction(L, delta_table(Z3, point), Z3)
            for T in transforms:
                rep = invariance_report(f, T)
                assert rep.passed and rep.lhs.mean == rep.rhs.mean


def test_su2_invariance_mc():
    A = catalog.theta()
    L = TameSubgroupoid((edge(A, ["a"]), edge(A, ["b"])))
    f = CylFunction(L, MatPoly(2, [(1.0, [(0, 0, 0, "re", 2), (1, 0, 1, "im", 1)]), (1.0, [(1, 1, 1, "re", 1)])]), SU2)
    m = MonteCarlo(10**6, seed=0)
    g = GaugeTransformation(SU2, {"x": (0.0, 1.0, 0.0, 0.0), "y": (0.6, 0.0, 0.8, 0.0)})
    for T in (theta_swap(), g):
        rep = invariance_report(f, T, m)
        assert rep.passed, (rep.discrepancy, rep.lhs.stderr)


def test_u1_exact_gauge_invariance_via_series():
    A = catalog.pair()
    L = TameSubgroupoid((edge(A, ["a"]), edge(A, ["b"])))
    f = CylFunction(L, CharProd((1, -1)), U1)
    g = GaugeTransformation(U1, {"v1": 0.3})
    h = act_on_function(g, f)
    rep = invariance_report(f, g)
    assert rep.passed and rep.lhs.method == "exact"
    rep = unitarity_report(f, f, g)
    assert rep.passed and rep.rhs.mean == pytest.approx(1)
    assert h is not f


def test_unitarity_exact_and_mc():
    A = catalog.theta()
    L = TameSubgroupoid((edge(A, ["a"]), edge(A, ["c"])))
    rng = np.random.default_rng(2)
    f = CylFunction(L, Table(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))), Z3)
    h = CylFunction(L, Table(rng.normal(size=(3, 3))), Z3)
    for T in all_automorphisms(A) + [random_gauge(Z3, A, rng)]:
        assert unitarity_report(f, h, T).passed
    k = CylFunction(L, CharProd((HALF, 1)), SU2)
    rep = unitarity_report(k, k, random_gauge(SU2, A, rng), MonteCarlo(10**5, seed=1))
    assert rep.passed
