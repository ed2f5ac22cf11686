import itertools
from fractions import Fraction

import numpy as np
import pytest

from genconn import catalog
from genconn.basis import gram_matrix, make_spin_network, wilson_loop
from genconn.cyl import eval_cyl
from genconn.errors import InvalidLabel, NotClosed
from genconn.family import AmbientConnection, evaluate
from genconn.groupoid import TameSubgroupoid, edge, word
from genconn.groups import Group
from genconn.measure import integrate
from genconn.methods import MonteCarlo
from genconn.symmetry import GaugeTransformation, gauge_act

U1, SU2 = Group.u1(), Group.su2()
HALF = Fraction(1, 2)


def two_edges(A=None):
    A = A or catalog.pair()
    return TameSubgroupoid((edge(A, ["a"]), edge(A, ["b"])))


def test_spin_network_u1_example():
    L = two_edges()
    f = make_spin_network(L, (1, 2), U1)
    conn = AmbientConnection(U1, L.alphabet, {"a": 0.4, "b": 1.1})
    assert eval_cyl(f, conn) == pytest.approx(np.exp(1j * (0.4 + 2 * 1.1)))
    assert f.nontrivial == {0: 1, 1: 2}
    with pytest.raises(InvalidLabel):
        make_spin_network(L, (1,), U1)


def test_wilson_loop_examples(rng):
    A = catalog.triangle()
    loop = word(A, ["a", "b", "c"])
    for G in (Group.zn(4), U1, SU2):
        j = HALF if G is SU2 else 1
        W = wilson_loop(loop, j, G)
        conn = AmbientConnection.sample(G, A, rng, size=20)
        assert np.allclose(eval_cyl(W, conn), G.character(j, evaluate(conn, loop)))
        g = GaugeTransformation(G, {v: G.sample(rng) for v in A.vertices})
        single = AmbientConnection.sample(G, A, rng)
        assert eval_cyl(W, gauge_act(g, single)) == pytest.approx(eval_cyl(W, single))
    with pytest.raises(NotClosed):
        wilson_loop(word(A, ["a", "b"]), 1, U1)


@pytest.mark.parametrize("N", [2, 3, 5])
def test_wilson_loop_moments_zn(N):
    """On a Z_N loop: E[W_j] = [j = 0] and <W_j, W_k> = [j = k]."""
    G = Group.zn(N)
    A = catalog.loop_and_arc()
    loop = word(A, ["a", "b", "~b", "~a", "l"])
    for j, k in itertools.product(range(N), repeat=2):
        Wj, Wk = wilson_loop(loop, j, G), wilson_loop(loop, k, G)
        assert integrate(Wj).mean == pytest.approx(float(j == 0))
        assert integrate(Wj.conj() * Wk).mean == pytest.approx(float(j == k), abs=1e-12)


def test_gram_u1_exact_identity():
    L = two_edges()
    labels = [(0, 0), (1, 0), (0, -1), (2, 1), (-1, 3)]
    funcs = [make_spin_network(L, l, U1) for l in labels]
    gram = gram_matrix(funcs)
    for i, j in itertools.product(range(len(funcs)), repeat=2):
        assert gram[i][j].mean == float(i == j) and gram[i][j].method == "exact"


def test_gram_su2_exact_and_mc():
    L = two_edges()
    labels = [(0, 0), (HALF, 0), (0, 1), (HALF, HALF)]
    funcs = [make_spin_network(L, l, SU2) for l in labels]
    exact = gram_matrix(funcs)
    mc = gram_matrix(funcs, MonteCarlo(10**6, seed=5))
    for i, j in itertools.product(range(len(funcs)), repeat=2):
        assert exact[i][j].mean == pytest.approx(float(i == j), abs=1e-12)
        assert mc[i][j].within(float(i == j)), (i, j, mc[i][j])
