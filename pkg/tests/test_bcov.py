import itertools
import random
from fractions import Fraction

import pytest

from tqmhom import linalg
from tqmhom.bcov import (BCOVData, StructureConstants, bcov_vector_field, check_oa, entrance_residual,
                         leaf_to_root_family, potentiality_residual, second_order_residual, structure_constants,
                         symmetry_residual, validate_bcov)
from tqmhom.commutativity import build_A, check_commutativity, validate_comm_family
from tqmhom.graded import GradedMap, GradedSpace
from tqmhom.models import polyvector_model
from tqmhom.saito import milnor_ring
from tqmhom.series import Series


def xn_model(n, cutoff=None):
    d = n - 1
    return polyvector_model([0] * d + [n], cutoff or 6 * d + 2)


@pytest.fixture(scope="module")
def x3():
    return xn_model(3).bcov()


def milnor_algebra(n):
    """``Q[x]/(x^{n-1})`` as BCOV data with Q = G = G₋ = 0 and W = B."""
    mr = milnor_ring(n)
    mu = mr["mu"]
    B = GradedSpace(tuple(mr["basis"]), (0,) * mu)
    m = linalg.zeros(mu, mu * mu)
    for a, b in itertools.product(range(mu), repeat=2):
        for c, x in enumerate(mr["table"][a][b]):
            m[c, a * mu + b] = x
    zero = GradedMap.zero(B, B, 1)
    idB = GradedMap.identity(B)
    return BCOVData(B, GradedMap(B.power(2), B, 0, {(): m}), zero, zero, zero, idB, idB, 0)


def odd_derivative(data, power):
    """``x^j θ -> j(j-1)..(j-power+1) x^{j-power}``: ∂_θ (power 0), ∂_x∂_θ, ∂_x²∂_θ."""
    B = data.B
    ne = B.parity.index(1)
    M = linalg.zeros(B.dim, B.dim)
    for j in range(B.dim - ne):
        if j >= power:
            c = 1
            for k in range(power):
                c *= j - k
            M[j - power, ne + j] = c
    return GradedMap(B, B, 1, {(): M})


def replace(data, **kw):
    fields = dict(B=data.B, m=data.m, Q=data.Q, G_minus=data.G_minus, G=data.G, i=data.i, pi=data.pi,
                  unit=data.unit, window=data.window)
    fields.update(kw)
    return BCOVData(**fields)


def test_polyvector_validation(x3):
    # everything but {G,G₋} = 0, which no division homotopy satisfies on this model
    assert validate_bcov(x3).failed() == ["{G,G₋} = 0"]
    assert second_order_residual(x3).is_zero()


def test_g_minus_is_the_bv_operator(x3):
    assert x3.G_minus == odd_derivative(x3, 1)


def test_first_order_g_minus(x3):
    rep = validate_bcov(replace(x3, G_minus=odd_derivative(x3, 0)))
    assert rep["G₋ second order"].passed
    assert "{G,G₋} = 0" in rep.failed()


def test_third_order_g_minus_fails_second_order_test(x3):
    data = replace(x3, G_minus=odd_derivative(x3, 2))
    assert not second_order_residual(data).is_zero()
    assert "G₋ second order" in validate_bcov(data).failed()


@pytest.mark.parametrize("n", [3, 4, 5])
def test_degenerate_algebra(n):
    data = milnor_algebra(n)
    assert validate_bcov(data).passed
    f = structure_constants(bcov_vector_field(data, 4))
    assert check_oa(f).passed


def test_quadratic_term_is_half_product(x3):
    v = bcov_vector_field(x3, 2)
    T1, T2 = v.params
    # x^a x^b in the basis 1, x: v^1 = T1²/2, v^2 = T1 T2
    assert v[0].coeffs == {(2, 0): Fraction(1, 2)}
    assert v[1].coeffs == {(1, 1): Fraction(1)}


def test_cubic_term_vanishes_on_polyvector(x3):
    # m(iT, iT) has no θ, so G₋ kills it and every tree with an edge vanishes
    v = bcov_vector_field(x3, 4)
    assert all(sum(e) == 2 for s in v.components for e in s.coeffs)


def test_cubic_term_by_hand():
    # a datum whose edge does not vanish: G and G₋ replaced by random odd maps
    rng = random.Random(3)
    data = xn_model(3, 8).bcov()
    B = data.B

    def rand_odd():
        M = linalg.zeros(B.dim, B.dim)
        for r, c in itertools.product(range(B.dim), repeat=2):
            if B.parity[r] != B.parity[c]:
                M[r, c] = Fraction(rng.randint(-2, 2))
        return M

    G, M = rand_odd(), rand_odd()
    data = replace(data, G=GradedMap(B, B, 1, {(): G}), G_minus=GradedMap(B, B, 1, {(): M}))
    v = bcov_vector_field(data, 3)
    m = data.m.coefficient()
    edge = -(G.dot(M))
    i, pi = data.i.coefficient(), data.pi.coefficient()

    def prod(x, y):
        return m.dot(linalg.kron(x.reshape(-1, 1), y.reshape(-1, 1))).reshape(-1)

    cubic = {}
    for a, b, c in itertools.product(range(2), repeat=3):
        x = prod(edge.dot(prod(i[:, a], i[:, b])), i[:, c]) * Fraction(1, 2)
        e = [0, 0]
        for k in (a, b, c):
            e[k] += 1
        cubic[tuple(e)] = cubic.get(tuple(e), 0) + pi.dot(x)
    assert any(any(x) for x in cubic.values())
    for k in range(2):
        got = {e: x for e, x in v[k].coeffs.items() if sum(e) == 3}
        want = {e: x[k] for e, x in cubic.items() if x[k]}
        assert got == want


@pytest.mark.parametrize("n", [3, 4])
def test_structure_constants_at_zero_are_milnor_table(n):
    data = xn_model(n).bcov()
    f = structure_constants(bcov_vector_field(data, 3))
    table = milnor_ring(n)["table"]
    mu = n - 1
    for a, b, c in itertools.product(range(mu), repeat=3):
        assert f.f[a][b][c].coeff((0,) * mu) == table[b][c][a]


def test_rescaled_coordinates(x3):
    # i -> i D, pi -> D^{-1} pi gives f'^a_bc = f^a_bc D_b D_c / D_a at T = 0
    D = [Fraction(2), Fraction(-3)]
    Dm = linalg.zeros(2, 2)
    Dinv = linalg.zeros(2, 2)
    for k in range(2):
        Dm[k, k], Dinv[k, k] = D[k], 1 / D[k]
    W = x3.W
    data = replace(x3, i=x3.i @ GradedMap(W, W, 0, {(): Dm}), pi=GradedMap(W, W, 0, {(): Dinv}) @ x3.pi)
    f = structure_constants(bcov_vector_field(x3, 3)).f
    g = structure_constants(bcov_vector_field(data, 3)).f
    z = (0, 0)
    for a, b, c in itertools.product(range(2), repeat=3):
        assert g[a][b][c].coeff(z) == f[a][b][c].coeff(z) * D[b] * D[c] / D[a]


@pytest.mark.parametrize("n", [3, 4])
def test_oa_on_polyvector(n):
    f = structure_constants(bcov_vector_field(xn_model(n).bcov(), 6))
    assert check_oa(f, 4).passed


def test_perturbed_structure_constants_fail(x3):
    f = structure_constants(bcov_vector_field(x3, 4))
    F = [[list(row) for row in block] for block in f.f]
    # 1·x = 2x breaks associativity: (1·1)·x = 2x but 1·(1·x) = 4x
    F[1][0][1] = F[1][0][1] + 1
    bad = StructureConstants(f.params, tuple(tuple(tuple(r) for r in blk) for blk in F), f.order)
    assert not check_oa(bad).passed
    with pytest.raises(ValueError):
        check_oa(f, f.order + 1)


def test_potentiality(x3):
    v = bcov_vector_field(x3, 4)
    assert potentiality_residual(v, [[0, 1], [1, 0]]) == {}
    v4 = bcov_vector_field(xn_model(4).bcov(), 3)
    assert potentiality_residual(v4, [[0, 0, 1], [0, 1, 0], [1, 0, 0]]) == {}
    assert potentiality_residual(v4, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]) != {}


def test_leaf_to_root_first_order(x3):
    fam = leaf_to_root_family(x3, 1)
    ring = fam.U.ring
    want = None
    for a, p in enumerate(fam.params):
        e = linalg.zeros(x3.B.dim, 1)
        e[a, 0] = 1
        vec = GradedMap(GradedSpace.unit(), x3.B, 0, {(): e})
        term = x3.left_multiplication(vec).over(ring).scale(Series.var(ring, p))
        want = term if want is None else want + term
    assert fam.U.below(fam.params, 2) == want


def test_leaf_to_root_pipeline(x3):
    fam = leaf_to_root_family(x3, 3)
    hodge = x3.hodge()
    assert validate_comm_family(hodge, fam).passed
    A = build_A(hodge, fam, 3)
    assert check_commutativity(A, 3).passed
    assert entrance_residual(x3, 3).is_zero()
    f = structure_constants(bcov_vector_field(x3, 5))
    assert symmetry_residual(A, f, 2) == {}
