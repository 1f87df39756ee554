import random
from fractions import Fraction

import pytest

from tqmhom.commutativity import check_commutativity
from tqmhom.complexes import PreconditionError
from tqmhom.graded import GradedMap
from tqmhom.saito import (CohClass, SaitoData, SectionS, c_operators, check_good_section, connection_in_gm_frame,
                          constant_connection, find_good_section, frame_connection, gm_frame, gm_transport,
                          milnor_ring, multiplication_operator, reduce_in_brieskorn, saito_differential,
                          saito_transport, z_dependence)
from tqmhom.series import Series

from oracles import series_dict, sympy_reduce


def at_t0(x: GradedMap, data):
    return x.part(data.params, 0)


def perturbed(data, scale=1):
    """``S = id + z t_2 E_12``: a z-linear perturbation of the monomial section."""
    E = GradedMap.from_series(data.space, data.space, 0,
                              [[0, data.z() * data.t(2) * scale] + [0] * (data.mu - 2)]
                              + [[0] * data.mu for _ in range(data.mu - 1)], data.ring)
    return SectionS(data, GradedMap.identity(data.space, data.ring) + E)


@pytest.fixture(scope="module")
def d3():
    return SaitoData(3, 3)


# Milnor ring ------------------------------------------------------------------------

def test_milnor_n3():
    mr = milnor_ring(3)
    assert mr["mu"] == 2 and mr["basis"] == ["1", "x"]
    assert mr["table"][1][1] == [0, 0]


def test_milnor_n4():
    t = milnor_ring(4)["table"]
    assert t[2][2] == [0, 0, 0] and t[1][2] == [0, 0, 0]
    assert t[1][1] == [0, 0, 1]


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_milnor_unit_and_dimension(n):
    mr = milnor_ring(n)
    assert mr["mu"] == n - 1
    for b in range(n - 1):
        e = [0] * (n - 1)
        e[b] = 1
        assert mr["table"][0][b] == e == mr["table"][b][0]
    with pytest.raises(ValueError):
        milnor_ring(2)


# reduction --------------------------------------------------------------------------

@pytest.mark.parametrize("n", [3, 4, 5])
def test_reduction_matches_linear_system(n):
    data = SaitoData(n, 3)
    for m in range(0, 11):
        got = reduce_in_brieskorn([0] * m + [1], data)
        want = sympy_reduce(n, m, data.order + 2)
        assert [series_dict(c, data) for c in got.coeffs] == want, m


def test_reduction_basics(d3):
    assert reduce_in_brieskorn([2, 5], d3) == CohClass(d3, (Series.const(d3.ring, 2), Series.const(d3.ring, 5)))
    f, g = [1, 0, 3, -1], [0, 2, 0, 0, 1]
    h = [a + b for a, b in zip(f + [0], g)]
    assert reduce_in_brieskorn(h, d3) == reduce_in_brieskorn(f, d3) + reduce_in_brieskorn(g, d3)
    # x² dx ≡ -(t2/3) dx for n = 3, and 0 at t = 0
    x2 = reduce_in_brieskorn([0, 0, 1], d3)
    assert x2.coeffs[0] == d3.t(2) * Fraction(-1, 3) and x2.coeffs[1].is_zero()
    assert reduce_in_brieskorn([0, 0, 1], d3, at_t=0).is_zero()
    with pytest.raises(ValueError):
        reduce_in_brieskorn([0] * (d3.x_bound + 1) + [1], d3)


@pytest.mark.parametrize("seed", range(4))
def test_image_of_differential_reduces_to_zero(seed):
    rng = random.Random(seed)
    data = SaitoData(rng.choice([3, 4, 5]), 2)
    g = [Fraction(rng.randint(-3, 3)) for _ in range(5)]
    assert reduce_in_brieskorn(saito_differential(g, data), data).is_zero()


# C operators ------------------------------------------------------------------------

@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_c_operators_commute(n):
    data = SaitoData(n, 2)
    C = c_operators(data)
    assert len(C) == n - 1
    assert C[0] == GradedMap.identity(data.space, data.t_ring)
    for j in range(len(C)):
        for k in range(j + 1, len(C)):
            assert C[j] @ C[k] == C[k] @ C[j]


def test_c2_nilpotent_at_zero(d3):
    C2 = c_operators(d3)[1].part(d3.params, 0)
    assert not C2.is_zero() and (C2 @ C2).is_zero()


# Gauss-Manin frame ------------------------------------------------------------------

@pytest.mark.parametrize("n", [3, 4])
def test_gm_frame_first_orders(n):
    data = SaitoData(n, 2)
    M = gm_frame(data)
    assert at_t0(M, data) == GradedMap.identity(data.space, data.ring)
    want = None
    for k in range(1, data.mu + 1):
        Phi0 = at_t0(multiplication_operator(data, k, at_z0=False), data)
        term = Phi0.scale(data.t(k) * data.z(-1))
        want = term if want is None else want + term
    assert M.part(data.params, 1) == -want


@pytest.mark.parametrize("n,order", [(3, 3), (4, 2)])
def test_gm_frame_is_flat(n, order):
    data = SaitoData(n, order)
    A = frame_connection(gm_frame(data), data)
    for p in data.params:
        assert A[p].below(data.params, data.order + 2).is_zero()


# transport --------------------------------------------------------------------------

def test_transport_zero_step(d3):
    h = reduce_in_brieskorn([1, 2], d3)
    S = SectionS.monomial(d3)
    assert saito_transport(S, d3, {2: 0}, h) == h
    assert gm_transport(d3, {}, h) == h


def test_transport_of_dx(d3):
    S = SectionS.monomial(d3)
    out = saito_transport(S, d3, {2: 1}, [1])
    assert out.min_z_order() == 0
    assert out == CohClass(d3, (Series.const(d3.ring, 1), Series(d3.ring)))
    gm = gm_transport(d3, {2: 1}, [1])
    assert gm.coeffs[1] == -d3.z(-1)


@pytest.mark.parametrize("k,h", [(2, [1]), (2, [0, 1]), (1, [3, -1])])
def test_transport_difference_is_c_action(d3, k, h):
    S = SectionS.monomial(d3)
    cls = reduce_in_brieskorn(h, d3)
    diff = saito_transport(S, d3, {k: 1}, cls) - gm_transport(d3, {k: 1}, cls)
    C = multiplication_operator(d3, k)
    v = (C @ cls.vector()).scale(d3.z(-1))
    assert diff == CohClass(d3, tuple(v.entry(a, 0) for a in range(d3.mu)))


def test_section_must_be_identity_at_z0(d3):
    with pytest.raises(PreconditionError):
        SectionS(d3, GradedMap.identity(d3.space, d3.ring).scale(2))
    with pytest.raises(ValueError):
        SectionS(d3, GradedMap.identity(d3.space, d3.ring).scale(1 + d3.z(-1)))


# good sections ------------------------------------------------------------------------

def test_connection_at_t0(d3):
    for S in (SectionS.monomial(d3), perturbed(d3)):
        A = connection_in_gm_frame(S, d3)
        for k, C in enumerate(c_operators(d3), start=1):
            assert A[f"t{k}"].part(d3.params, 0) == C.part(d3.params, 0).over(d3.ring)


@pytest.mark.parametrize("n,order", [(3, 3), (4, 2)])
def test_monomial_section_is_good(n, order):
    data = SaitoData(n, order)
    S = SectionS.monomial(data)
    rep = check_good_section(S, data)
    assert rep.passed
    A = constant_connection(connection_in_gm_frame(S, data))
    assert check_commutativity(A, data.order).passed


def test_perturbed_section_is_not_good(d3):
    S = perturbed(d3)
    A = connection_in_gm_frame(S, d3)
    dep = z_dependence(A)
    assert any(not x.below(d3.params, d3.order + 1).is_zero() for x in dep.values())
    assert check_good_section(S, d3).failed()[0] == "Ã z-independent"
    # constant matrices at t-order 0: dA has no order-0 part
    assert check_commutativity(A, 1)["dA = 0"].passed


def test_find_good_section_n3(d3):
    res = find_good_section(d3)
    assert res.found
    assert res.section.matrix == SectionS.monomial(d3).matrix
    assert find_good_section(d3, 0).section.matrix == SectionS.monomial(d3).matrix


def test_find_good_section_n4():
    data = SaitoData(4, 2)
    res = find_good_section(data)
    assert res.found and check_good_section(res.section, data).passed
