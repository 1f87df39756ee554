import random

import pytest

from tqmhom.complexes import SDR, Complex, validate_sdr
from tqmhom import linalg
from tqmhom.graded import GradedMap, GradedSpace, StructuralError
from tqmhom.models import (dgla_linfty, eps_ring, random_closed_perturbation,
                           random_mc_instance, random_sdr)
from tqmhom.series import Series
from tqmhom.transfer import (LABELED, SHAPES, OperationSet, assemble, check_linfty, check_mc, check_order_two,
                             check_transferred_mc, lift_mc, one_leaf_chain, one_leaf_series, order_two_terms,
                             transferred_operations, tree_amplitude)
from tqmhom.trees import parse_tree

from oracles import gauge_mc, sdr_with_small_differential


def eps_phi(phi1, order):
    ring = eps_ring(order)
    return phi1.over(ring).scale(Series.var(ring, "eps")), ring


def identity_sdr(V):
    idV = GradedMap.identity(V)
    return SDR(Complex.zero(V), Complex.zero(V), idV, idV, GradedMap.zero(V, V, 1))


@pytest.fixture(scope="module")
def dgla():
    return dgla_linfty(random.Random(0), 2, 2, eps_order=3)


def test_y_tree_is_restricted_product(dgla):
    sdr, ops = dgla
    m2 = ops.get(2)
    amp = tree_amplitude(sdr, ops, parse_tree("(m2 L L)"))
    ring = m2.ring
    assert amp == sdr.pi.over(ring) @ m2 @ sdr.i.over(ring).tensor(sdr.i.over(ring))


def test_two_chain_sign():
    rng = random.Random(1)
    sdr = random_sdr(rng, 6, 2)
    phi, _ = eps_phi(random_closed_perturbation(rng, sdr), 3)
    ops = OperationSet(sdr.V.space, {1: phi})
    ring = phi.ring
    pi, h, i = (x.over(ring) for x in (sdr.pi, sdr.h, sdr.i))
    assert tree_amplitude(sdr, ops, parse_tree("(m1 (m1 L))")) == -(pi @ phi @ h @ phi @ i)


def test_zero_operations_give_zero(dgla):
    sdr, ops = dgla
    zero = OperationSet(ops.space, {n: GradedMap.zero(m.source, m.target, 1, m.ring) for n, m in ops.ops.items()})
    for text in ["(m2 L L)", "(m2 (m2 L L) L)", "(m1 (m2 L L))"]:
        assert tree_amplitude(sdr, zero, parse_tree(text)).is_zero()


def test_missing_arity_is_structural_error(dgla):
    sdr, ops = dgla
    with pytest.raises(StructuralError):
        tree_amplitude(sdr, OperationSet(ops.space, {2: ops.get(2)}), parse_tree("(m3 L L L)"))


def test_only_product_gives_restriction(dgla):
    sdr, ops = dgla
    only2 = OperationSet(ops.space, {2: ops.get(2)})
    A = transferred_operations(sdr, only2, 2, 1)
    ring = ops.ring
    i = sdr.i.over(ring)
    assert A.get(2) == sdr.pi.over(ring) @ ops.get(2) @ i.tensor(i)


@pytest.mark.parametrize("seed", range(4))
def test_one_leaf_order_three(seed):
    rng = random.Random(seed)
    sdr = random_sdr(rng, 7, 3)
    phi, ring = eps_phi(random_closed_perturbation(rng, sdr), 3)
    pi, h, i = (x.over(ring) for x in (sdr.pi, sdr.h, sdr.i))
    want = pi @ phi @ i - pi @ phi @ h @ phi @ i + pi @ phi @ h @ phi @ h @ phi @ i
    assert one_leaf_series(sdr, phi) == want
    assert one_leaf_chain(sdr, phi).component() == want


@pytest.mark.parametrize("seed", range(4))
def test_one_leaf_matches_geometric_series(seed):
    rng = random.Random(20 + seed)
    sdr = random_sdr(rng, 6, 2)
    phi, ring = eps_phi(random_closed_perturbation(rng, sdr), 5)
    pi, h, i = (x.over(ring) for x in (sdr.pi, sdr.h, sdr.i))
    one = GradedMap.identity(sdr.V.space, ring)
    assert one_leaf_series(sdr, phi) == pi @ phi @ (one + h @ phi).inverse() @ i


def test_zero_homotopy_returns_operations(dgla):
    _, ops = dgla
    sdr = identity_sdr(ops.space)
    A = transferred_operations(sdr, ops, 3, 3)
    assert A.get(1) == ops.get(1)
    assert A.get(2) == ops.get(2)
    assert A.get(3).is_zero()


@pytest.mark.parametrize("seed", range(2))
def test_shapes_and_labeled_modes_agree(seed):
    sdr, ops = dgla_linfty(random.Random(40 + seed), 2, 2, eps_order=3)
    a = transferred_operations(sdr, ops, 3, 3, SHAPES)
    b = transferred_operations(sdr, ops, 3, 3, LABELED)
    for n in range(1, 4):
        assert a.get(n) == b.get(n)


def test_contributions_are_reported(dgla):
    sdr, ops = dgla
    res = transferred_operations(sdr, ops, 2, 2, with_contributions=True)
    texts = [t for t, _ in res.contributions]
    assert "(m2 L L)" in texts and "(m1 L)" in texts
    total = sum((c for t, c in res.contributions if t.count("L") == 2), GradedMap.zero(
        res.operations.space.power(2), res.operations.space, 1, ops.ring))
    assert total == res.operations.get(2)


def test_mc_trivial_cases():
    rng = random.Random(5)
    sdr = random_sdr(rng, 6, 2)
    ring = eps_ring(4)
    zero = GradedMap.zero(sdr.V.space, sdr.V.space, 1, ring)
    assert check_mc(sdr.V, zero, 4).is_zero()
    # φ1 = {Q, Y} with Y = Q h Q' style square-zero: take φ1 = Q itself
    phi, _ = eps_phi(sdr.Q, 4)
    assert check_mc(sdr.V, phi, 4).is_zero()


def test_mc_order_two_from_equations():
    rng = random.Random(8)
    sdr, phis = random_mc_instance(rng, order=2)
    Q = sdr.Q
    assert (Q @ phis[0] + phis[0] @ Q).is_zero()
    assert Q @ phis[1] + phis[1] @ Q == -(phis[0] @ phis[0])
    assert check_mc(sdr.V, assemble(phis, eps_ring(2)), 2).is_zero()


@pytest.mark.parametrize("seed", range(4))
def test_random_mc_transfers_through_order_six(seed):
    rng = random.Random(100 + seed)
    sdr, phis = random_mc_instance(rng, order=6)
    assert validate_sdr(sdr).passed
    phi = assemble(phis, eps_ring(6))
    assert check_mc(sdr.V, phi, 6).is_zero()
    assert check_transferred_mc(sdr, phi, 6).is_zero()


def test_mc_detects_broken_lift():
    rng = random.Random(101)
    sdr, phis = random_mc_instance(rng, order=3)
    broken = assemble([phis[0], phis[1].scale(2), phis[2]], eps_ring(3))
    assert not check_mc(sdr.V, broken, 3).is_zero()


def test_mc_on_identity_sdr():
    rng = random.Random(9)
    base, phis = random_mc_instance(rng, order=3)
    plain = identity_sdr(base.V.space)
    sdr = SDR(base.V, base.V, plain.i, plain.pi, plain.h)
    phi = assemble(phis, eps_ring(3))
    assert check_transferred_mc(sdr, phi, 3).is_zero()


@pytest.mark.parametrize("seed", range(3))
def test_gauge_mc_with_small_differential(seed):
    rng = random.Random(300 + seed)
    sdr = sdr_with_small_differential(rng)
    assert validate_sdr(sdr).passed
    phi = gauge_mc(rng, sdr, 5)
    assert check_mc(sdr.V, phi, 5).is_zero()
    assert not one_leaf_series(sdr, phi).is_zero()
    assert check_transferred_mc(sdr, phi, 5).is_zero()


@pytest.mark.parametrize("seed", [200, 201, 203, 204])
def test_order_two_cancellation(seed):
    rng = random.Random(seed)
    sdr = sdr_with_small_differential(rng)
    phi = gauge_mc(rng, sdr, 2)
    phis = [GradedMap(sdr.V.space, sdr.V.space, 1, {(): phi.coefficient((k,))}) for k in (1, 2)]
    assert check_order_two(sdr, *phis).passed
    t = order_two_terms(sdr, *phis)
    assert not t["T1"].is_zero() and not t["T2"].is_zero()
    assert (t["T1"] + t["T2"]) == -t["T3"]


def test_lift_solves_mc_equation_at_each_order():
    rng = random.Random(13)
    sdr, phis = random_mc_instance(rng, order=4)
    Q = sdr.Q
    for k in range(2, 5):
        rhs = sum((phis[i - 1] @ phis[k - i - 1] for i in range(1, k)),
                  GradedMap.zero(sdr.V.space, sdr.V.space, 0))
        assert Q @ phis[k - 1] + phis[k - 1] @ Q == -rhs
    assert lift_mc(sdr, phis[0], 4) == phis


def test_linfty_single_bracket_passes(dgla):
    _, ops = dgla
    only2 = OperationSet(ops.space, {2: ops.get(2)})
    assert check_linfty(only2, 3).passed


def test_linfty_input_and_transferred(dgla):
    sdr, ops = dgla
    assert check_linfty(ops, 3, sdr.Q.over(ops.ring)).passed
    out = transferred_operations(sdr, ops, 3, 3)
    rep = check_linfty(out, 3, sdr.Vr.Q.over(out.ring))
    assert rep.passed


def test_linfty_detects_perturbation(dgla):
    sdr, ops = dgla
    out = transferred_operations(sdr, ops, 3, 3)
    m2 = out.get(2)
    Vr = out.space
    # x ⊗ y + y ⊗ x -> x with x, y even and odd: a symmetric, odd bump
    x, y = Vr.parity.index(0), Vr.parity.index(1)
    coeffs = linalg.zeros(Vr.dim, Vr.dim ** 2)
    coeffs[x, x * Vr.dim + y] = coeffs[x, y * Vr.dim + x] = 1
    bump = GradedMap(Vr.power(2), Vr, 1, {(1,): coeffs}, m2.ring)
    assert check_linfty(out.replace(2, m2 + bump), 3, sdr.Vr.Q.over(out.ring)).failed()
    rep = check_linfty(out.replace(2, m2 + bump), 3, sdr.Vr.Q.over(out.ring))
    assert not rep.passed


def test_first_page_differential():
    # rows: a -> b under Q, c -> e under φ1; the two commute trivially
    V = GradedSpace(("a", "b", "c", "e"), (0, 1, 0, 1))
    W = GradedSpace(("c", "e"), (0, 1))
    Q = GradedMap(V, V, 1, [[0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]])
    h = GradedMap(V, V, 1, [[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]])
    i = GradedMap(W, V, 0, [[0, 0], [0, 0], [1, 0], [0, 1]])
    pi = GradedMap(V, W, 0, [[0, 0, 1, 0], [0, 0, 0, 1]])
    sdr = SDR(Complex(V, Q), Complex.zero(W), i, pi, h)
    assert validate_sdr(sdr).passed
    phi1 = GradedMap(V, V, 1, [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0]])
    assert (Q @ phi1 + phi1 @ Q).is_zero()
    phi, ring = eps_phi(phi1, 1)
    A1 = one_leaf_series(sdr, phi)
    assert A1 == (pi @ phi1 @ i).over(ring).scale(Series.var(ring, "eps"))
    assert A1.coefficient((1,))[1, 0] == 1
