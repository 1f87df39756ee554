import random
from fractions import Fraction

import pytest

from tqmhom.complexes import (IDEMPOTENT, SDR, TRUNCATED, Complex, PreconditionError, closedness_residual,
                              edge_integral, evolution_form, limit_at_infinity, sdr_from_complex,
                              semigroup_residual, validate_sdr)
from tqmhom.graded import GradedMap, GradedSpace, StructuralError, supercommutator
from tqmhom.models import random_sdr
from tqmhom.series import Series

# basis a (even), x (even), y (odd); Q x = y, h y = x, V_r = span(a)
V3 = GradedSpace(("a", "x", "y"), (0, 0, 1))
R1 = GradedSpace(("a",), (0,))


def three_dim(h_scale=1, q_scale=1):
    Q = GradedMap(V3, V3, 1, [[0, 0, 0], [0, 0, 0], [0, q_scale, 0]])
    h = GradedMap(V3, V3, 1, [[0, 0, 0], [0, 0, h_scale], [0, 0, 0]])
    i = GradedMap(R1, V3, 0, [[1], [0], [0]])
    pi = GradedMap(V3, R1, 0, [[1, 0, 0]])
    return SDR(Complex(V3, Q), Complex.zero(R1), i, pi, h)


def test_trivial_sdr_passes():
    V = GradedSpace.from_parities([0, 1])
    idV = GradedMap.identity(V)
    sdr = SDR(Complex.zero(V), Complex.zero(V), idV, idV, GradedMap.zero(V, V, 1))
    assert validate_sdr(sdr).passed


def test_three_dim_example_passes():
    assert validate_sdr(three_dim()).passed


def test_three_dim_example_with_doubled_homotopy_fails():
    rep = validate_sdr(three_dim(h_scale=2))
    assert rep.failed() == ["{Q,h} = id - i∘pi"]
    # by hand: Qh y = 2y and hQ x = 2x, so the residual is diag(0, 1, 1)
    assert rep["{Q,h} = id - i∘pi"].residual == GradedMap(V3, V3, 0, [[0, 0, 0], [0, 1, 0], [0, 0, 1]])


def test_validate_rejects_bad_shapes():
    sdr = three_dim()
    bad = SDR(sdr.V, sdr.Vr, GradedMap(R1, R1, 0, [[1]]), sdr.pi, sdr.h)
    with pytest.raises(StructuralError):
        validate_sdr(bad)


def test_evolution_trivial():
    V = GradedSpace.from_parities([0, 1])
    evo = evolution_form(GradedMap.zero(V, V, 0), GradedMap.zero(V, V, 1))
    assert evo.body == GradedMap.identity(V, evo.body.ring)
    assert evo.one_form.is_zero()


def test_evolution_of_sdr_closed_form():
    sdr = three_dim()
    evo = evolution_form(sdr.projector_c(), sdr.h, IDEMPOTENT)
    ring = evo.body.ring
    u = Series.var(ring, "u")
    ident = GradedMap.identity(V3, ring)
    Pc = sdr.projector_c().over(ring)
    assert evo.body == ident - Pc.scale(1 - u)
    assert evo.one_form == -(sdr.h.over(ring) @ evo.body)


def test_idempotent_mode_requires_idempotent():
    V = GradedSpace.from_parities([0, 0])
    H = GradedMap(V, V, 0, [[2, 0], [0, 0]])
    with pytest.raises(PreconditionError):
        evolution_form(H, GradedMap.zero(V, V, 1), IDEMPOTENT)


@pytest.mark.parametrize("kind", [IDEMPOTENT, TRUNCATED])
def test_semigroup_and_closedness(kind):
    sdr = three_dim()
    evo = evolution_form(sdr.projector_c(), sdr.h, kind, order=5)
    assert semigroup_residual(evo).is_zero()
    assert closedness_residual(evo, sdr.Q).is_zero()


def test_truncated_semigroup_for_non_idempotent_h():
    # H = {Q, G} with G not a homotopy: H is not idempotent
    V = GradedSpace.from_parities([0, 1])
    Q = GradedMap(V, V, 1, [[0, 0], [1, 0]])
    G = GradedMap(V, V, 1, [[0, 3], [0, 0]])
    evo = evolution_form(supercommutator(Q, G), G, TRUNCATED, order=6)
    assert semigroup_residual(evo).is_zero()
    assert closedness_residual(evo, Q).is_zero()


def test_edge_integral_three_dim():
    assert edge_integral(three_dim()) == GradedMap(V3, V3, 1, [[0, 0, 0], [0, 0, -1], [0, 0, 0]])


def test_edge_integral_zero_homotopy():
    V = GradedSpace.from_parities([0])
    idV = GradedMap.identity(V)
    sdr = SDR(Complex.zero(V), Complex.zero(V), idV, idV, GradedMap.zero(V, V, 1))
    assert edge_integral(sdr).is_zero()


@pytest.mark.parametrize("c", [Fraction(2), Fraction(-1, 3)])
def test_edge_integral_scales_with_homotopy(c):
    sdr = three_dim(h_scale=c, q_scale=1 / c)
    assert edge_integral(sdr) == -sdr.h


def test_limit_at_infinity():
    lim = limit_at_infinity(three_dim())
    assert lim == GradedMap(V3, V3, 0, [[1, 0, 0], [0, 0, 0], [0, 0, 0]])
    sdr = three_dim()
    assert (lim @ sdr.h).is_zero() and (sdr.h @ lim).is_zero()
    V = GradedSpace.from_parities([0, 1])
    idV = GradedMap.identity(V)
    trivial = SDR(Complex.zero(V), Complex.zero(V), idV, idV, GradedMap.zero(V, V, 1))
    assert limit_at_infinity(trivial) == idV


@pytest.mark.parametrize("seed", range(8))
def test_random_sdr_properties(seed):
    rng = random.Random(seed)
    sdr = random_sdr(rng, rng.randint(3, 8))
    assert validate_sdr(sdr).passed
    e = edge_integral(sdr)
    assert e == -sdr.h
    assert (e @ e).is_zero()
    assert supercommutator(sdr.Q, e) == sdr.i @ sdr.pi - GradedMap.identity(sdr.V.space)


@pytest.mark.parametrize("seed", range(5))
def test_sdr_from_complex(seed):
    rng = random.Random(50 + seed)
    base = random_sdr(rng, 7, 3)
    sdr = sdr_from_complex(base.V)
    assert validate_sdr(sdr).passed
    assert sdr.Vr.space.dim == 3
