"""Homotopy transfer over trees, Maurer-Cartan checks and L∞ relations.

Operations follow the shifted convention: every ``m_n`` is odd and graded
symmetric in the parity of ``V``, and the relations read

    sum_{i} sum_{unshuffles σ} ε(σ) m_{n-i+1}(m_i(v_σ1..v_σi), v_σ(i+1)..v_σn) = 0

with the differential included in ``m_1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .complexes import SDR, Complex
from .contract import Slot, Wire, tensor_contract
from .graded import (GradedMap, GradedSpace, ParityError, StructuralError, permute_inputs,
                     supercommutator)
from .report import Report
from .trees import Tree, enumerate_labeled_trees, enumerate_trees, automorphism_order

SHAPES = "shapes"
LABELED = "labeled"


@dataclass(frozen=True)
class OperationSet:
    """Odd graded-symmetric operations ``m_n: V^{⊗n} -> V`` keyed by arity."""

    space: GradedSpace
    ops: dict = field(default_factory=dict)
    symmetric: bool = True
    eps: str = "eps"

    def __post_init__(self):
        for n, m in self.ops.items():
            if n < 1:
                raise ValueError("arities start at 1")
            if m.source != self.space.power(n) or m.target != self.space:
                raise StructuralError(f"m_{n} has the wrong shape")
            if m.parity != 1 and not m.is_zero():
                raise ParityError(f"m_{n} must be odd")

    def get(self, n: int) -> GradedMap:
        m = self.ops.get(n)
        if m is None:
            return GradedMap.zero(self.space.power(n), self.space, 1, self.ring)
        return m

    @property
    def ring(self):
        for m in self.ops.values():
            if m.ring.variables:
                return m.ring
        return next(iter(self.ops.values())).ring if self.ops else GradedMap.zero(self.space, self.space).ring

    @property
    def arities(self):
        return sorted(n for n, m in self.ops.items() if not m.is_zero())

    def eps_order(self) -> int | None:
        ring = self.ring
        return ring.cutoff(self.eps) if self.eps in ring.variables else None

    def replace(self, n: int, m: GradedMap) -> "OperationSet":
        ops = dict(self.ops)
        ops[n] = m
        return OperationSet(self.space, ops, self.symmetric, self.eps)


def symmetry_residuals(ops: OperationSet) -> Report:
    """``m_n ∘ P_σ - m_n`` for adjacent transpositions ``σ``."""
    rep = Report()
    for n in sorted(ops.ops):
        m = ops.ops[n]
        for k in range(n - 1):
            perm = list(range(n))
            perm[k], perm[k + 1] = perm[k + 1], perm[k]
            rep.add(f"m{n} symmetric in inputs {k + 1},{k + 2}", permute_inputs(m, ops.space, n, perm) - m, "transfer")
    return rep


# tree amplitudes ----------------------------------------------------------

def _pattern(tree: Tree, ops: OperationSet, sdr: SDR):
    if tree.is_leaf:
        return Slot(sdr.i)
    m = ops.ops.get(tree.arity)
    if m is None:
        raise StructuralError(f"tree uses m{tree.arity}, which is not among the operations")
    inputs = []
    for c in tree.children:
        if c.is_leaf:
            inputs.append(Slot(sdr.i))
        else:
            inputs.append(Wire(sdr.h, (_pattern(c, ops, sdr),)))
    return Wire(m, tuple(inputs))


def tree_amplitude(sdr: SDR, ops: OperationSet, tree: Tree) -> GradedMap:
    """``(-1)^{n_e} <h^{⊗n_e}, ⊗m, i^{⊗n_l}, pi>_γ`` without the symmetry factor.

    Inputs are taken in depth-first leaf order; if the leaves carry labels
    ``1..n`` the result is precomposed with the matching input permutation.
    """
    if tree.is_leaf:
        raise StructuralError("a bare leaf has no amplitude")
    if ops.space != sdr.V.space:
        raise StructuralError("operations do not act on the SDR's space")
    out = tensor_contract(Wire(sdr.pi, (_pattern(tree, ops, sdr),)))
    if tree.n_edges % 2:
        out = -out
    labels = tree.leaf_labels()
    if all(x is not None for x in labels):
        out = permute_inputs(out, sdr.Vr.space, tree.n_leaves, [x - 1 for x in labels])
    return out


def symmetrize(op: GradedMap, space: GradedSpace, n: int) -> GradedMap:
    """``sum_{σ ∈ S_n} op ∘ P_σ``."""
    out = None
    for perm in itertools.permutations(range(n)):
        term = permute_inputs(op, space, n, perm)
        out = term if out is None else out + term
    return out


@dataclass
class TransferResult:
    operations: OperationSet
    contributions: list

    def __iter__(self):
        return iter((self.operations, self.contributions))


def transferred_operations(sdr: SDR, ops: OperationSet, max_arity: int, eps_order: int | None = None,
                           mode: str = SHAPES, with_contributions: bool = False):
    """Operations ``A_1..A_max_arity`` on ``V_r`` (``A_1`` excludes ``Q_r``).

    ``shapes``: ``A_n = sum_γ 1/n_γ sum_σ ε(σ) c_γ ∘ P_σ`` over unlabeled trees.
    ``labeled``: ``A_n = sum_T c_T`` over distinct leaf-labeled trees.
    Each operation has ε-order at least one, so trees with more than
    ``eps_order`` vertices vanish and are not enumerated.
    """
    eps_order = eps_order if eps_order is not None else ops.eps_order()
    if eps_order is None:
        raise ValueError("an ε-order is needed to bound the tree sum")
    arities = set(ops.arities)
    Vr = sdr.Vr.space
    out = {}
    contributions = []
    for n in range(1, max_arity + 1):
        total = GradedMap.zero(Vr.power(n), Vr, 1, ops.ring)
        if arities:
            if mode == SHAPES:
                for shape in enumerate_trees(n, arities, eps_order):
                    amp = tree_amplitude(sdr, ops, shape)
                    term = symmetrize(amp, Vr, n).scale(Fraction(1, automorphism_order(shape)))
                    contributions.append((shape.text(), term))
                    total = total + term
            elif mode == LABELED:
                for tree in enumerate_labeled_trees(n, arities, eps_order):
                    term = tree_amplitude(sdr, ops, tree)
                    contributions.append((tree.text(), term))
                    total = total + term
            else:
                raise ValueError(f"unknown mode {mode!r}")
        out[n] = total
    result = OperationSet(Vr, out, True, ops.eps)
    return TransferResult(result, contributions) if with_contributions else result


def one_leaf_series(sdr: SDR, phi: GradedMap, eps_order: int | None = None) -> GradedMap:
    """``A_1 = sum_k (-1)^k pi phi (h phi)^k i`` via the chain trees."""
    ops = OperationSet(sdr.V.space, {1: phi}, eps=_eps_name(phi))
    order = eps_order if eps_order is not None else _eps_cutoff(phi)
    return transferred_operations(sdr, ops, 1, order).get(1)


def one_leaf_chain(sdr: SDR, phi, max_terms: int = 64):
    """The same chain sum for a form-valued ``phi``, iterated until the terms vanish.

    ``phi`` must be nilpotent through its ring truncation and ``dt`` degree.
    """
    from .forms import Form

    phi = phi if isinstance(phi, Form) else Form.of(phi)
    h, pi = Form.of(sdr.h), Form.of(sdr.pi)
    x = Form.of(sdr.i, phi.dts)
    total = Form.zero(sdr.Vr.space, sdr.Vr.space, phi.dts)
    for k in range(max_terms):
        y = phi @ x
        if y.is_zero():
            return total
        term = pi @ y
        total = total + (term if k % 2 == 0 else -term)
        x = h @ y
    raise ArithmeticError("chain did not terminate; phi is not nilpotent")


def _eps_name(phi: GradedMap) -> str:
    return phi.ring.variables[0] if phi.ring.variables else "eps"


def _eps_cutoff(phi: GradedMap) -> int:
    for v in phi.ring.variables:
        c = phi.ring.cutoff(v)
        if c is not None:
            return c
    raise ValueError("phi must live in a truncated ring")


# L∞ relations ---------------------------------------------------------------

class RelationReport(Report):
    def __init__(self, max_arity: int, eps_order: int | None):
        super().__init__()
        self.max_arity = max_arity
        self.eps_order = eps_order

    def residual(self, n: int) -> GradedMap:
        return self[f"L∞ relation, arity {n}"].residual


def unshuffles(n: int, i: int):
    for first in itertools.combinations(range(n), i):
        rest = [k for k in range(n) if k not in first]
        yield list(first) + rest


def linfty_relation(ops: OperationSet, n: int, Q: GradedMap | None = None) -> GradedMap:
    V = ops.space
    ident = GradedMap.identity(V, ops.ring)

    def m(k):
        base = ops.get(k)
        if k == 1 and Q is not None:
            base = base + Q.over(base.ring) if base.ring.variables else Q + base
        return base

    total = GradedMap.zero(V.power(n), V, 0, ops.ring)
    for i in range(1, n + 1):
        inner = m(i)
        for _ in range(n - i):
            inner = inner.tensor(ident)
        outer = m(n - i + 1) @ inner
        if outer.is_zero():
            continue
        for perm in unshuffles(n, i):
            total = total + permute_inputs(outer, V, n, perm)
    return total


def check_linfty(ops: OperationSet, max_arity: int, Q: GradedMap | None = None) -> RelationReport:
    """Residuals of the quadratic L∞ relations up to ``max_arity``.

    For a symmetric operation set the graded symmetry of each ``m_n`` is
    checked as well, since the relations presuppose it.
    """
    rep = RelationReport(max_arity, ops.eps_order())
    if ops.symmetric:
        rep.extend(symmetry_residuals(OperationSet(ops.space, {n: m for n, m in ops.ops.items() if n <= max_arity}, True, ops.eps)))
    for n in range(1, max_arity + 1):
        rep.add(f"L∞ relation, arity {n}", linfty_relation(ops, n, Q), "transfer")
    return rep


# Maurer-Cartan ------------------------------------------------------------

def check_mc(complex_: Complex, phi: GradedMap, eps_order: int | None = None) -> GradedMap:
    """``{Q, φ} + φ²`` truncated at the ring's ε-order."""
    if phi.parity != 1 and not phi.is_zero():
        raise ParityError("a Maurer-Cartan element must be odd")
    Q = complex_.Q.over(phi.ring) if phi.ring.variables else complex_.Q
    res = supercommutator(Q, phi) + phi @ phi
    if eps_order is not None and phi.ring.variables:
        res = res.below((_eps_name(phi),), eps_order + 1)
    return res


def check_transferred_mc(sdr: SDR, phi: GradedMap, eps_order: int | None = None) -> GradedMap:
    """``{Q_r, A_1} + A_1²`` on ``V_r`` for the transferred one-leaf operation."""
    A1 = one_leaf_series(sdr, phi, eps_order)
    Qr = sdr.Vr.Q.over(A1.ring)
    res = supercommutator(Qr, A1) + A1 @ A1
    if eps_order is not None:
        res = res.below((_eps_name(phi),), eps_order + 1)
    return res


def end_homotopy(sdr: SDR, X: GradedMap) -> GradedMap:
    """``K(X) = hX + (-1)^{|X|} i pi X h`` with ``[Q,K] = id - P``, ``P(X) = i pi X i pi``."""
    h = sdr.h.over(X.ring) if X.ring.variables else sdr.h
    p = sdr.projector_r().over(X.ring) if X.ring.variables else sdr.projector_r()
    second = p @ X @ h
    return h @ X + (-second if X.parity else second)


class ObstructionError(ArithmeticError):
    pass


def lift_mc(sdr: SDR, phi1: GradedMap, order: int, eps: str = "eps") -> list:
    """Coefficients ``φ_1..φ_order`` with ``φ_{k+1} = -K(sum_{i+j=k+1} φ_i φ_j)``.

    Raises :class:`ObstructionError` if an obstruction has a nonzero
    cohomology component.
    """
    phis = [phi1]
    p = sdr.projector_r()
    for k in range(2, order + 1):
        obs = None
        for i in range(1, k):
            term = phis[i - 1] @ phis[k - i - 1]
            obs = term if obs is None else obs + term
        if not (p @ obs @ p).is_zero():
            raise ObstructionError(f"obstruction at order {k}")
        phis.append(-end_homotopy(sdr, obs))
    return phis


def assemble(phis, ring, eps: str = "eps") -> GradedMap:
    """``sum_k eps^k φ_k`` over ``ring``."""
    from .series import Series

    out = GradedMap.zero(phis[0].source, phis[0].target, phis[0].parity, ring)
    for k, phi in enumerate(phis, start=1):
        out = out + phi.over(ring).scale(Series.var(ring, eps, k))
    return out


def order_two_terms(sdr: SDR, phi1: GradedMap, phi2: GradedMap) -> dict:
    """The three ε² contributions to ``{Q_r, A_1} + A_1²`` and their sum.

    ``T1 = pi{Q,φ2}i``, ``T2 = pi φ1 {Q,h} φ1 i``, ``T3 = pi φ1 (1 - {Q,h}) φ1 i``;
    ``direct`` is the ε² part computed from ``A_1`` itself.
    """
    Q, h, i, pi = sdr.Q, sdr.h, sdr.i, sdr.pi
    Qh = supercommutator(Q, h)
    one = GradedMap.identity(sdr.V.space)
    T1 = pi @ supercommutator(Q, phi2) @ i
    T2 = pi @ phi1 @ Qh @ phi1 @ i
    T3 = pi @ phi1 @ (one - Qh) @ phi1 @ i
    a2 = pi @ phi2 @ i - pi @ phi1 @ h @ phi1 @ i
    a1 = pi @ phi1 @ i
    direct = supercommutator(sdr.Vr.Q, a2) + a1 @ a1
    return {"T1": T1, "T2": T2, "T3": T3, "sum": T1 + T2 + T3, "direct": direct}


def check_order_two(sdr: SDR, phi1: GradedMap, phi2: GradedMap) -> Report:
    t = order_two_terms(sdr, phi1, phi2)
    rep = Report()
    rep.add("T1 + T2 + T3 = 0", t["sum"], "transfer")
    rep.add("ε² part of {Q_r,A_1}+A_1² = T1 + T2 + T3", t["direct"] - t["sum"], "transfer")
    rep.add("T3 = pi φ1 i pi φ1 i", t["T3"] - sdr.pi @ phi1 @ sdr.i @ sdr.pi @ phi1 @ sdr.i, "transfer")
    return rep
