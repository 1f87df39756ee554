"""Tree-level BCOV: the tree-sum vector field on cohomology and Oriented Associativity.

Trees are binary, vertices carry the product ``m`` of a supercommutative
algebra ``B``, leaves carry ``i_W``, the root carries ``pi_W`` and every
internal edge carries ``-G G₋``.  Coordinates ``T^a`` on ``W`` are even, so
``W`` must be purely even.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .commutativity import CommFamily, HodgeData, family_ring
from .complexes import Complex
from .contract import Slot, Wire, tensor_contract
from .graded import GradedMap, GradedSpace, ParityError, StructuralError, permute_inputs, supercommutator
from .report import Report
from .series import Ring, Series
from .trees import Tree, automorphism_order, enumerate_trees


@dataclass(frozen=True)
class BCOVData:
    B: GradedSpace
    m: GradedMap
    Q: GradedMap
    G_minus: GradedMap
    G: GradedMap
    i: GradedMap
    pi: GradedMap
    unit: int | None = None
    window: tuple | None = None

    def __post_init__(self):
        if self.m.source != self.B.power(2) or self.m.target != self.B:
            raise StructuralError("m must map B⊗B -> B")
        if self.m.parity and not self.m.is_zero():
            raise ParityError("m must be even")
        for name, x in (("Q", self.Q), ("G_minus", self.G_minus), ("G", self.G)):
            if x.source != self.B or x.target != self.B:
                raise StructuralError(f"{name} must be an endomorphism of B")

    @property
    def W(self) -> GradedSpace:
        return self.i.source

    @property
    def edge(self) -> GradedMap:
        return -(self.G @ self.G_minus)

    def hodge(self) -> HodgeData:
        return HodgeData(Complex(self.B, self.Q), self.G, self.G_minus, self.i, self.pi, self.window)

    def left_multiplication(self, x: GradedMap) -> GradedMap:
        """``b -> m(x, b)`` for an even vector-valued series ``x: k -> B``."""
        return _mult(self, x, left=True)

    def right_multiplication(self, x: GradedMap) -> GradedMap:
        return _mult(self, x, left=False)

    def window_inclusion(self) -> GradedMap:
        """``J: B_w -> B`` onto the window (all of ``B`` when there is none)."""
        keep = list(self.window) if self.window is not None else list(range(self.B.dim))
        Bw = GradedSpace(tuple(self.B.basis[k] for k in keep), tuple(self.B.parity[k] for k in keep))
        J = linalg.zeros(self.B.dim, len(keep))
        for j, k in enumerate(keep):
            J[k, j] = 1
        return GradedMap(Bw, self.B, 0, {(): J})


def _mult(data: BCOVData, x: GradedMap, left: bool) -> GradedMap:
    if x.parity and not x.is_zero():
        raise ParityError("only even multipliers are supported")
    d = data.B.dim
    m = data.m.constant().coefficient()
    coeffs = {}
    for e, v in x.coeffs.items():
        M = linalg.zeros(d, d)
        for a in range(d):
            if v[a, 0]:
                M = M + (m[:, a * d:(a + 1) * d] if left else m[:, a::d]) * v[a, 0]
        coeffs[e] = M
    return GradedMap(data.B, data.B, 0, coeffs, x.ring)


def validate_bcov(data: BCOVData) -> Report:
    """All identities; those involving the product are evaluated on the window."""
    B, m, Q, Gm, G = data.B, data.m, data.Q, data.G_minus, data.G
    idB = GradedMap.identity(B)
    J = data.window_inclusion()
    Bw = J.source
    mJJ = m @ J.tensor(J)
    rep = Report()
    mod = "bcov"
    rep.add("m supercommutative", permute_inputs(mJJ, Bw, 2, [1, 0]) - mJJ, mod)
    rep.add("m associative", m @ mJJ.tensor(J) - m @ J.tensor(mJJ), mod)
    if data.unit is not None:
        e = linalg.zeros(B.dim, 1)
        e[data.unit, 0] = 1
        one = GradedMap(GradedSpace.unit(), B, 0, {(): e})
        rep.add("unit", data.left_multiplication(one) @ J - J, mod)
    QJ = Q @ J
    rep.add("Q derivation", Q @ mJJ - m @ (QJ.tensor(J) + J.tensor(QJ)), mod)
    rep.add("Q² = 0", Q @ Q, mod)
    rep.add("G₋² = 0", Gm @ Gm, mod)
    rep.add("{Q,G₋} = 0", supercommutator(Q, Gm), mod)
    rep.add("{Q,G} = id - i∘pi", supercommutator(Q, G) - (idB - data.i @ data.pi), mod)
    rep.add("{G,G₋} = 0", supercommutator(G, Gm), mod)
    rep.add("G₋∘i = 0", Gm @ data.i, mod)
    rep.add("G₋ second order", second_order_residual(data), mod)
    return rep


def second_order_residual(data: BCOVData) -> GradedMap:
    """Failure of ``Φ(a, b) = G₋(ab) - G₋(a)b - (-1)^{|a|} a G₋(b)`` to be a derivation in ``b``.

    Evaluated on window triples ``a ⊗ b ⊗ c``.
    """
    B, m, Gm = data.B, data.m, data.G_minus
    idB = GradedMap.identity(B)
    J = data.window_inclusion()
    phi = Gm @ m - m @ Gm.tensor(idB) - m @ idB.tensor(Gm)
    mJJ = m @ J.tensor(J)
    phiJJ = phi @ J.tensor(J)
    lhs = phi @ J.tensor(mJJ)
    first = m @ phiJJ.tensor(J)
    second = permute_inputs(m @ J.tensor(phiJJ), J.source, 3, [1, 0, 2])
    return lhs - first - second


# the vector field -------------------------------------------------------------

@dataclass(frozen=True)
class VectorField:
    params: tuple
    components: tuple
    order: int

    def __getitem__(self, a: int) -> Series:
        return self.components[a]


@dataclass(frozen=True)
class StructureConstants:
    """``f[a][b][c] = f^a_bc``."""

    params: tuple
    f: tuple
    order: int


def coordinates(W: GradedSpace, prefix: str = "T") -> tuple:
    return tuple(f"{prefix}{a + 1}" for a in range(W.dim))


def _tree_pattern(tree: Tree, data: BCOVData):
    inputs = []
    for c in tree.children:
        if c.is_leaf:
            inputs.append(Slot(data.i))
        else:
            inputs.append(Wire(data.edge, (_tree_pattern(c, data),)))
    return Wire(data.m, tuple(inputs))


def evaluate_on_diagonal(op: GradedMap, n: int, ring: Ring, params) -> GradedMap:
    """``op(T, ..., T)`` for ``op: W^{⊗n} -> X`` and ``T = sum_a T^a e_a``, as a series ``k -> X``."""
    mu = len(params)
    M = op.constant().coefficient()
    idx = [ring.index(p) for p in params]
    cols: dict = {}
    for k, multi in enumerate(itertools.product(range(mu), repeat=n)):
        e = [0] * ring.nvars
        for a in multi:
            e[idx[a]] += 1
        cols.setdefault(tuple(e), []).append(k)
    coeffs = {}
    for e, ks in cols.items():
        if ring.admits(e):
            coeffs[e] = M[:, ks].sum(axis=1).reshape(-1, 1)
    return GradedMap(GradedSpace.unit(), op.target, 0, coeffs, ring)


def tree_outputs(data: BCOVData, max_order: int, params=None, root: bool = True) -> GradedMap:
    """``sum_γ (1/n_γ) c_γ(T, ..., T)`` over binary trees with 2..max_order leaves.

    With ``root`` the result is projected by ``pi_W``; otherwise it is the
    ``B``-valued sum of vertex outputs.
    """
    if any(data.W.parity):
        raise ParityError("the tree-sum vector field needs a purely even W")
    params = tuple(params or coordinates(data.W))
    ring = Ring(params, ((params, max_order),))
    target = data.W if root else data.B
    total = GradedMap.zero(GradedSpace.unit(), target, 0, ring)
    for n in range(2, max_order + 1):
        for shape in enumerate_trees(n, {2}):
            pat = _tree_pattern(shape, data)
            amp = tensor_contract(Wire(data.pi, (pat,)) if root else pat)
            w = Fraction(1, automorphism_order(shape))
            total = total + evaluate_on_diagonal(amp, n, ring, params).scale(w)
    return total


def bcov_vector_field(data: BCOVData, max_order: int, params=None) -> VectorField:
    params = tuple(params or coordinates(data.W))
    v = tree_outputs(data, max_order, params)
    return VectorField(params, tuple(v.entry(a, 0) for a in range(data.W.dim)), max_order)


def structure_constants(v: VectorField) -> StructureConstants:
    mu = len(v.params)
    f = tuple(
        tuple(tuple(v.components[a].diff(v.params[b]).diff(v.params[c]) for c in range(mu)) for b in range(mu))
        for a in range(mu))
    return StructureConstants(v.params, f, v.order - 2)


def _below(s: Series, params, order: int) -> Series:
    idx = [s.ring.index(p) for p in params]
    return Series(s.ring, {e: c for e, c in s.coeffs.items() if sum(e[k] for k in idx) <= order})


def check_oa(f: StructureConstants, order: int | None = None) -> Report:
    """``sum_a f^a_bc f^e_ad - sum_a f^a_cd f^e_ba`` for all ``b, c, d, e``."""
    order = f.order if order is None else order
    if order > f.order:
        raise ValueError(f"structure constants are exact only through order {f.order}")
    mu = len(f.params)
    F = f.f
    res = {}
    for b, c, d, e in itertools.product(range(mu), repeat=4):
        s = None
        for a in range(mu):
            t = F[a][b][c] * F[e][a][d] - F[a][c][d] * F[e][b][a]
            s = t if s is None else s + t
        s = _below(s, f.params, order)
        if not s.is_zero():
            res[(b, c, d, e)] = s
    return Report().add("oriented associativity", res, "bcov")


def potentiality_residual(v: VectorField, eta) -> dict:
    """``∂_b (η v)_c - ∂_c (η v)_b``; zero when a potential exists."""
    eta = linalg.as_exact(eta)
    mu = len(v.params)
    w = []
    for c in range(mu):
        s = None
        for d in range(mu):
            if eta[c, d]:
                t = v.components[d] * eta[c, d]
                s = t if s is None else s + t
        w.append(s if s is not None else v.components[0] * 0)
    out = {}
    for b in range(mu):
        for c in range(b + 1, mu):
            r = w[c].diff(v.params[b]) - w[b].diff(v.params[c])
            r = _below(r, v.params, v.order - 2)
            if not r.is_zero():
                out[(b, c)] = r
    return out


# the leaf-to-root family ----------------------------------------------------------

def leaf_to_root_family(data: BCOVData, order: int, params=None, entrance: str = "left") -> CommFamily:
    """``U(T) = m(Y(T), -)`` with ``Y = i_W T + (-G G₋)(vertex outputs)``.

    Summing ``pi U (-G G₋ U)^k i`` reproduces the trees grafted onto the line
    from one leaf to the root.  ``entrance`` selects which input of each line
    vertex carries the grafted subtree.
    """
    params = tuple(params or coordinates(data.W))
    ring = family_ring(params, order)
    s = tree_outputs(data, order + 1, params, root=False).over(ring)
    leaf = evaluate_on_diagonal(data.i, 1, ring, params)
    Y = leaf + data.edge @ s
    U = data.left_multiplication(Y) if entrance == "left" else data.right_multiplication(Y)
    return CommFamily(U, params)


def entrance_residual(data: BCOVData, order: int, params=None) -> GradedMap:
    return leaf_to_root_family(data, order, params, "left").U - leaf_to_root_family(data, order, params, "right").U


def symmetry_residual(A, f: StructureConstants, order: int) -> dict:
    """``(A_a)^c_b - f^c_ab`` for a connection built from the leaf-to-root family."""
    mu = len(f.params)
    out = {}
    for a, p in enumerate(f.params):
        Aa = A[p]
        for b in range(mu):
            for c in range(mu):
                x = Aa.entry(c, b)
                y = f.f[c][a][b]
                y = Series(x.ring, {e: v for e, v in y.coeffs.items() if x.ring.admits(e)})
                r = _below(x - y, f.params, order)
                if not r.is_zero():
                    out[(a, b, c)] = r
    return out
