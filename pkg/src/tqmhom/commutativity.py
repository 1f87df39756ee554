"""Strong-Hodge data, commutative Maurer-Cartan families and the Commutativity equations.

The parameter directions ``t_a`` carry odd symbols ``dt_a`` (named ``"d" + t_a``),
always written to the left of operator coefficients.  A connection one-form
``A = sum_a dt_a A_a`` solves the Commutativity equations when ``A∧A = 0``
and ``dA = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import linalg
from .complexes import SDR, Complex, PreconditionError
from .forms import Form
from .graded import GradedMap, GradedSpace, ParityError, StructuralError, supercommutator
from .report import Report
from .series import Ring, Series
from .transfer import one_leaf_chain

SIMPLIFIED = "simplified"
FULL = "full"


def dt_name(param: str) -> str:
    return "d" + param


def family_ring(params, order: int) -> Ring:
    """Parameters truncated at total degree ``order + 1``, one more than the checked order."""
    params = tuple(params)
    return Ring(params, ((params, order + 1),))


@dataclass(frozen=True)
class HodgeData:
    """``(C, Q, G, G_-, i_W, pi_W)``.

    ``window`` optionally lists the basis vectors of ``C`` on which identities
    involving a family are asserted; truncated multiplication operators are
    only exact away from the cutoff.
    """

    complex: Complex
    G: GradedMap
    G_minus: GradedMap
    i: GradedMap
    pi: GradedMap
    window: tuple | None = None

    def __post_init__(self):
        C = self.complex.space
        for name, x in (("G", self.G), ("G_minus", self.G_minus)):
            if x.source != C or x.target != C:
                raise StructuralError(f"{name} must be an endomorphism of C")
            if x.parity != 1 and not x.is_zero():
                raise ParityError(f"{name} must be odd")
        if self.i.target != C or self.pi.source != C or self.i.source != self.pi.target:
            raise StructuralError("i_W and pi_W do not match C")

    @property
    def Q(self) -> GradedMap:
        return self.complex.Q

    @property
    def C(self) -> GradedSpace:
        return self.complex.space

    @property
    def W(self) -> GradedSpace:
        return self.i.source

    def sdr(self) -> SDR:
        return SDR(self.complex, Complex.zero(self.W), self.i, self.pi, self.G)

    def restrict(self, x):
        """Keep only the columns in the window (identity if there is none)."""
        if self.window is None:
            return x
        n = self.C.dim
        P = linalg.zeros(n, n)
        for k in self.window:
            P[k, k] = 1
        proj = GradedMap(self.C, self.C, 0, {(): P})
        if isinstance(x, Form):
            return x.map_components(lambda y: y @ proj)
        return x @ proj


def validate_strong_hodge(data: HodgeData) -> Report:
    Q, G, Gm, i, pi = data.Q, data.G, data.G_minus, data.i, data.pi
    idC = GradedMap.identity(data.C)
    rep = Report()
    m = "commutativity"
    rep.add("Q² = 0", Q @ Q, m)
    rep.add("G₋² = 0", Gm @ Gm, m)
    rep.add("{Q,G₋} = 0", supercommutator(Q, Gm), m)
    rep.add("{Q,G} = id - i∘pi", supercommutator(Q, G) - (idC - i @ pi), m)
    rep.add("G² = 0", G @ G, m)
    rep.add("G∘i = 0", G @ i, m)
    rep.add("pi∘G = 0", pi @ G, m)
    rep.add("pi∘i = id", pi @ i - GradedMap.identity(data.W), m)
    rep.add("G₋∘i = 0", Gm @ i, m)
    rep.add("pi∘G₋ = 0", pi @ Gm, m)
    rep.add("{G,G₋} = 0", supercommutator(G, Gm), m)
    return rep


def saito_differential_residual(data: HodgeData, z: str = "z") -> GradedMap:
    """``(Q + z G₋)²``, identically zero in ``z`` for valid data."""
    ring = Ring((z,))
    QS = data.Q.over(ring) + data.G_minus.over(ring).scale(Series.var(ring, z))
    return QS @ QS


# families -------------------------------------------------------------------

@dataclass(frozen=True)
class CommFamily:
    """An even ``End(C)``-valued series ``U(t)`` with ``U(0) = 0``."""

    U: GradedMap
    params: tuple
    mode: str = SIMPLIFIED

    def __post_init__(self):
        if self.mode not in (SIMPLIFIED, FULL):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.U.parity and not self.U.is_zero():
            raise ParityError("U must be even")
        if any(p not in self.U.ring.variables for p in self.params):
            raise StructuralError("U must live in a ring containing every parameter")
        if any(not any(e) for e in self.U.coeffs):
            raise ValueError("U(0) must vanish")

    @classmethod
    def linear(cls, operators, params, order: int, mode: str = SIMPLIFIED) -> "CommFamily":
        """``U = sum_a t_a X_a`` over :func:`family_ring`."""
        params = tuple(params)
        if len(operators) != len(params):
            raise ValueError("one operator per parameter")
        ring = family_ring(params, order)
        U = None
        for X, p in zip(operators, params):
            term = X.over(ring).scale(Series.var(ring, p))
            U = term if U is None else U + term
        return cls(U, params, mode)

    @property
    def order(self) -> int:
        c = self.U.ring.cutoff(self.params[0])
        return c - 1 if c is not None else None

    @property
    def dts(self) -> dict:
        return {dt_name(p): (p, "t") for p in self.params}

    def dU(self) -> Form:
        return Form.of(self.U, self.dts).d()


def _coefficient_maps(U: GradedMap):
    return [GradedMap(U.source, U.target, U.parity, {(): m}) for e, m in sorted(U.coeffs.items())]


def validate_comm_family(data: HodgeData, fam: CommFamily, order: int | None = None) -> Report:
    order = fam.order if order is None else order
    params = fam.params
    Q, Gm, U = data.Q, data.G_minus, fam.U
    r = data.restrict

    def cut(x):
        x = r(x)
        if isinstance(x, Form):
            return x.map_components(lambda y: y.below(params, order + 1))
        return x.below(params, order + 1)

    rep = Report()
    m = "commutativity"
    QU = supercommutator(Q, U)
    GU = supercommutator(Gm, U)
    GUU = supercommutator(GU, U)
    if fam.mode == SIMPLIFIED:
        rep.add("[Q,U] = 0", cut(QU), m)
        rep.add("[[G₋,U],U] = 0", cut(GUU), m)
    else:
        rep.add("[Q,U] + [[G₋,U],U] = 0", cut(QU + GUU), m)
    coeffs = _coefficient_maps(U)
    comm = {}
    for a in range(len(coeffs)):
        for b in range(a + 1, len(coeffs)):
            c = r(supercommutator(coeffs[a], coeffs[b]))
            if not c.is_zero():
                comm[f"{a},{b}"] = c
    rep.add("[U(t),U(t')] = 0", comm, m)
    dU = fam.dU()
    X = Form.of(GU, fam.dts)
    rep.add("{dU,[G₋,U]} = 0", cut(dU @ X + X @ dU), m)
    return rep


# connection one-forms -----------------------------------------------------------

@dataclass(frozen=True)
class ConnectionOneForm:
    """``A = sum_a dt_a A_a`` with ``End(W)``-valued series coefficients."""

    params: tuple
    components: dict

    @property
    def dts(self) -> dict:
        return {dt_name(p): (p, "t") for p in self.params}

    def form(self) -> Form:
        any_c = next(iter(self.components.values()))
        return Form(any_c.source, any_c.target,
                    {(dt_name(p),): x for p, x in self.components.items()}, self.dts)

    def __getitem__(self, param: str) -> GradedMap:
        return self.components[param]

    def truncated(self, order: int) -> "ConnectionOneForm":
        return ConnectionOneForm(self.params, {p: x.below(self.params, order + 1) for p, x in self.components.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConnectionOneForm):
            return NotImplemented
        return self.params == other.params and all(
            (self.components[p] - other.components[p]).is_zero() for p in self.params)

    __hash__ = None


def build_A(data: HodgeData, fam: CommFamily, order: int | None = None) -> ConnectionOneForm:
    """``A = d(sum_k pi U (-G G₋ U)^k i)`` through t-order ``order``."""
    if fam.mode != SIMPLIFIED:
        raise PreconditionError("the product formula is only available for simplified families")
    order = fam.order if order is None else order
    ring = family_ring(fam.params, order)
    U = fam.U.over(ring) if fam.U.ring != ring else fam.U
    step = -(data.G @ data.G_minus @ U)
    x = data.i
    P = GradedMap.zero(data.W, data.W, 0, ring)
    while True:
        term = data.pi @ U @ x
        y = step @ x
        P = P + term
        if y.is_zero():
            break
        x = y
    return ConnectionOneForm(fam.params, {p: P.diff(p).below(fam.params, order + 1) for p in fam.params})


def transferred_one_form(data: HodgeData, fam: CommFamily, order: int | None = None,
                         strict: bool = True) -> ConnectionOneForm:
    """Transfer ``phi = dU + [G₋,U]`` along ``(i_W, pi_W, G)`` and keep the ``dt``-linear part.

    With ``strict`` the strong-Hodge identities are required as well as the
    Maurer-Cartan equation of ``phi``.
    """
    order = fam.order if order is None else order
    if strict:
        rep = validate_strong_hodge(data)
        if not rep.passed:
            raise PreconditionError(f"strong Hodge identities fail: {rep.failed()}")
    phi = fam_phi(data, fam)
    mc = data.restrict(phi.q_action(data.Q, data.Q) + phi @ phi)
    mc = mc.map_components(lambda y: y.below(fam.params, order + 1))
    if not mc.is_zero():
        raise PreconditionError("phi = dU + [G₋,U] is not Maurer-Cartan (phi² != 0)")
    A = one_leaf_chain(data.sdr(), phi)
    ring = family_ring(fam.params, order)
    return ConnectionOneForm(fam.params, {p: _in_ring(A.component((dt_name(p),)), ring).below(fam.params, order + 1)
                                          for p in fam.params})


def _in_ring(x: GradedMap, ring: Ring) -> GradedMap:
    # absent components come back over the trivial ring
    return x.over(ring) if not x.ring.variables else x


def fam_phi(data: HodgeData, fam: CommFamily) -> Form:
    return fam.dU() + Form.of(supercommutator(data.G_minus, fam.U), fam.dts)


def transferred_zero_form(data: HodgeData, fam: CommFamily) -> GradedMap:
    """The ``dt``-free part of the transferred element; absent for strong-Hodge data."""
    return one_leaf_chain(data.sdr(), fam_phi(data, fam)).component(())


def check_commutativity(A: ConnectionOneForm, order: int) -> Report:
    params = A.params
    F = A.form()
    sq = (F @ F).map_components(lambda y: y.below(params, order + 1))
    dA = F.d().map_components(lambda y: y.below(params, order))
    rep = Report()
    rep.add("A∧A = 0", sq, "commutativity")
    rep.add("dA = 0", dA, "commutativity")
    return rep
