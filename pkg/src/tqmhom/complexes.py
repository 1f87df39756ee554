"""Chain complexes, contraction (SDR) data and the 1D evolution form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .forms import Form
from .graded import GradedMap, GradedSpace, ParityError, StructuralError, supercommutator
from .report import Report
from .series import Ring, Series

IDEMPOTENT = "idempotent"
TRUNCATED = "truncated"


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Complex:
    space: GradedSpace
    Q: GradedMap

    def __post_init__(self):
        if self.Q.source != self.space or self.Q.target != self.space:
            raise StructuralError("differential is not an endomorphism of the space")
        if self.Q.parity != 1 and not self.Q.is_zero():
            raise ParityError("differential must be odd")
        if not (self.Q @ self.Q).is_zero():
            raise ValueError("Q^2 != 0")

    @classmethod
    def zero(cls, space: GradedSpace) -> "Complex":
        return cls(space, GradedMap.zero(space, space, 1))


@dataclass(frozen=True)
class SDR:
    """Contraction data ``(V, V_r, i, pi, h)``; validate with :func:`validate_sdr`."""

    V: Complex
    Vr: Complex
    i: GradedMap
    pi: GradedMap
    h: GradedMap

    @property
    def Q(self) -> GradedMap:
        return self.V.Q

    def projector_c(self) -> GradedMap:
        """``id - i∘pi``, the projector onto the contractible summand."""
        return GradedMap.identity(self.V.space) - self.i @ self.pi

    def projector_r(self) -> GradedMap:
        return self.i @ self.pi


def validate_sdr(data: SDR) -> Report:
    V, Vr = data.V.space, data.Vr.space
    if data.i.source != Vr or data.i.target != V:
        raise StructuralError("i must map V_r -> V")
    if data.pi.source != V or data.pi.target != Vr:
        raise StructuralError("pi must map V -> V_r")
    if data.h.source != V or data.h.target != V:
        raise StructuralError("h must be an endomorphism of V")
    if data.i.parity or data.pi.parity:
        raise ParityError("i and pi must be even")
    if data.h.parity != 1 and not data.h.is_zero():
        raise ParityError("h must be odd")
    idV = GradedMap.identity(V)
    Q, Qr = data.V.Q, data.Vr.Q
    rep = Report()
    rep.add("pi∘i = id", data.pi @ data.i - GradedMap.identity(Vr), "complexes")
    rep.add("h∘h = 0", data.h @ data.h, "complexes")
    rep.add("h∘i = 0", data.h @ data.i, "complexes")
    rep.add("pi∘h = 0", data.pi @ data.h, "complexes")
    rep.add("{Q,h} = id - i∘pi", supercommutator(Q, data.h) - (idV - data.i @ data.pi), "complexes")
    rep.add("Q∘i = i∘Q_r", Q @ data.i - data.i @ Qr, "complexes")
    rep.add("pi∘Q = Q_r∘pi", data.pi @ Q - Qr @ data.pi, "complexes")
    return rep


def _parity_part(space: GradedSpace, p: int):
    return [k for k, q in enumerate(space.parity) if q == p]


def sdr_from_complex(complex_: Complex, prefix: str = "h") -> SDR:
    """Contract ``V`` onto a space of cohomology representatives.

    Splits each parity sector as ``H ⊕ B ⊕ C`` with ``B = Q(C)``; ``h`` inverts
    ``Q: C -> B`` and vanishes on ``H ⊕ C``.
    """
    V = complex_.space
    Qm = complex_.Q.coefficient()
    n = V.dim
    cols_H, cols_B, cols_C = [], [], []
    c_vectors = {0: [], 1: []}
    for p in (0, 1):
        idx = _parity_part(V, p)
        if not idx:
            continue
        sub = Qm[:, idx]
        ker = linalg.nullspace(sub)
        C_local = linalg.complement_columns(ker, len(idx)) if ker.shape[1] < len(idx) else linalg.zeros(len(idx), 0)
        emb = linalg.zeros(n, len(idx))
        for j, k in enumerate(idx):
            emb[k, j] = 1
        c_vectors[p] = [emb.dot(C_local[:, [j]]) for j in range(C_local.shape[1])]
        c_vectors[p + 10] = [emb.dot(ker[:, [j]]) for j in range(ker.shape[1])]
    for p in (0, 1):
        kers = c_vectors.get(p + 10, [])
        images = [Qm.dot(c) for c in c_vectors[1 - p]]
        current = np.concatenate(images, axis=1) if images else linalg.zeros(n, 0)
        r = linalg.rank(current) if images else 0
        for k in kers:
            trial = np.concatenate([current, k], axis=1) if current.shape[1] else k
            rt = linalg.rank(trial)
            if rt > r:
                cols_H.append((k, p))
                current, r = trial, rt
    for p in (0, 1):
        for c in c_vectors[p]:
            cols_C.append((c, p))
            cols_B.append((Qm.dot(c), 1 - p))
    cols = cols_H + cols_B + cols_C
    P = np.concatenate([c for c, _ in cols], axis=1) if cols else linalg.zeros(0, 0)
    Pinv = linalg.inverse(P)
    nh, nb = len(cols_H), len(cols_B)
    hnew = linalg.zeros(n, n)
    for j in range(nb):
        hnew[nh + nb + j, nh + j] = 1
    hmat = P.dot(hnew).dot(Pinv)
    Vr = GradedSpace(tuple(f"{prefix}{k}" for k in range(nh)), tuple(p for _, p in cols_H))
    imat = P[:, :nh]
    pimat = Pinv[:nh, :]
    i = GradedMap(Vr, V, 0, {(): imat} if nh else {})
    pi = GradedMap(V, Vr, 0, {(): pimat} if nh else {})
    h = GradedMap(V, V, 1, {(): hmat})
    return SDR(complex_, Complex.zero(Vr), i, pi, h)


# evolution ----------------------------------------------------------------

@dataclass(frozen=True)
class EvolutionForm:
    """``I(t, dt) = body + dt * one_form`` with ``one_form = -body∘G``."""

    body: GradedMap
    one_form: GradedMap
    var: str
    kind: str
    dt: str = "dt"

    def as_form(self) -> Form:
        return Form(self.body.source, self.body.target, {(): self.body, (self.dt,): self.one_form},
                    {self.dt: (self.var, "u" if self.kind == IDEMPOTENT else "t")})


def evolution_form(H: GradedMap, G: GradedMap, representation: str = IDEMPOTENT, order: int | None = None,
                   var: str | None = None, dt: str = "dt", ring: Ring | None = None) -> EvolutionForm:
    """``exp(-tH)(1 - dt G)`` exactly (idempotent ``H``, in ``u = e^{-t}``) or truncated in ``t``."""
    if H.parity and not H.is_zero():
        raise ParityError("H must be even")
    if G.parity != 1 and not G.is_zero():
        raise ParityError("G must be odd")
    ident = GradedMap.identity(H.source)
    if representation == IDEMPOTENT:
        var = var or "u"
        if not (H @ H - H).is_zero():
            raise PreconditionError("idempotent representation requested but H^2 != H")
        ring = ring or Ring((var,))
        u = Series.var(ring, var)
        body = (ident - H).over(ring) + H.over(ring).scale(u)
    elif representation == TRUNCATED:
        from .graded import exp_truncated

        var = var or "t"
        if order is None:
            raise ValueError("truncated representation needs an order")
        ring = ring or Ring((var,), (((var,), order),))
        body = exp_truncated(H, var, order, ring)
    else:
        raise ValueError(f"unknown representation {representation!r}")
    return EvolutionForm(body, -(body @ G.over(ring)), var, representation, dt)


def closedness_residual(evo: EvolutionForm, Q: GradedMap) -> Form:
    """``(d + Q) I``; zero for every supersymmetric pair ``H = {Q, G}``.

    In the truncated representation ``d/dt`` loses one order, so the top
    retained order is discarded.
    """
    f = evo.as_form()
    res = f.d() + f.q_action(Q, Q)
    if evo.kind == TRUNCATED:
        cutoff = evo.body.ring.cutoff(evo.var)
        res = res.map_components(lambda x: x.below((evo.var,), cutoff))
    return res


def semigroup_residual(evo: EvolutionForm) -> GradedMap:
    """``body(t1)∘body(t2) - body(t1 + t2)`` (products ``u1 u2`` in the exact form)."""
    var = evo.var
    a, b = var + "1", var + "2"
    if evo.kind == IDEMPOTENT:
        ring = Ring((var, a, b))
        body = evo.body.over(ring)
        b1 = body.subs(var, Series.var(ring, a))
        b2 = body.subs(var, Series.var(ring, b))
        joint = body.subs(var, Series.var(ring, a) * Series.var(ring, b))
    else:
        cutoff = evo.body.ring.cutoff(var)
        ring = Ring((var, a, b), (((var, a, b), cutoff),))
        body = evo.body.over(ring)
        b1 = body.subs(var, Series.var(ring, a))
        b2 = body.subs(var, Series.var(ring, b))
        joint = body.subs(var, Series.var(ring, a) + Series.var(ring, b))
    return (b1 @ b2 - joint).drop_variable(var)


def edge_integral(sdr: SDR) -> GradedMap:
    """``∫_{R+} exp(-t Proj_{V_c} - dt h)``, evaluated from the exact ``u``-form."""
    rep = validate_sdr(sdr)
    if not rep.passed:
        raise PreconditionError(f"invalid SDR: {rep.failed()}")
    evo = evolution_form(sdr.projector_c(), sdr.h, IDEMPOTENT)
    integral = evo.as_form().integrate(evo.dt)
    return integral.component(()).drop_variable(evo.var) if integral.components else GradedMap.zero(sdr.V.space, sdr.V.space, 1)


def limit_at_infinity(sdr: SDR) -> GradedMap:
    """``lim_{t→∞} exp(-t Proj_{V_c}) = i∘pi`` (the ``u = 0`` value)."""
    evo = evolution_form(sdr.projector_c(), sdr.h, IDEMPOTENT)
    return evo.body.subs(evo.var, 0).drop_variable(evo.var)
