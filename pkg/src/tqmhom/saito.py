"""K. Saito's construction for the A-series singularity ``W = x^n``.

Classes of top forms ``g(x) dx`` in the cohomology of ``z d + dW_t∧`` are
written in the reduced basis ``x^{a-1} dx`` (``a = 1..mu``).  Coefficients
live in a ring of parameters ``t_1..t_mu`` truncated at total degree
``order + 2`` together with a Laurent variable ``z``.  All polynomials in
``x`` are coefficient lists, lowest degree first.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .commutativity import ConnectionOneForm, check_commutativity
from .complexes import PreconditionError
from .graded import GradedMap, GradedSpace, StructuralError
from .report import Report
from .series import Ring, Series


@dataclass(frozen=True)
class SaitoData:
    """Truncation data for the versal family ``W_t = x^n + sum_k t_k x^{k-1}``.

    ``order`` is the t-order through which identities are asserted; the
    ring keeps two more orders because the connection involves one
    derivative of the section and ``dA`` another.
    """

    n: int
    order: int = 3
    window: tuple | None = None
    x_bound: int | None = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be at least 3")
        if self.order < 0:
            raise ValueError("negative order")
        c = self.order + 2
        if self.window is None:
            # weighted homogeneity bounds the z-powers well inside this window
            object.__setattr__(self, "window", (-(c + 1), 4 * (c + self.n)))
        if self.x_bound is None:
            object.__setattr__(self, "x_bound", c * max(self.n - 2, 1) + 2 * self.n)

    @property
    def mu(self) -> int:
        return self.n - 1

    @property
    def params(self) -> tuple:
        return tuple(f"t{k}" for k in range(1, self.mu + 1))

    @property
    def ring(self) -> Ring:
        return Ring(self.params + ("z",), ((self.params, self.order + 2),), laurent="z", window=tuple(self.window))

    @property
    def t_ring(self) -> Ring:
        return Ring(self.params, ((self.params, self.order + 2),))

    @property
    def space(self) -> GradedSpace:
        return GradedSpace.from_parities([0] * self.mu, prefix="w")

    def t(self, k: int) -> Series:
        return Series.var(self.ring, f"t{k}")

    def z(self, power: int = 1) -> Series:
        return Series.var(self.ring, "z", power)

    def wt_prime(self) -> list:
        """``W_t' = n x^{n-1} + sum_{k>=2} (k-1) t_k x^{k-2}``."""
        out = [Series(self.ring) for _ in range(self.n)]
        out[self.n - 1] = Series.const(self.ring, self.n)
        for k in range(2, self.mu + 1):
            out[k - 2] = out[k - 2] + self.t(k) * (k - 1)
        return out


def milnor_ring(n: int) -> dict:
    """Basis ``1, x, .., x^{n-2}`` of ``C[x]/(n x^{n-1})`` and its multiplication table.

    ``table[a][b]`` is the coefficient vector of ``x^a x^b``.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    mu = n - 1
    table = []
    for a in range(mu):
        row = []
        for b in range(mu):
            v = [Fraction(0)] * mu
            if a + b < mu:
                v[a + b] = Fraction(1)
            row.append(v)
        table.append(row)
    return {"basis": ["1"] + [f"x^{k}" if k > 1 else "x" for k in range(1, mu)], "mu": mu, "table": table}


def milnor_multiplications(n: int) -> list:
    """The structure constants as matrices ``L_a`` with ``L_a e_b = x^a x^b``."""
    mr = milnor_ring(n)
    mu = mr["mu"]
    mats = []
    for a in range(mu):
        m = linalg.zeros(mu, mu)
        for b in range(mu):
            for c, v in enumerate(mr["table"][a][b]):
                m[c, b] = v
        mats.append(m)
    return mats


# classes ------------------------------------------------------------------

@dataclass(frozen=True)
class CohClass:
    """A reduced class ``sum_a coeffs[a] x^a dx``."""

    data: SaitoData
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.data.mu:
            raise StructuralError("a reduced class has exactly mu coefficients")

    @classmethod
    def zero(cls, data: SaitoData) -> "CohClass":
        return cls(data, tuple(Series(data.ring) for _ in range(data.mu)))

    def __add__(self, other: "CohClass") -> "CohClass":
        return CohClass(self.data, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "CohClass":
        return CohClass(self.data, tuple(-a for a in self.coeffs))

    def __sub__(self, other: "CohClass") -> "CohClass":
        return self + (-other)

    def scale(self, s) -> "CohClass":
        return CohClass(self.data, tuple(a * s for a in self.coeffs))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CohClass):
            return NotImplemented
        return self.data == other.data and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.coeffs)

    def z_part(self, power: int) -> "CohClass":
        zi = self.data.ring.index("z")
        return CohClass(self.data, tuple(Series(a.ring, {e: c for e, c in a.coeffs.items() if e[zi] == power})
                                         for a in self.coeffs))

    def at_z0(self) -> "CohClass":
        return self.z_part(0)

    def min_z_order(self) -> int | None:
        zi = self.data.ring.index("z")
        pows = [e[zi] for a in self.coeffs for e in a.coeffs]
        return min(pows) if pows else None

    def vector(self) -> GradedMap:
        """The class as a column ``W <- k``."""
        one = GradedSpace.from_parities([0], prefix="u")
        return GradedMap.from_series(one, self.data.space, 0, [[a] for a in self.coeffs], self.data.ring)


def _poly(data: SaitoData, f) -> list:
    out = [s if isinstance(s, Series) else Series.const(data.ring, s) for s in f]
    if len(out) > data.x_bound + 1:
        if any(not s.is_zero() for s in out[data.x_bound + 1:]):
            raise ValueError(f"x-degree {len(out) - 1} exceeds the bound {data.x_bound}")
        out = out[:data.x_bound + 1]
    return out


def _at_t0(data: SaitoData, s: Series) -> Series:
    idx = [data.ring.index(p) for p in data.params]
    return Series(s.ring, {e: c for e, c in s.coeffs.items() if not any(e[k] for k in idx)})


def reduce_in_brieskorn(f, data: SaitoData, at_t="formal") -> CohClass:
    """Reduce ``f(x) dx`` modulo the image of ``g -> z g' + W_t' g``.

    Each ``x^m dx`` with ``m >= n-1`` is rewritten with ``q = x^{m-n+1}/n`` as
    ``(x^m - q W_t' - z q') dx``, from the top degree down.  ``at_t=0``
    evaluates the result at ``t = 0``.
    """
    if at_t not in ("formal", 0):
        raise ValueError("at_t must be 'formal' or 0")
    n = data.n
    f = _poly(data, f)
    z = data.z()
    ts = {k: data.t(k) for k in range(2, data.mu + 1)}
    for m in range(len(f) - 1, n - 2, -1):
        c = f[m]
        if c.is_zero():
            continue
        f[m] = Series(data.ring)
        c = c * Fraction(1, n)
        for k in range(2, data.mu + 1):
            f[m - n + k - 1] = f[m - n + k - 1] - c * ts[k] * (k - 1)
        if m - n + 1 >= 1:
            f[m - n] = f[m - n] - c * z * (m - n + 1)
    coeffs = [f[a] if a < len(f) else Series(data.ring) for a in range(data.mu)]
    if at_t == 0:
        coeffs = [_at_t0(data, s) for s in coeffs]
    return CohClass(data, tuple(coeffs))


def saito_differential(g, data: SaitoData) -> list:
    """``(z d + dW_t∧) g = (z g' + W_t' g) dx`` as a polynomial."""
    g = _poly(data, g)
    wp = data.wt_prime()
    out = [Series(data.ring) for _ in range(len(g) + len(wp))]
    z = data.z()
    for j, c in enumerate(g):
        if c.is_zero():
            continue
        if j:
            out[j - 1] = out[j - 1] + c * z * j
        for i, w in enumerate(wp):
            if not w.is_zero():
                out[i + j] = out[i + j] + c * w
    return out


# operators ------------------------------------------------------------------

def _matrix_from_columns(data: SaitoData, columns) -> GradedMap:
    rows = [[columns[b].coeffs[a] for b in range(data.mu)] for a in range(data.mu)]
    return GradedMap.from_series(data.space, data.space, 0, rows, data.ring)


def _monomial(data: SaitoData, m: int) -> list:
    return [0] * m + [1]


def multiplication_operator(data: SaitoData, k: int, at_z0: bool = True) -> GradedMap:
    """Multiplication by ``x^{k-1}`` on reduced classes; at ``z = 0`` this is ``C_k``."""
    cols = []
    for b in range(1, data.mu + 1):
        cls = reduce_in_brieskorn(_monomial(data, k - 1 + b - 1), data)
        cols.append(cls.at_z0() if at_z0 else cls)
    return _matrix_from_columns(data, cols)


def c_operators(data: SaitoData) -> list:
    """``C_1..C_mu`` over the t-ring."""
    return [multiplication_operator(data, k).drop_variable("z") for k in range(1, data.mu + 1)]


def _poly_mul(data, f, g):
    out = [Series(data.ring) for _ in range(len(f) + len(g) - 1)]
    for i, a in enumerate(f):
        if a.is_zero():
            continue
        for j, b in enumerate(g):
            if not b.is_zero():
                out[i + j] = out[i + j] + a * b
    return out


def gm_frame(data: SaitoData) -> GradedMap:
    """Columns: reduced ``exp(-(1/z) sum_k t_k x^{k-1}) x^{b-1} dx``."""
    zinv = data.z(-1)
    P = [-(data.t(k) * zinv) for k in range(1, data.mu + 1)]
    E = [Series.const(data.ring, 1)]
    term = [Series.const(data.ring, 1)]
    for j in range(1, data.order + 3):
        term = [c * Fraction(1, j) for c in _poly_mul(data, term, P)]
        while term and term[-1].is_zero():
            term.pop()
        if not term:
            break
        E = [(E[i] if i < len(E) else Series(data.ring)) + (term[i] if i < len(term) else Series(data.ring))
             for i in range(max(len(E), len(term)))]
    cols = []
    for b in range(1, data.mu + 1):
        cols.append(reduce_in_brieskorn([Series(data.ring)] * (b - 1) + E, data))
    return _matrix_from_columns(data, cols)


def gm_connection(data: SaitoData) -> dict:
    """``B_k`` with ``nabla^GM_k e = e B_k`` in the reduced basis, ``nabla^GM = d + z^{-1} Phi_k``."""
    zinv = data.z(-1)
    return {f"t{k}": multiplication_operator(data, k, at_z0=False).scale(zinv) for k in range(1, data.mu + 1)}


# sections -----------------------------------------------------------------------

@dataclass(frozen=True)
class SectionS:
    """``S: H_{t,0} -> H_{t,z}`` as a matrix with ``z >= 0`` and ``S|_{z=0} = id``."""

    data: SaitoData
    matrix: GradedMap

    def __post_init__(self):
        zi = self.data.ring.index("z")
        M = self.matrix
        if M.ring != self.data.ring:
            object.__setattr__(self, "matrix", M := M.over(self.data.ring))
        if any(e[zi] < 0 for e in M.coeffs):
            raise ValueError("a section has no negative powers of z")
        zero = GradedMap(M.source, M.target, 0, {e: m for e, m in M.coeffs.items() if e[zi] == 0}, M.ring, check=False)
        if not (zero - GradedMap.identity(self.data.space, self.data.ring)).is_zero():
            raise PreconditionError("pi∘S = id fails: S at z = 0 is not the identity")

    @classmethod
    def monomial(cls, data: SaitoData) -> "SectionS":
        return cls(data, GradedMap.identity(data.space, data.ring))

    def __call__(self, h: CohClass) -> CohClass:
        v = self.matrix @ h.vector()
        return CohClass(self.data, tuple(v.entry(a, 0) for a in range(self.data.mu)))


def _class_of(data, h) -> CohClass:
    return h if isinstance(h, CohClass) else reduce_in_brieskorn(h, data)


def _times(data, k, h: CohClass) -> CohClass:
    """``Phi_k h`` re-reduced, for a class given by its reduced representative."""
    poly = [Series(data.ring)] * (k - 1) + list(h.coeffs)
    return reduce_in_brieskorn(poly, data)


def saito_transport(S: SectionS, data: SaitoData, epsilon: dict, h) -> CohClass:
    """First-order transport ``[w + z^{-1}(-sum e_k Phi_k + S pi(sum e_k Phi_k)) w]``.

    ``epsilon`` maps ``k`` (1-based) to the step in direction ``t_k``; ``h`` is
    a class or a polynomial representative.  Every top form is closed for
    ``dW_t∧`` in one variable, so any representative is admissible.
    """
    h = _class_of(data, h)
    out = h
    zinv = data.z(-1)
    for k, e in sorted(epsilon.items()):
        if not 1 <= k <= data.mu:
            raise ValueError(f"direction {k} out of range")
        if not e:
            continue
        phi = _times(data, k, h)
        bracket = (S(phi.at_z0()) - phi).scale(zinv)
        out = out + bracket.scale(e)
    return out


def gm_transport(data: SaitoData, epsilon: dict, h) -> CohClass:
    """First-order Gauss-Manin transport ``[w - z^{-1} sum e_k Phi_k w]``."""
    h = _class_of(data, h)
    out = h
    for k, e in sorted(epsilon.items()):
        if e:
            out = out - _times(data, k, h).scale(data.z(-1) * e)
    return out


def _one_form(data: SaitoData, comps: dict) -> ConnectionOneForm:
    return ConnectionOneForm(data.params, comps)


def section_connection(S: SectionS, data: SaitoData) -> ConnectionOneForm:
    """``Gamma_k = S^{-1} d_k S + S^{-1} B_k S - z^{-1} C_k``, the Saito connection in the frame ``S(e_a)``.

    The section is parallel, hence good, when ``Gamma`` does not depend on ``z``.
    """
    P, Pinv = S.matrix, S.matrix.inverse()
    B = gm_connection(data)
    zinv = data.z(-1)
    comps = {}
    for k in range(1, data.mu + 1):
        p = f"t{k}"
        C = multiplication_operator(data, k)
        comps[p] = Pinv @ P.diff(p) + Pinv @ B[p] @ P - C.scale(zinv)
    return _one_form(data, comps)


def radial_gauge(gamma: ConnectionOneForm, data: SaitoData) -> GradedMap:
    """``g`` with ``g(0) = id`` and ``E g = -(sum_k t_k Gamma_k) g`` for the Euler field ``E``.

    When ``Gamma`` is flat this is the solution of ``dg + Gamma g = 0``.
    """
    ring = data.ring
    Y = None
    for p in data.params:
        term = gamma[p].scale(Series.var(ring, p))
        Y = term if Y is None else Y + term
    parts = [GradedMap.identity(data.space, ring)]
    for r in range(1, data.order + 3):
        acc = GradedMap.zero(data.space, data.space, 0, ring)
        for s in range(1, r + 1):
            acc = acc + Y.part(data.params, s) @ parts[r - s]
        parts.append(acc.part(data.params, r).scale(Fraction(-1, r)))
    g = parts[0]
    for x in parts[1:]:
        g = g + x
    return g


def connection_in_gm_frame(S: SectionS, data: SaitoData) -> ConnectionOneForm:
    """``Ã = z P^{-1} dP + P^{-1} (sum_k dt_k Phi_k) P`` in the frame ``P = S g``.

    ``g`` is the radial gauge of :func:`section_connection`, and ``Phi_k`` is
    the full multiplication by ``x^{k-1}`` on ``H_{t,z}``.  In this frame the
    Gauss-Manin connection reads ``d + z^{-1} Ã``; for a good section ``Ã``
    is ``z``-independent and ``Ã = g^{-1} C g``.
    """
    g = radial_gauge(section_connection(S, data), data)
    P = S.matrix @ g
    Pinv = P.inverse()
    z = data.z()
    comps = {}
    for k in range(1, data.mu + 1):
        p = f"t{k}"
        Phi = multiplication_operator(data, k, at_z0=False)
        comps[p] = (Pinv @ P.diff(p)).scale(z) + Pinv @ Phi @ P
    return _one_form(data, comps)


def frame_connection(M: GradedMap, data: SaitoData) -> ConnectionOneForm:
    """The same formula in an arbitrary frame ``M``; it vanishes for the Gauss-Manin flat frame."""
    Minv = M.inverse()
    z = data.z()
    return _one_form(data, {
        f"t{k}": (Minv @ M.diff(f"t{k}")).scale(z) + Minv @ multiplication_operator(data, k, at_z0=False) @ M
        for k in range(1, data.mu + 1)})


def z_dependence(A: ConnectionOneForm) -> dict:
    """Components of ``A`` carrying a nonzero power of ``z``."""
    out = {}
    for p, x in A.components.items():
        zi = x.ring.index("z")
        r = GradedMap(x.source, x.target, 0, {e: m for e, m in x.coeffs.items() if e[zi] != 0}, x.ring, check=False)
        if not r.is_zero():
            out[p] = r
    return out


def check_good_section(S: SectionS, data: SaitoData) -> Report:
    A = connection_in_gm_frame(S, data)
    rep = Report()
    rep.add("Ã z-independent", {p: x.below(data.params, data.order + 1) for p, x in z_dependence(A).items()}, "saito")
    rep.extend(check_commutativity(A, data.order))
    return rep


def constant_connection(A: ConnectionOneForm) -> ConnectionOneForm:
    """``A`` at ``z = 0`` over the t-ring."""
    return ConnectionOneForm(A.params, {p: x.drop_variable("z") for p, x in A.components.items()})


@dataclass
class GoodSectionResult:
    section: SectionS | None
    obstruction_order: int | None = None
    detail: str = ""

    @property
    def found(self) -> bool:
        return self.section is not None


def find_good_section(data: SaitoData, degree_bound: int = 1) -> GoodSectionResult:
    """Solve for ``S = id + sum_{j=1..degree_bound} z^j S_j(t)`` order by order in ``t``.

    The order-``r`` part ``D`` of ``S`` enters the order-``(r-1)`` part of the
    section connection only through ``dD``, so each step integrates the
    ``z``-dependent part of that one-form.  The system is solved per power of
    ``z`` and matrix entry over the degree-``r`` monomials in lexicographic
    order, with free variables set to zero (there are none for ``r >= 1``);
    a non-closed right-hand side is an obstruction.
    """
    mu, ring = data.mu, data.ring
    params = data.params
    zi = ring.index("z")
    tidx = [ring.index(p) for p in params]
    S = SectionS.monomial(data)
    for r in range(1, data.order + 3):
        gamma = section_connection(S, data)
        rhs = {}
        for k, p in enumerate(params):
            for e, m in gamma[p].coeffs.items():
                if e[zi] != 0 and sum(e[i] for i in tidx) == r - 1:
                    rhs[(k, e)] = m
        if not rhs:
            continue
        zpows = sorted({e[zi] for _, e in rhs})
        bad = [j for j in zpows if not 1 <= j <= degree_bound]
        if bad:
            return GoodSectionResult(None, r, f"z^{bad[0]} term outside the allowed section degrees")
        monos = _monomials(mu, r)
        lower = _monomials(mu, r - 1)
        row_of = {(k, b): i for i, (k, b) in enumerate((k, b) for k in range(mu) for b in lower)}
        L = linalg.zeros(len(row_of), len(monos))
        for c, a in enumerate(monos):
            for k in range(mu):
                if a[k]:
                    b = a[:k] + (a[k] - 1,) + a[k + 1:]
                    L[row_of[(k, b)], c] = a[k]
        update = {}
        for j in zpows:
            b_vec = linalg.zeros(len(row_of), mu * mu)
            for (k, e), m in rhs.items():
                if e[zi] == j:
                    b_vec[row_of[(k, tuple(e[i] for i in tidx))]] = -m.reshape(-1)
            sol = linalg.solve(L, b_vec)
            if sol is None:
                return GoodSectionResult(None, r, f"the z^{j} part at t-order {r - 1} is not closed")
            for c, a in enumerate(monos):
                m = sol[c].reshape(mu, mu)
                if any(m.reshape(-1)):
                    e = [0] * ring.nvars
                    for i, ai in zip(tidx, a):
                        e[i] = ai
                    e[zi] = j
                    update[tuple(e)] = m
        S = SectionS(data, S.matrix + GradedMap(data.space, data.space, 0, update, ring))
    return GoodSectionResult(S)


def _monomials(nvars: int, degree: int) -> list:
    """Exponent tuples of the given total degree, in lexicographic order."""
    if nvars == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in _monomials(nvars - 1, degree - first):
            out.append((first,) + rest)
    return out
