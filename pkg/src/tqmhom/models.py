"""Test models: random SDRs, dg Lie inputs, polyvector and strong-Hodge models."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .complexes import SDR, Complex, sdr_from_complex
from .graded import GradedMap, GradedSpace
from .series import Ring
from .transfer import OperationSet


def eps_ring(order: int, eps: str = "eps") -> Ring:
    return Ring((eps,), (((eps,), order),))


def random_even_invertible(rng: random.Random, parities, spread: int = 2) -> np.ndarray:
    """Product of unitriangular blocks inside each parity sector (determinant 1)."""
    n = len(parities)
    out = linalg.eye(n)
    for p in (0, 1):
        idx = [k for k in range(n) if parities[k] == p]
        m = len(idx)
        if m < 2:
            continue
        L, U = linalg.eye(m), linalg.eye(m)
        for a in range(m):
            for b in range(a):
                L[a, b] = Fraction(rng.randint(-spread, spread))
                U[b, a] = Fraction(rng.randint(-spread, spread))
        block = L.dot(U)
        for a, ra in enumerate(idx):
            for b, rb in enumerate(idx):
                out[ra, rb] = block[a, b]
    return out


def random_sdr(rng: random.Random, dim: int, n_cohomology: int | None = None) -> SDR:
    """A random SDR of total dimension ``dim`` with dense ``Q, h, i, pi``."""
    if n_cohomology is None:
        n_cohomology = rng.choice([k for k in range(1, dim + 1) if (dim - k) % 2 == 0])
    if (dim - n_cohomology) % 2:
        raise ValueError("dim - n_cohomology must be even")
    nc = (dim - n_cohomology) // 2
    ph = [rng.randint(0, 1) for _ in range(n_cohomology)]
    pc = [rng.randint(0, 1) for _ in range(nc)]
    canon = ph + [1 - p for p in pc] + pc
    order = list(range(dim))
    rng.shuffle(order)
    parities = [0] * dim
    S = linalg.zeros(dim, dim)
    for k, pos in enumerate(order):
        parities[pos] = canon[k]
        S[pos, k] = 1
    T = random_even_invertible(rng, parities).dot(S)
    Tinv = linalg.inverse(T)
    Q0, h0 = linalg.zeros(dim, dim), linalg.zeros(dim, dim)
    for j in range(nc):
        b, c = n_cohomology + j, n_cohomology + nc + j
        Q0[b, c] = 1
        h0[c, b] = 1
    V = GradedSpace(tuple(f"e{k}" for k in range(dim)), tuple(parities))
    Vr = GradedSpace(tuple(f"h{k}" for k in range(n_cohomology)), tuple(ph))
    Q = GradedMap(V, V, 1, {(): T.dot(Q0).dot(Tinv)})
    h = GradedMap(V, V, 1, {(): T.dot(h0).dot(Tinv)})
    i = GradedMap(Vr, V, 0, {(): T[:, :n_cohomology]})
    pi = GradedMap(V, Vr, 0, {(): Tinv[:n_cohomology, :]})
    return SDR(Complex(V, Q), Complex.zero(Vr), i, pi, h)


def random_closed_perturbation(rng: random.Random, sdr: SDR, spread: int = 2) -> GradedMap:
    """``φ_1 = {Q, Y}`` for a random even ``Y``; odd, ``Q``-closed, ``i pi φ_1 i pi = 0``."""
    V = sdr.V.space
    n = V.dim
    Y = linalg.zeros(n, n)
    for a in range(n):
        for b in range(n):
            if V.parity[a] == V.parity[b]:
                Y[a, b] = Fraction(rng.randint(-spread, spread))
    Y = GradedMap(V, V, 0, {(): Y})
    Q = sdr.Q
    return Q @ Y - Y @ Q


# super Lie algebra gl(p|q) -------------------------------------------------

def _elementary(p: int, q: int):
    par = [0] * p + [1] * q
    basis = [(a, b) for a in range(p + q) for b in range(p + q)]
    return par, basis


def dgla_linfty(rng: random.Random, p: int = 1, q: int = 1, eps_order: int = 4, spread: int = 2,
                shift_sign: int = 1, perturb: bool = True):
    """An L∞ input from ``gl(p|q)`` with differential ``[D, -]``, shifted to ``V = ΠL``.

    The differential comes from ``D = D_0 + eps D_1`` with ``D_0, D_1`` odd, rank one
    and in the upper-right block, so ``D² = 0``.  The brackets are
    ``m_1(sx) = -s[D,x]`` and ``m_2(sx, sy) = (-1)^{|x|} s[x,y]`` (scaled by
    ``eps``), transported by a random even change of basis.  The SDR contracts
    onto the cohomology of the ``D_0`` part; ``eps D_1`` (if ``perturb``) and
    ``m_2`` are returned as the operation set.
    """
    par, basis = _elementary(p, q)
    N = len(basis)
    lpar = [(par[a] + par[b]) % 2 for a, b in basis]
    vpar = [1 - x for x in lpar]
    idx = {e: k for k, e in enumerate(basis)}

    def bracket(x, y):
        (a, b), (c, d) = basis[x], basis[y]
        out = {}
        if b == c:
            out[idx[(a, d)]] = out.get(idx[(a, d)], 0) + 1
        if d == a:
            s = -1 if lpar[x] * lpar[y] % 2 == 0 else 1
            out[idx[(c, b)]] = out.get(idx[(c, b)], 0) + s
        return out

    def rank_one():
        # upper-right block only, so any two such matrices multiply to zero
        u = [Fraction(rng.randint(-spread, spread)) for _ in range(p)]
        v = [Fraction(rng.randint(-spread, spread)) for _ in range(q)]
        u[0], v[0] = u[0] or 1, v[0] or 1
        return {idx[(a, p + b)]: u[a] * v[b] for a in range(p) for b in range(q) if u[a] * v[b]}

    def ad(Dvec):
        out = linalg.zeros(N, N)
        for x in range(N):
            for dk, dc in Dvec.items():
                for k, c in bracket(dk, x).items():
                    out[k, x] -= shift_sign * dc * c
        return out

    V = GradedSpace(tuple(f"s{a}{b}" for a, b in basis), tuple(vpar))
    M2 = linalg.zeros(N, N * N)
    for x in range(N):
        for y in range(N):
            sgn = -1 if lpar[x] else 1
            for k, c in bracket(x, y).items():
                M2[k, x * N + y] += sgn * c
    T = random_even_invertible(rng, vpar)
    Tinv = linalg.inverse(T)
    ring = eps_ring(eps_order)

    def conj(m):
        return linalg.matmul(linalg.matmul(T, m), Tinv)

    Q = GradedMap(V, V, 1, {(): conj(ad(rank_one()))})
    ops = {2: GradedMap(V.power(2), V, 1, {(1,): linalg.matmul(linalg.matmul(T, M2), linalg.kron(Tinv, Tinv))}, ring)}
    if perturb:
        ops[1] = GradedMap(V, V, 1, {(1,): conj(ad(rank_one()))}, ring)
    sdr = sdr_from_complex(Complex(V, Q))
    return sdr, OperationSet(V, ops)


def random_mc_instance(rng: random.Random, order: int = 6, dims=(6, 8), max_tries: int = 200):
    """A random SDR with a Maurer-Cartan element lifted to ``order``.

    Draws ``φ_1 = {Q, Y}`` and lifts with the homotopy on ``End(V)``, redrawing
    whenever an obstruction appears or ``φ_2`` vanishes.  Returns
    ``(sdr, [φ_1, ..., φ_order])``.
    """
    from .transfer import ObstructionError, lift_mc

    for _ in range(max_tries):
        d = rng.randint(*dims)
        sdr = random_sdr(rng, d, d % 2 + 2)
        phi1 = random_closed_perturbation(rng, sdr, spread=1)
        try:
            phis = lift_mc(sdr, phi1, order)
        except ObstructionError:
            continue
        if len(phis) > 1 and phis[1].is_zero():
            continue
        return sdr, phis
    raise RuntimeError("no unobstructed instance found")


# polyvector fields of a univariate singularity ------------------------------------

def _poly_divmod(f, g):
    """Quotient and remainder of coefficient lists (lowest degree first)."""
    f = [Fraction(c) for c in f]
    g = [Fraction(c) for c in g]
    while g and g[-1] == 0:
        g.pop()
    d = len(g) - 1
    q = [Fraction(0)] * max(len(f) - d, 1)
    r = list(f)
    for k in range(len(f) - 1, d - 1, -1):
        c = r[k] / g[d]
        if c:
            q[k - d] = c
            for j in range(d + 1):
                r[k - d + j] -= c * g[j]
    return q, r[:d]


@dataclass(frozen=True)
class PolyvectorModel:
    """Polyvector fields ``f(x) + g(x)θ`` truncated at x-degree ``cutoff``.

    Even part ``x^j`` with ``j < cutoff``, odd part ``x^jθ`` with
    ``j < cutoff - deg W'`` so that ``Q = W'(x)∂_θ`` stays inside the basis.
    Multiplication operators are truncated; ``window`` holds the odd vectors
    far enough from the cutoff for second-order identities to be exact.
    """

    wprime: tuple
    cutoff: int
    hodge: "object"
    multiplications: tuple

    @property
    def mu(self) -> int:
        return len(self.wprime) - 1

    def degree(self, k: int) -> int:
        ne = self.cutoff
        return k if k < ne else k - ne

    def bcov(self):
        """The same model as a supercommutative algebra with ``x^a θ^e`` products."""
        from .bcov import BCOVData

        h = self.hodge
        V = h.C
        d = self.mu
        ne, no = self.cutoff, self.cutoff - d
        n = V.dim
        m = linalg.zeros(n, n * n)
        for a in range(n):
            for b in range(n):
                ja, jb = self.degree(a), self.degree(b)
                oa, ob = a >= ne, b >= ne
                if oa and ob:
                    continue
                j = ja + jb
                if oa or ob:
                    if j < no:
                        m[ne + j, a * n + b] = 1
                elif j < ne:
                    m[j, a * n + b] = 1
        window = tuple(k for k in range(n) if 3 * self.degree(k) + 2 * d < no)
        return BCOVData(V, GradedMap(V.power(2), V, 0, {(): m}), h.Q, h.G_minus, h.G, h.i, h.pi, 0, window)

    def family(self, order: int, params=None):
        from .commutativity import CommFamily

        params = tuple(params or (f"t{a + 1}" for a in range(self.mu)))
        return CommFamily.linear(list(self.multiplications[:len(params)]), params, order)


def polyvector_model(wprime, cutoff: int) -> PolyvectorModel:
    from .commutativity import HodgeData

    wprime = [Fraction(c) for c in wprime]
    while wprime and wprime[-1] == 0:
        wprime.pop()
    d = len(wprime) - 1
    if d < 1:
        raise ValueError("W' must have positive degree")
    if cutoff <= d:
        raise ValueError(f"cutoff {cutoff} must exceed deg W' = {d}: Q would leave the basis")
    ne, no = cutoff, cutoff - d
    names = tuple(f"x{j}" for j in range(ne)) + tuple(f"x{j}θ" for j in range(no))
    V = GradedSpace(names, (0,) * ne + (1,) * no)
    n = ne + no
    Q, G, Gm = linalg.zeros(n, n), linalg.zeros(n, n), linalg.zeros(n, n)
    for j in range(no):
        for k, w in enumerate(wprime):
            Q[j + k, ne + j] += w
        if j:
            Gm[j - 1, ne + j] = j
    for j in range(ne):
        f = [0] * j + [1]
        q, _ = _poly_divmod(f, wprime)
        for k, c in enumerate(q):
            if c:
                G[ne + k, j] = c
    W = GradedSpace(tuple(f"x{k}" for k in range(d)), (0,) * d)
    imat, pimat = linalg.zeros(n, d), linalg.zeros(d, n)
    for k in range(d):
        imat[k, k] = 1
    for j in range(ne):
        _, r = _poly_divmod([0] * j + [1], wprime)
        for k, c in enumerate(r):
            pimat[k, j] = c
    mults = []
    for a in range(d):
        M = linalg.zeros(n, n)
        for j in range(ne - a):
            M[j + a, j] = 1
        for j in range(no - a):
            M[ne + j + a, ne + j] = 1
        mults.append(GradedMap(V, V, 0, {(): M}))
    window = tuple(range(ne)) + tuple(ne + j for j in range(no) if j + 2 * (d - 1) < no)
    hodge = HodgeData(
        Complex(V, GradedMap(V, V, 1, {(): Q})),
        GradedMap(V, V, 1, {(): G}),
        GradedMap(V, V, 1, {(): Gm}),
        GradedMap(W, V, 0, {(): imat}),
        GradedMap(V, W, 0, {(): pimat}),
        window,
    )
    return PolyvectorModel(tuple(wprime), cutoff, hodge, tuple(mults))


# a finite model with the strong Hodge property ---------------------------------------

def milnor_multiplications(n: int):
    """Multiplication by ``x^a`` on ``Q[x]/(x^{n-1})``, ``a = 0..n-2``."""
    mu = n - 1
    out = []
    for a in range(mu):
        M = linalg.zeros(mu, mu)
        for j in range(mu - a):
            M[j + a, j] = 1
        out.append(M)
    return out


def strong_hodge_model(n: int = 3, beta=1, gamma=1, delta=1, rng: random.Random | None = None, order: int = 4):
    """Strong-Hodge data ``M ⊗ V_0`` with a simplified commutative family.

    ``V_0`` has cohomology ``w1, w2`` and one acyclic square
    ``y -> b = Qy``, ``c = G₋y -> d = Qc`` (so ``G₋b = -d``); ``G`` inverts
    ``Q``.  ``U_0`` sends ``w1 -> beta b + delta w2`` and ``c -> gamma w2``; it
    commutes with ``Q`` and squares to zero, and ``U_0 G₋ U_0 = 0``.  The
    family is ``U = sum_a t_a C_a ⊗ U_0`` with ``C_a`` the Milnor-ring
    multiplications of ``x^n``.  An optional ``rng`` applies a random even
    change of basis.
    """
    from .commutativity import CommFamily, HodgeData

    beta, gamma, delta = Fraction(beta), Fraction(gamma), Fraction(delta)
    V0 = GradedSpace(("w1", "w2", "y", "b", "c", "d"), (0, 0, 1, 0, 0, 1))
    w1, w2, y, b, c, d = range(6)

    def op(entries, parity, src=V0, tgt=V0):
        M = linalg.zeros(tgt.dim, src.dim)
        for (r, col), v in entries.items():
            M[r, col] = Fraction(v)
        return GradedMap(src, tgt, parity, {(): M})

    Q0 = op({(b, y): 1, (d, c): 1}, 1)
    G0 = op({(y, b): 1, (c, d): 1}, 1)
    Gm0 = op({(c, y): 1, (d, b): -1}, 1)
    U0 = op({(b, w1): beta, (w2, w1): delta, (w2, c): gamma}, 0)
    W0 = GradedSpace(("w1", "w2"), (0, 0))
    i0 = op({(w1, 0): 1, (w2, 1): 1}, 0, W0, V0)
    pi0 = op({(0, w1): 1, (1, w2): 1}, 0, V0, W0)
    mu = n - 1
    M = GradedSpace(tuple(f"x{k}" for k in range(mu)), (0,) * mu)
    one = GradedMap.identity(M)
    Q, G, Gm = one.tensor(Q0), one.tensor(G0), one.tensor(Gm0)
    i, pi = one.tensor(i0), one.tensor(pi0)
    Us = [GradedMap(M, M, 0, {(): C}).tensor(U0) for C in milnor_multiplications(n)]
    if rng is not None:
        V = Q.source
        T = random_even_invertible(rng, V.parity)
        Tinv = linalg.inverse(T)
        Tm, Ti = GradedMap(V, V, 0, {(): T}), GradedMap(V, V, 0, {(): Tinv})
        Q, G, Gm = Tm @ Q @ Ti, Tm @ G @ Ti, Tm @ Gm @ Ti
        i, pi = Tm @ i, pi @ Ti
        Us = [Tm @ X @ Ti for X in Us]
    hodge = HodgeData(Complex(Q.source, Q), G, Gm, i, pi)
    params = tuple(f"t{a + 1}" for a in range(mu))
    return hodge, CommFamily.linear(Us, params, order)
