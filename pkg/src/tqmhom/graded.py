"""Z/2-graded spaces and parity-carrying linear maps with series entries.

A :class:`GradedMap` stores its matrix as a finite map from exponent
vectors of a :class:`~tqmhom.series.Ring` to exact object matrices, i.e.
as a matrix-valued power series.  ``entry(r, c)`` recovers the scalar
:class:`~tqmhom.series.Series` in position ``(r, c)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial

import numpy as np

from . import linalg
from .series import Ring, Series, add_exp, monomial_order

TRIVIAL = Ring()


class StructuralError(ValueError):
    """Shapes, spaces or wiring do not fit together."""


class ParityError(ValueError):
    """A map or entry violates the parity bookkeeping."""


@dataclass(frozen=True)
class GradedSpace:
    basis: tuple
    parity: tuple[int, ...]
    degree: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(self.basis))
        object.__setattr__(self, "parity", tuple(int(p) % 2 for p in self.parity))
        if len(self.basis) != len(self.parity):
            raise StructuralError("basis and parity lengths differ")
        if self.degree is not None:
            object.__setattr__(self, "degree", tuple(self.degree))
            if any((d - p) % 2 for d, p in zip(self.degree, self.parity)):
                raise ParityError("degree and parity disagree mod 2")

    @classmethod
    def from_parities(cls, parities, prefix="e") -> "GradedSpace":
        return cls(tuple(f"{prefix}{k}" for k in range(len(parities))), tuple(parities))

    @classmethod
    def unit(cls) -> "GradedSpace":
        return cls(("1",), (0,))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def tensor(self, other: "GradedSpace") -> "GradedSpace":
        basis = tuple(_join(a, b) for a, b in product(self.basis, other.basis))
        parity = tuple((p + q) % 2 for p, q in product(self.parity, other.parity))
        degree = None
        if self.degree is not None and other.degree is not None:
            degree = tuple(p + q for p, q in product(self.degree, other.degree))
        return GradedSpace(basis, parity, degree)

    def power(self, n: int) -> "GradedSpace":
        out = GradedSpace.unit()
        for _ in range(n):
            out = _tensor_space(out, self)
        return out

    def direct_sum(self, other: "GradedSpace") -> "GradedSpace":
        degree = None
        if self.degree is not None and other.degree is not None:
            degree = self.degree + other.degree
        return GradedSpace(self.basis + other.basis, self.parity + other.parity, degree)


def _tensor_space(a: GradedSpace, b: GradedSpace) -> GradedSpace:
    if a == GradedSpace.unit():
        return b
    if b == GradedSpace.unit():
        return a
    return a.tensor(b)


def _join(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return a + b


def _unify(r1: Ring, r2: Ring) -> Ring:
    if r1 == r2:
        return r1
    if not r1.variables:
        return r2
    if not r2.variables:
        return r1
    if set(r1.variables) <= set(r2.variables):
        return r2
    if set(r2.variables) <= set(r1.variables):
        return r1
    raise StructuralError(f"incompatible rings {r1.variables} and {r2.variables}")


def _nonzero(m: np.ndarray) -> bool:
    if m.dtype != object:
        return bool(m.any())
    return any(x for x in m.flat)


class GradedMap:
    """A parity-homogeneous linear map ``source -> target`` over a series ring."""

    __slots__ = ("source", "target", "parity", "ring", "coeffs")

    def __init__(self, source: GradedSpace, target: GradedSpace, parity: int, coeffs, ring: Ring = TRIVIAL, check: bool = True):
        self.source = source
        self.target = target
        self.parity = int(parity) % 2
        self.ring = ring
        if isinstance(coeffs, np.ndarray) or isinstance(coeffs, list):
            coeffs = {ring.zero_exp: linalg.as_exact(coeffs).reshape(target.dim, source.dim)}
        clean = {}
        for e, m in coeffs.items():
            e = tuple(e)
            if m.shape != (target.dim, source.dim):
                raise StructuralError(f"matrix shape {m.shape} != {(target.dim, source.dim)}")
            if not ring.admits(e):
                continue
            clean[e] = clean[e] + m if e in clean else m
        self.coeffs = {e: m for e, m in clean.items() if _nonzero(m)}
        if check:
            self._check_parity()

    def _check_parity(self):
        pt = np.array(self.target.parity, dtype=int)
        ps = np.array(self.source.parity, dtype=int)
        bad = (pt[:, None] + ps[None, :] + self.parity) % 2 == 1
        if not bad.any():
            return
        for m in self.coeffs.values():
            if np.count_nonzero(m[bad]):
                raise ParityError("nonzero entry between basis elements of the wrong parity")

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, source, target, parity=0, ring: Ring = TRIVIAL) -> "GradedMap":
        return cls(source, target, parity, {}, ring)

    @classmethod
    def identity(cls, space: GradedSpace, ring: Ring = TRIVIAL) -> "GradedMap":
        return cls(space, space, 0, {ring.zero_exp: linalg.eye(space.dim)}, ring, check=False)

    @classmethod
    def from_series(cls, source, target, parity, entries, ring: Ring) -> "GradedMap":
        """Build from a nested list of Series/scalars (rows of the target)."""
        coeffs: dict = {}
        for r, row in enumerate(entries):
            for c, s in enumerate(row):
                s = s if isinstance(s, Series) else Series.const(ring, s)
                for e, v in s.coeffs.items():
                    if e not in coeffs:
                        coeffs[e] = linalg.zeros(target.dim, source.dim)
                    coeffs[e][r, c] += v
        return cls(source, target, parity, coeffs, ring)

    def over(self, ring: Ring) -> "GradedMap":
        """Re-express over a ring whose variables include this map's."""
        if ring == self.ring:
            return self
        pos = [ring.index(v) for v in self.ring.variables]
        coeffs = {}
        for e, m in self.coeffs.items():
            e2 = [0] * ring.nvars
            for k, p in zip(pos, e):
                e2[k] = p
            coeffs[tuple(e2)] = m
        return GradedMap(self.source, self.target, self.parity, coeffs, ring, check=False)

    # accessors ----------------------------------------------------------
    @property
    def shape(self):
        return (self.target.dim, self.source.dim)

    def coefficient(self, exp=None) -> np.ndarray:
        exp = self.ring.zero_exp if exp is None else tuple(exp)
        m = self.coeffs.get(exp)
        return linalg.zeros(*self.shape) if m is None else m

    def constant(self) -> "GradedMap":
        return GradedMap(self.source, self.target, self.parity, {self.ring.zero_exp: self.coefficient()}, self.ring, check=False)

    def entry(self, r: int, c: int) -> Series:
        return Series(self.ring, {e: m[r, c] for e, m in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def nonzero_entries(self):
        """Sorted ``(row, col, Series)`` triples for reporting."""
        cells = sorted({(r, c) for m in self.coeffs.values() for r, c in zip(*np.nonzero(m != 0))})
        return [(int(r), int(c), self.entry(r, c)) for r, c in cells]

    # arithmetic ---------------------------------------------------------
    def _pair(self, other: "GradedMap"):
        ring = _unify(self.ring, other.ring)
        return self.over(ring), other.over(ring), ring

    def __add__(self, other: "GradedMap") -> "GradedMap":
        if isinstance(other, (int, Fraction)) and other == 0:
            return self
        if self.source != other.source or self.target != other.target:
            raise StructuralError("adding maps between different spaces")
        a, b, ring = self._pair(other)
        if a.parity != b.parity and not (a.is_zero() or b.is_zero()):
            raise ParityError("adding maps of different parity")
        parity = a.parity if not a.is_zero() else b.parity
        out = dict(a.coeffs)
        for e, m in b.coeffs.items():
            out[e] = out[e] + m if e in out else m
        return GradedMap(a.source, a.target, parity, out, ring, check=False)

    __radd__ = __add__

    def __neg__(self) -> "GradedMap":
        return GradedMap(self.source, self.target, self.parity, {e: -m for e, m in self.coeffs.items()}, self.ring, check=False)

    def __sub__(self, other: "GradedMap") -> "GradedMap":
        return self + (-other)

    def scale(self, s) -> "GradedMap":
        """Multiply by a scalar or by a Series (a central even element)."""
        if isinstance(s, Series):
            ring = _unify(self.ring, s.ring)
            a = self.over(ring)
            s = s if s.ring == ring else _series_over(s, ring)
            out: dict = {}
            for e1, c in s.coeffs.items():
                for e2, m in a.coeffs.items():
                    e = add_exp(e1, e2)
                    if ring.admits(e):
                        out[e] = out[e] + c * m if e in out else c * m
            return GradedMap(self.source, self.target, self.parity, out, ring, check=False)
        return GradedMap(self.source, self.target, self.parity, {e: m * s for e, m in self.coeffs.items()}, self.ring, check=False)

    def __mul__(self, s):
        return self.scale(s)

    __rmul__ = __mul__

    def __matmul__(self, other: "GradedMap") -> "GradedMap":
        if self.source != other.target:
            raise StructuralError("composition: source/target mismatch")
        a, b, ring = self._pair(other)
        out: dict = {}
        for e1, m1 in a.coeffs.items():
            for e2, m2 in b.coeffs.items():
                e = add_exp(e1, e2)
                if ring.admits(e):
                    prod = linalg.matmul(m1, m2)
                    out[e] = out[e] + prod if e in out else prod
        return GradedMap(other.source, self.target, a.parity + b.parity, out, ring, check=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedMap):
            return NotImplemented
        if self.source != other.source or self.target != other.target:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        return f"GradedMap({self.target.dim}x{self.source.dim}, parity={self.parity}, terms={len(self.coeffs)})"

    # Koszul tensor product ---------------------------------------------
    def tensor(self, other: "GradedMap") -> "GradedMap":
        """``(A ⊗ B)(v ⊗ w) = (-1)^{|B||v|} A v ⊗ B w``."""
        a, b, ring = self._pair(other)
        src = _tensor_space(a.source, b.source)
        tgt = _tensor_space(a.target, b.target)
        sign = np.array([(-1) ** (b.parity * p) for p in a.source.parity], dtype=object)
        out: dict = {}
        for e1, m1 in a.coeffs.items():
            m1s = m1 * sign[None, :] if b.parity else m1
            for e2, m2 in b.coeffs.items():
                e = add_exp(e1, e2)
                if ring.admits(e):
                    k = linalg.kron(m1s, m2)
                    out[e] = out[e] + k if e in out else k
        return GradedMap(src, tgt, a.parity + b.parity, out, ring, check=False)

    # calculus on coefficients -------------------------------------------
    def diff(self, name: str) -> "GradedMap":
        k = self.ring.index(name)
        out = {}
        for e, m in self.coeffs.items():
            if e[k]:
                e2 = list(e)
                e2[k] -= 1
                out[tuple(e2)] = m * e[k]
        return GradedMap(self.source, self.target, self.parity, out, self.ring, check=False)

    def subs(self, name: str, value) -> "GradedMap":
        k = self.ring.index(name)
        value = value if isinstance(value, Series) else Series.const(self.ring, value)
        out = GradedMap.zero(self.source, self.target, self.parity, self.ring)
        by_power: dict = {}
        for e, m in self.coeffs.items():
            rest = list(e)
            p = rest[k]
            rest[k] = 0
            by_power.setdefault(p, {})[tuple(rest)] = m
        for p, part in by_power.items():
            piece = GradedMap(self.source, self.target, self.parity, part, self.ring, check=False)
            out = out + piece.scale(value ** p)
        return out

    def part(self, names, d: int) -> "GradedMap":
        """Homogeneous component of total degree ``d`` in the variables ``names``."""
        idx = [self.ring.index(n) for n in names]
        return GradedMap(
            self.source, self.target, self.parity,
            {e: m for e, m in self.coeffs.items() if monomial_order(e, idx) == d},
            self.ring, check=False,
        )

    def below(self, names, d: int) -> "GradedMap":
        """Drop every term of total degree ``>= d`` in ``names``."""
        idx = [self.ring.index(n) for n in names]
        return GradedMap(
            self.source, self.target, self.parity,
            {e: m for e, m in self.coeffs.items() if monomial_order(e, idx) < d},
            self.ring, check=False,
        )

    def drop_variable(self, name: str) -> "GradedMap":
        """Evaluate at ``name = 0`` and remove it from the ring."""
        k = self.ring.index(name)
        keep = [v for v in self.ring.variables if v != name]
        groups = tuple((tuple(n for n in g if n != name), c) for g, c in self.ring.groups if any(n != name for n in g))
        ring = Ring(tuple(keep), groups, self.ring.laurent if self.ring.laurent != name else None,
                    self.ring.window if self.ring.laurent != name else None)
        coeffs = {e[:k] + e[k + 1:]: m for e, m in self.coeffs.items() if e[k] == 0}
        return GradedMap(self.source, self.target, self.parity, coeffs, ring, check=False)

    def inverse(self) -> "GradedMap":
        """Inverse of an even square map whose constant term is invertible."""
        if self.source.dim != self.target.dim:
            raise StructuralError("inverse of a non-square map")
        inv0 = GradedMap(self.target, self.source, self.parity, {self.ring.zero_exp: linalg.inverse(self.coefficient())}, self.ring, check=False)
        one = GradedMap.identity(self.source, self.ring)
        x = inv0
        for _ in range(64):
            nxt = x + x @ (one - self @ x)
            if nxt == x:
                return x
            x = nxt
        raise ArithmeticError("series inverse did not stabilise")


def _series_over(s: Series, ring: Ring) -> Series:
    pos = [ring.index(v) for v in s.ring.variables]
    out = {}
    for e, c in s.coeffs.items():
        e2 = [0] * ring.nvars
        for k, p in zip(pos, e):
            e2[k] = p
        out[tuple(e2)] = c
    return Series(ring, out)


def supercommutator(a: GradedMap, b: GradedMap) -> GradedMap:
    """``{A, B} = AB - (-1)^{|A||B|} BA`` for endomorphisms of one space."""
    if not (a.source == a.target == b.source == b.target):
        raise StructuralError("supercommutator needs endomorphisms of the same space")
    ab = a @ b
    ba = b @ a
    return ab + ba if a.parity and b.parity else ab - ba


def exp_truncated(a: GradedMap, var: str, order: int, ring: Ring | None = None) -> GradedMap:
    """``sum_{k<=order} (-var * A)^k / k!`` over a ring containing ``var``."""
    if a.parity:
        raise ParityError("exponential of an odd map")
    if a.source != a.target:
        raise StructuralError("exponential of a non-endomorphism")
    ring = ring or a.ring
    a = a.over(ring)
    step = a.scale(-Series.var(ring, var))
    out = GradedMap.identity(a.source, ring)
    term = out
    for k in range(1, order + 1):
        term = term @ step
        out = out + term.scale(Fraction(1, factorial(k)))
    return out


# permutations of tensor factors -------------------------------------------

def koszul_sign(parities, perm) -> int:
    """Sign of reordering homogeneous elements into ``[x[perm[0]], x[perm[1]], ...]``."""
    sign = 1
    n = len(perm)
    for i in range(n):
        for j in range(i + 1, n):
            if perm[i] > perm[j] and parities[perm[i]] and parities[perm[j]]:
                sign = -sign
    return sign


def permutation_map(space: GradedSpace, n: int, perm, ring: Ring = TRIVIAL) -> GradedMap:
    """``P(v_1 ⊗ … ⊗ v_n) = ε · v_{perm[0]} ⊗ … ⊗ v_{perm[n-1]}`` (0-based)."""
    d = space.dim
    big = space.power(n)
    m = linalg.zeros(d ** n, d ** n)
    for idx in product(range(d), repeat=n):
        src = 0
        for k in idx:
            src = src * d + k
        new = [idx[p] for p in perm]
        tgt = 0
        for k in new:
            tgt = tgt * d + k
        m[tgt, src] += koszul_sign([space.parity[k] for k in idx], perm)
    return GradedMap(big, big, 0, {ring.zero_exp: m}, ring, check=False)


def tensor_power_identity(space: GradedSpace, n: int, ring: Ring = TRIVIAL) -> GradedMap:
    return GradedMap.identity(space.power(n), ring)


def tensor_all(maps) -> GradedMap:
    out = maps[0]
    for m in maps[1:]:
        out = out.tensor(m)
    return out



def permute_inputs(op: GradedMap, space: GradedSpace, n: int, perm) -> GradedMap:
    """``op ∘ P_perm`` for ``op`` on ``space^{⊗n}``, by gathering columns."""
    if op.source != space.power(n):
        raise StructuralError("operation source is not the expected tensor power")
    d = space.dim
    cols = []
    signs = []
    for idx in product(range(d), repeat=n):
        tgt = 0
        for p in perm:
            tgt = tgt * d + idx[p]
        cols.append(tgt)
        signs.append(koszul_sign([space.parity[k] for k in idx], perm))
    cols = np.array(cols, dtype=int)
    signs = np.array(signs, dtype=object)
    out = {e: m[:, cols] * signs[None, :] for e, m in op.coeffs.items()}
    return GradedMap(op.source, op.target, op.parity, out, op.ring, check=False)
