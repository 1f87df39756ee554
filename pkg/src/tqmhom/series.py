"""Truncated multivariate formal power series with exact coefficients.

A :class:`Ring` fixes the ordered variable names and the truncation: each
variable group carries a total-degree cutoff, and at most one variable (the
*Laurent* variable, ``z`` in the Saito module) may carry negative exponents
inside a fixed window.  Every product is re-truncated eagerly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable


class TruncationError(ArithmeticError):
    """A Laurent exponent fell below the window; raise the window bound."""


@dataclass(frozen=True)
class Ring:
    variables: tuple[str, ...] = ()
    groups: tuple[tuple[tuple[str, ...], int], ...] = ()
    laurent: str | None = None
    window: tuple[int, int] | None = None

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"duplicate variables in {self.variables}")
        for names, cutoff in self.groups:
            for name in names:
                if name not in self.variables:
                    raise ValueError(f"group variable {name!r} not in ring")
            if cutoff < 0:
                raise ValueError("negative cutoff")
        if self.laurent is not None:
            if self.laurent not in self.variables:
                raise ValueError(f"Laurent variable {self.laurent!r} not in ring")
            if self.window is None:
                raise ValueError("Laurent variable needs a window")
        object.__setattr__(
            self,
            "_group_idx",
            tuple((tuple(self.variables.index(n) for n in names), c) for names, c in self.groups),
        )
        object.__setattr__(
            self, "_lidx", None if self.laurent is None else self.variables.index(self.laurent)
        )

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def zero_exp(self) -> tuple[int, ...]:
        return (0,) * len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"variable {name!r} not in ring {self.variables}") from None

    def unit_exp(self, name: str, power: int = 1) -> tuple[int, ...]:
        e = [0] * len(self.variables)
        e[self.index(name)] = power
        return tuple(e)

    def cutoff(self, name: str) -> int | None:
        for names, c in self.groups:
            if name in names:
                return c
        return None

    def admits(self, exp: tuple[int, ...]) -> bool:
        """False if ``exp`` lies beyond a cutoff; raises below the Laurent window."""
        li = self._lidx
        for k, e in enumerate(exp):
            if e < 0 and k != li:
                raise TruncationError(f"negative exponent for {self.variables[k]!r}")
        # terms beyond a cutoff are dropped before the window is consulted
        for idx, cutoff in self._group_idx:
            if sum(exp[k] for k in idx) > cutoff:
                return False
        if li is not None:
            lo, hi = self.window
            if exp[li] < lo:
                raise TruncationError(
                    f"{self.laurent}-exponent {exp[li]} below window {lo}; increase the window"
                )
            if exp[li] > hi:
                return False
        return True

    def with_variables(self, extra: Iterable[str], groups=None) -> "Ring":
        extra = tuple(v for v in extra if v not in self.variables)
        return Ring(
            self.variables + extra,
            self.groups if groups is None else tuple(groups),
            self.laurent,
            self.window,
        )


def add_exp(a, b):
    return tuple(x + y for x, y in zip(a, b))


def monomial_order(exp, idx) -> int:
    return sum(exp[k] for k in idx)


class Series:
    """An element of a truncated series ring; immutable by convention."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: Ring, coeffs=None):
        self.ring = ring
        clean = {}
        for e, c in (coeffs or {}).items():
            e = tuple(e)
            if c and ring.admits(e):
                clean[e] = clean.get(e, 0) + c
        self.coeffs = {e: c for e, c in clean.items() if c}

    @classmethod
    def const(cls, ring: Ring, value) -> "Series":
        return cls(ring, {ring.zero_exp: Fraction(value) if isinstance(value, int) else value})

    @classmethod
    def var(cls, ring: Ring, name: str, power: int = 1) -> "Series":
        return cls(ring, {ring.unit_exp(name, power): Fraction(1)})

    def _lift(self, other) -> "Series":
        if isinstance(other, Series):
            if other.ring != self.ring:
                raise ValueError("series over different rings")
            return other
        return Series.const(self.ring, other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return Series(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.ring, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Series):
            return Series(self.ring, {e: c * other for e, c in self.coeffs.items()})
        other = self._lift(other)
        out: dict = {}
        ring = self.ring
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = add_exp(e1, e2)
                if ring.admits(e):
                    out[e] = out.get(e, 0) + c1 * c2
        return Series(ring, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = Series.const(self.ring, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.inverse()
        return self * (Fraction(1) / other)

    def __eq__(self, other):
        if isinstance(other, Series):
            return self.ring == other.ring and self.coeffs == other.coeffs
        try:
            return self == Series.const(self.ring, other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __bool__(self):
        return bool(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def constant_term(self):
        return self.coeffs.get(self.ring.zero_exp, 0)

    def coeff(self, exp) -> Fraction:
        return self.coeffs.get(tuple(exp), 0)

    def inverse(self) -> "Series":
        """Multiplicative inverse; the constant term must be invertible.

        Iterates ``x <- x (2 - s x)``, which converges in the adic topology
        of every truncated group (a Laurent window needs a monomial leading
        term and is not supported here).
        """
        c0 = self.constant_term()
        if not c0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        x = Series.const(self.ring, Fraction(1) / c0 if isinstance(c0, int) else 1 / c0)
        for _ in range(64):
            nxt = x * (2 - self * x)
            if nxt == x:
                return x
            x = nxt
        raise ArithmeticError("inverse did not stabilise; is the ring truncated?")

    def diff(self, name: str) -> "Series":
        k = self.ring.index(name)
        out = {}
        for e, c in self.coeffs.items():
            if e[k]:
                e2 = list(e)
                e2[k] -= 1
                out[tuple(e2)] = c * e[k]
        return Series(self.ring, out)

    def subs(self, name: str, value) -> "Series":
        """Substitute ``value`` (a scalar or Series) for the variable ``name``."""
        k = self.ring.index(name)
        value = self._lift(value)
        powers = {}
        out = Series(self.ring)
        for e, c in self.coeffs.items():
            p = e[k]
            if p not in powers:
                powers[p] = value ** p
            rest = list(e)
            rest[k] = 0
            out = out + Series(self.ring, {tuple(rest): c}) * powers[p]
        return out

    def degree_part(self, idx, d: int) -> "Series":
        return Series(self.ring, {e: c for e, c in self.coeffs.items() if monomial_order(e, idx) == d})

    def min_order(self, names=None) -> int | None:
        idx = range(self.ring.nvars) if names is None else [self.ring.index(n) for n in names]
        if not self.coeffs:
            return None
        return min(monomial_order(e, idx) for e in self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for e in sorted(self.coeffs):
            mono = "*".join(
                f"{v}^{p}" if p != 1 else v for v, p in zip(self.ring.variables, e) if p
            )
            c = self.coeffs[e]
            parts.append(f"{c}" if not mono else f"{c}*{mono}")
        return " + ".join(parts)


def exp_series(x: Series, order: int) -> Series:
    """Truncated exponential sum_{k<=order} x^k/k!."""
    out = Series.const(x.ring, 1)
    term = Series.const(x.ring, 1)
    for k in range(1, order + 1):
        term = term * x
        out = out + term * Fraction(1, factorial(k))
    return out
