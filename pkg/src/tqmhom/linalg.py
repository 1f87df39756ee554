"""Exact Gaussian elimination on object arrays of rationals."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def as_exact(a) -> np.ndarray:
    arr = np.array(a, dtype=object)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = Fraction(x) if isinstance(x, (int, Fraction)) else x
    return out


def zeros(m: int, n: int) -> np.ndarray:
    out = np.empty((m, n), dtype=object)
    out.fill(Fraction(0))
    return out


def eye(n: int) -> np.ndarray:
    out = zeros(n, n)
    for k in range(n):
        out[k, k] = Fraction(1)
    return out


def rref(a: np.ndarray):
    """Return ``(R, pivots)`` with ``R`` the reduced row echelon form."""
    r = np.array(a, dtype=object, copy=True)
    m, n = r.shape
    pivots = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        piv = next((k for k in range(row, m) if r[k, col] != 0), None)
        if piv is None:
            continue
        if piv != row:
            r[[row, piv]] = r[[piv, row]]
        inv = 1 / r[row, col]
        r[row] = r[row] * inv
        for k in range(m):
            if k != row and r[k, col] != 0:
                r[k] = r[k] - r[k, col] * r[row]
        pivots.append(col)
        row += 1
    return r, pivots


def rank(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return len(rref(a)[1])


def nullspace(a: np.ndarray) -> np.ndarray:
    """Columns spanning the kernel of ``a`` (shape ``n x k``)."""
    m, n = a.shape
    r, pivots = rref(a) if m else (zeros(0, n), [])
    free = [c for c in range(n) if c not in pivots]
    basis = zeros(n, len(free))
    for j, f in enumerate(free):
        basis[f, j] = Fraction(1)
        for i, p in enumerate(pivots):
            basis[p, j] = -r[i, f]
    return basis


def solve(a: np.ndarray, b: np.ndarray):
    """A particular solution of ``a x = b`` (free variables set to zero), or None.

    Setting free variables to zero picks the solution supported on the
    pivot columns, which is the deterministic choice used throughout.
    """
    b = b.reshape(a.shape[0], -1)
    m, n = a.shape
    aug = np.concatenate([a, b], axis=1)
    r, pivots = rref(aug)
    if any(p >= n for p in pivots):
        return None
    x = zeros(n, b.shape[1])
    for i, p in enumerate(pivots):
        x[p] = r[i, n:]
    return x


def inverse(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    r, pivots = rref(np.concatenate([a, eye(n)], axis=1))
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return r[:, n:]


def complement_columns(span: np.ndarray, ambient: int) -> np.ndarray:
    """Standard basis vectors completing the columns of ``span`` to a basis."""
    current = span
    r = rank(span) if span.shape[1] else 0
    chosen = []
    for k in range(ambient):
        e = zeros(ambient, 1)
        e[k, 0] = Fraction(1)
        trial = np.concatenate([current, e], axis=1) if current.shape[1] else e
        rt = rank(trial)
        if rt > r:
            chosen.append(k)
            current, r = trial, rt
    out = zeros(ambient, len(chosen))
    for j, k in enumerate(chosen):
        out[k, j] = Fraction(1)
    return out


_INT64_SAFE = 2 ** 62


def _integerize(a: np.ndarray):
    """``(N, d)`` with ``a = N / d`` and ``N`` integral, or ``None`` for non-rational entries."""
    flat = a.ravel()
    den = 1
    for x in flat:
        if type(x) is Fraction:
            q = x.denominator
            if q != 1 and den % q:
                den = den * q // math.gcd(den, q)
        elif type(x) is not int:
            return None
    ints = np.empty(flat.shape, dtype=object)
    big = 0
    for k, x in enumerate(flat):
        v = x.numerator * (den // x.denominator) if type(x) is Fraction else x * den
        ints[k] = v
        if v > big or -v > big:
            big = abs(v)
    return ints.reshape(a.shape), den, big


def _rationalize(ints: np.ndarray, den: int) -> np.ndarray:
    out = np.full(ints.shape, _ZERO, dtype=object)
    flat = ints.ravel()
    res = out.ravel()
    nz = np.flatnonzero(flat) if flat.dtype != object else [k for k, v in enumerate(flat) if v]
    for k in nz:
        res[k] = Fraction(int(flat[k]), den)
    return out


_ZERO = Fraction(0)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product of object matrices, via integer arithmetic where possible."""
    if a.shape[1] == 0 or a.shape[0] == 0 or b.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    ia = _integerize(a)
    ib = _integerize(b) if ia is not None else None
    if ib is None:
        return a.dot(b)
    na, da, ba = ia
    nb, db, bb = ib
    if ba * bb * a.shape[1] < _INT64_SAFE:
        prod = na.astype(np.int64).dot(nb.astype(np.int64))
    else:
        prod = na.dot(nb)
    return _rationalize(prod, da * db)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ia = _integerize(a)
    ib = _integerize(b) if ia is not None else None
    if ib is None:
        return np.kron(a, b)
    na, da, ba = ia
    nb, db, bb = ib
    if ba * bb < _INT64_SAFE:
        prod = np.kron(na.astype(np.int64), nb.astype(np.int64))
    else:
        prod = np.kron(na, nb)
    return _rationalize(prod, da * db)
