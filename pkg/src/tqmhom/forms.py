"""Operator-valued differential forms in odd symbols ``dt_e``.

A :class:`Form` is a sum ``sum_I dt_I X_I`` with the ``dt`` s written to the
left of graded-map coefficients.  Each length symbol is tied to a ring
variable, either ``u = exp(-t)`` (kind ``"u"``) or ``t`` itself (kind
``"t"``), which fixes how ``d/dt`` acts.
"""

from __future__ import annotations

from fractions import Fraction

from .graded import GradedMap, StructuralError, _unify
from .series import Series


def _merge(i: tuple, j: tuple):
    """Sign and sorted index for ``dt_I dt_J``, or ``(0, None)`` if they overlap."""
    if set(i) & set(j):
        return 0, None
    seq = list(i) + list(j)
    sign = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign, tuple(sorted(seq))


class Form:
    __slots__ = ("source", "target", "components", "dts")

    def __init__(self, source, target, components=None, dts=None):
        self.source = source
        self.target = target
        self.dts = dict(dts or {})
        clean = {}
        for key, x in (components or {}).items():
            key = tuple(key)
            if tuple(sorted(key)) != key:
                raise StructuralError("form components must use sorted dt indices")
            if x.source != source or x.target != target:
                raise StructuralError("form component between the wrong spaces")
            if x.is_zero():
                continue
            clean[key] = clean[key] + x if key in clean else x
        self.components = {k: v for k, v in clean.items() if not v.is_zero()}

    @classmethod
    def of(cls, x: GradedMap, dts=None) -> "Form":
        return cls(x.source, x.target, {(): x}, dts)

    @classmethod
    def zero(cls, source, target, dts=None) -> "Form":
        return cls(source, target, {}, dts)

    def _dts_with(self, other: "Form"):
        merged = dict(self.dts)
        for k, v in other.dts.items():
            if k in merged and merged[k] != v:
                raise StructuralError(f"dt symbol {k!r} bound twice")
            merged[k] = v
        return merged

    def __add__(self, other: "Form") -> "Form":
        comps = dict(self.components)
        for k, v in other.components.items():
            comps[k] = comps[k] + v if k in comps else v
        return Form(self.source, self.target, comps, self._dts_with(other))

    def __neg__(self) -> "Form":
        return Form(self.source, self.target, {k: -v for k, v in self.components.items()}, self.dts)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, s) -> "Form":
        return Form(self.source, self.target, {k: v.scale(s) for k, v in self.components.items()}, self.dts)

    def _combine(self, other: "Form", op) -> "Form":
        out: dict = {}
        src = tgt = None
        for i, x in self.components.items():
            for j, y in other.components.items():
                sign, key = _merge(i, j)
                if not sign:
                    continue
                if x.parity * len(j) % 2:
                    sign = -sign
                val = op(x, y)
                val = val if sign > 0 else -val
                out[key] = out[key] + val if key in out else val
                src, tgt = val.source, val.target
        if src is None:
            probe = op(
                GradedMap.zero(self.source, self.target),
                GradedMap.zero(other.source, other.target),
            )
            src, tgt = probe.source, probe.target
        return Form(src, tgt, out, self._dts_with(other))

    def __matmul__(self, other) -> "Form":
        other = other if isinstance(other, Form) else Form.of(other)
        return self._combine(other, lambda x, y: x @ y)

    def __rmatmul__(self, other) -> "Form":
        return Form.of(other) @ self

    def tensor(self, other) -> "Form":
        other = other if isinstance(other, Form) else Form.of(other)
        return self._combine(other, lambda x, y: x.tensor(y))

    # inspection ---------------------------------------------------------
    def component(self, key=()) -> GradedMap:
        key = tuple(sorted(key))
        x = self.components.get(key)
        if x is not None:
            return x
        ring = None
        for v in self.components.values():
            ring = v.ring
        return GradedMap.zero(self.source, self.target, 0, ring) if ring else GradedMap.zero(self.source, self.target)

    def degree_part(self, k: int) -> "Form":
        return Form(self.source, self.target, {i: x for i, x in self.components.items() if len(i) == k}, self.dts)

    def is_zero(self) -> bool:
        return not self.components

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        return f"Form({sorted(self.components)})"

    # calculus -----------------------------------------------------------
    def d(self) -> "Form":
        """de Rham differential in the length symbols."""
        out = Form.zero(self.source, self.target, self.dts)
        for name, (var, kind) in sorted(self.dts.items()):
            for i, x in self.components.items():
                sign, key = _merge((name,), i)
                if not sign:
                    continue
                if var not in x.ring.variables:
                    continue
                dx = x.diff(var)
                if kind == "u":
                    dx = dx.scale(-Series.var(dx.ring, var))
                out = out + Form(self.source, self.target, {key: dx if sign > 0 else -dx}, self.dts)
        return out

    def q_action(self, q_source: GradedMap | None, q_target: GradedMap | None) -> "Form":
        """``Q∘F - (-1)^{|F|} F∘Q`` componentwise, with ``Q`` passing the ``dt`` s."""
        comps = {}
        for i, x in self.components.items():
            left = q_target @ x if q_target is not None else None
            right = x @ q_source if q_source is not None else None
            if right is not None and x.parity % 2 == 0:
                right = -right
            val = left if right is None else (right if left is None else left + right)
            if val is None:
                continue
            comps[i] = val if len(i) % 2 == 0 else -val
        src = self.source
        tgt = self.target
        return Form(src, tgt, comps, self.dts)

    def subs(self, var: str, value) -> "Form":
        return Form(self.source, self.target, {k: v.subs(var, value) for k, v in self.components.items()}, self.dts)

    def map_components(self, fn) -> "Form":
        comps = {k: fn(v) for k, v in self.components.items()}
        src = tgt = None
        for v in comps.values():
            src, tgt = v.source, v.target
        return Form(src or self.source, tgt or self.target, comps, self.dts)

    def substitute_dt(self, name: str, replacements) -> "Form":
        """Pull back along ``dt_name -> sum(dt_r for r in replacements)``."""
        out = Form.zero(self.source, self.target, self.dts)
        for i, x in self.components.items():
            if name not in i:
                out = out + Form(self.source, self.target, {i: x}, self.dts)
                continue
            pos = i.index(name)
            rest = i[:pos] + i[pos + 1:]
            for r in replacements:
                # dt_name sits after `pos` symbols; bring the replacement to the front first.
                s1 = -1 if pos % 2 else 1
                s2, key = _merge((r,), rest)
                if not s2:
                    continue
                val = x if s1 * s2 > 0 else -x
                out = out + Form(self.source, self.target, {key: val}, self.dts)
        return out

    def integrate(self, name: str) -> "Form":
        """Integrate over ``t_name`` in ``(0, ∞)``; requires the ``u = e^{-t}`` representation.

        Uses ``∫ u^k dt = 1/k``.  A ``u^0`` coefficient in the ``dt`` component
        diverges and raises ``ArithmeticError``; components without
        ``dt_name`` integrate to zero.
        """
        var, kind = self.dts[name]
        if kind != "u":
            raise ValueError("edge integrals need the u = exp(-t) representation")
        out = {}
        for i, x in self.components.items():
            if name not in i:
                continue
            pos = i.index(name)
            rest = i[:pos] + i[pos + 1:]
            k = x.ring.index(var)
            coeffs = {}
            for e, m in x.coeffs.items():
                if e[k] == 0:
                    raise ArithmeticError(f"divergent integral over {name}: constant term in u")
                e2 = list(e)
                e2[k] = 0
                e2 = tuple(e2)
                val = m * Fraction(1, e[k])
                coeffs[e2] = coeffs[e2] + val if e2 in coeffs else val
            val = GradedMap(x.source, x.target, x.parity, coeffs, x.ring, check=False)
            out[rest] = (-val if pos % 2 else val) + out[rest] if rest in out else (-val if pos % 2 else val)
        dts = {k: v for k, v in self.dts.items() if k != name}
        return Form(self.source, self.target, out, dts)


def ring_of(*maps):
    ring = maps[0].ring
    for m in maps[1:]:
        ring = _unify(ring, m.ring)
    return ring
