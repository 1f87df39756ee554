"""Tree-shaped tensor contraction with one fixed Koszul traversal rule.

A contraction pattern is a nested :class:`Wire`: each wire holds an
operator whose inputs are fed, left to right, by the outputs of child wires
or by external :class:`Slot` s.  Evaluation is depth-first with inputs
ordered left to right, so the external inputs of the result appear in the
order the slots are met in that traversal.  All signs come from the Koszul
rule in ``tensor``; no other module introduces wiring signs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graded import GradedSpace, StructuralError, _tensor_space

TRAVERSAL_ORDERS = ("dfs",)


@dataclass(frozen=True)
class Slot:
    """An external input; ``op`` is the map placed on it (identity, ``i``, a vector …)."""

    op: object


@dataclass(frozen=True)
class Wire:
    op: object
    inputs: tuple = field(default=())

    def slots(self):
        for x in self.inputs:
            if isinstance(x, Slot):
                yield x
            else:
                yield from x.slots()


def tensor_contract(pattern: Wire, traversal_order: str = "dfs"):
    """Evaluate ``pattern`` bottom-up; returns an object of the operators' type.

    Raises :class:`StructuralError` when a child's output space does not match
    the operator input it is wired into (dangling or doubly-used slots).
    """
    if traversal_order not in TRAVERSAL_ORDERS:
        raise ValueError(f"unknown traversal order {traversal_order!r}")
    return _eval(pattern)


def _eval(node):
    if isinstance(node, Slot):
        return node.op
    if not isinstance(node, Wire):
        raise StructuralError(f"not a contraction node: {node!r}")
    if not node.inputs:
        if node.op.source != GradedSpace.unit():
            raise StructuralError("operator with inputs wired to nothing")
        return node.op
    values = [_eval(x) for x in node.inputs]
    expected = GradedSpace.unit()
    for v in values:
        expected = _tensor_space(expected, v.target)
    if expected != node.op.source:
        raise StructuralError(
            f"wiring mismatch: operator expects {node.op.source.dim}-dim input, "
            f"children provide {expected.dim}-dim"
        )
    feed = values[0]
    for v in values[1:]:
        feed = feed.tensor(v)
    return node.op @ feed
