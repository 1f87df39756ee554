"""1D topological quantum mechanics on trees and chains.

Every edge carries the evolution form ``exp(-tH)(1 - dt G)`` in its own
length symbol; vertices carry operations.  Edges are named in post-order
(leaf edges first, the root edge last), so the 3-edge chain reads
``I(t3) φ I(t2) φ I(t1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .complexes import IDEMPOTENT, SDR, TRUNCATED, PreconditionError, evolution_form
from .contract import Slot, Wire, tensor_contract
from .forms import Form, _merge
from .graded import GradedMap, StructuralError
from .series import Ring, Series
from .transfer import OperationSet
from .trees import Tree, parse_tree


@dataclass(frozen=True)
class DecoratedGraph:
    """A tree (chains included) with one length symbol per edge, in post-order.

    ``decorations`` optionally fixes the operation at each internal vertex
    (post-order); otherwise vertices use ``ops`` by arity.
    """

    tree: Tree
    edges: tuple
    decorations: tuple | None = None

    def __post_init__(self):
        n = self.tree.n_leaves + self.tree.n_vertices
        if len(self.edges) != n:
            raise StructuralError(f"{n} edges expected, {len(self.edges)} names given")
        if len(set(self.edges)) != len(self.edges):
            raise StructuralError("edge length symbols must be distinct")
        if self.decorations is not None and len(self.decorations) != self.tree.n_vertices:
            raise StructuralError("one decoration per internal vertex expected")

    @classmethod
    def from_text(cls, text: str, prefix: str = "t") -> "DecoratedGraph":
        tree = parse_tree(text)
        n = tree.n_leaves + tree.n_vertices
        return cls(tree, tuple(f"{prefix}{k}" for k in range(1, n + 1)))

    @classmethod
    def chain(cls, n_vertices: int, prefix: str = "t") -> "DecoratedGraph":
        t = Tree((), None)
        for _ in range(n_vertices):
            t = Tree((t,))
        return cls(t, tuple(f"{prefix}{k}" for k in range(1, n_vertices + 2)))

    def internal_edges(self):
        """Names of edges joining two internal vertices."""
        out = []
        self._walk(lambda kind, name, node, is_root: out.append(name) if kind == "vertex" and not is_root else None)
        return out

    def leaf_edges(self):
        out = []
        self._walk(lambda kind, name, node, is_root: out.append(name) if kind == "leaf" else None)
        return out

    def root_edge(self) -> str:
        return self.edges[-1]

    def _walk(self, visit):
        counter = iter(range(len(self.edges)))

        def go(t, is_root):
            for c in t.children:
                go(c, False)
            name = self.edges[next(counter)]
            visit("leaf" if t.is_leaf else "vertex", name, t, is_root)

        go(self.tree, True)


def _ring_with(base: Ring, names, cutoff: int | None = None) -> Ring:
    names = tuple(n for n in names if n not in base.variables)
    groups = base.groups + (((names, cutoff),) if cutoff is not None and names else ())
    return Ring(base.variables + names, groups, base.laurent, base.window)


def _evolution(H, G, name, representation, ring, order):
    var = ("u_" if representation == IDEMPOTENT else "") + name
    evo = evolution_form(H.over(ring), G.over(ring), representation, order=order, var=var, dt="d" + name, ring=ring)
    return evo.as_form()


def _vertex_ops(graph: DecoratedGraph, ops: OperationSet | None):
    if graph.decorations is not None:
        return list(graph.decorations)
    out = []

    def go(t):
        for c in t.children:
            go(c)
        if not t.is_leaf:
            if ops is None or t.arity not in ops.ops:
                raise StructuralError(f"no operation of arity {t.arity}")
            out.append(ops.ops[t.arity])

    go(graph.tree)
    return out


def _build(graph: DecoratedGraph, vertex_ops, edge_form, leaf_op, root_op):
    """Contraction pattern; ``edge_form(name)`` returns the form on an internal edge."""
    names = iter(graph.edges)
    vops = iter(vertex_ops)

    def wrap(t, is_root):
        if t.is_leaf:
            return Slot(leaf_op(next(names)))
        inputs = tuple(wrap(c, False) for c in t.children)
        w = Wire(Form.of(next(vops)), inputs)
        name = next(names)
        return Wire(root_op(name) if is_root else edge_form(name), (w,))

    return wrap(graph.tree, True)


def graph_amplitude(graph: DecoratedGraph, H: GradedMap, G: GradedMap, ops: OperationSet | None = None,
                    representation: str = IDEMPOTENT, order: int | None = None) -> Form:
    """``I_γ``: every edge, external ones included, carries its evolution form."""
    vertex_ops = _vertex_ops(graph, ops)
    base = _common_ring(vertex_ops)
    names = [("u_" if representation == IDEMPOTENT else "") + e for e in graph.edges]
    ring = _ring_with(base, names, order if representation == TRUNCATED else None)
    vertex_ops = [m.over(ring) for m in vertex_ops]

    def edge(name):
        return _evolution(H, G, name, representation, ring, order)

    return tensor_contract(_build(graph, vertex_ops, edge, edge, edge))


def preamplitude(graph: DecoratedGraph, sdr: SDR, ops: OperationSet | None = None) -> Form:
    """External edges at infinite length: leaves carry ``i``, the root ``pi``."""
    H, G = sdr.projector_c(), sdr.h
    if not (H @ H - H).is_zero():
        raise PreconditionError("preamplitudes need an idempotent H")
    vertex_ops = _vertex_ops(graph, ops)
    base = _common_ring(vertex_ops)
    inner = graph.internal_edges()
    ring = _ring_with(base, ["u_" + e for e in inner])
    vertex_ops = [m.over(ring) for m in vertex_ops]
    i, pi = Form.of(sdr.i.over(ring)), Form.of(sdr.pi.over(ring))

    def edge(name):
        return _evolution(H, G, name, IDEMPOTENT, ring, None)

    return tensor_contract(_build(graph, vertex_ops, edge, lambda _: i, lambda _: pi))


def amplitude(graph: DecoratedGraph, sdr: SDR, ops: OperationSet | None = None) -> GradedMap:
    """Integrate every internal edge of the preamplitude in place.

    Each internal edge form integrates to ``∫ exp(-t Proj - dt h) = -h``
    before contraction, so the result is ``(-1)^{n_e} <h, m, i, pi>_γ``.
    """
    from .complexes import edge_integral

    vertex_ops = _vertex_ops(graph, ops)
    ring = _common_ring(vertex_ops)
    vertex_ops = [m.over(ring) for m in vertex_ops]
    edge = Form.of(edge_integral(sdr).over(ring))
    i, pi = Form.of(sdr.i.over(ring)), Form.of(sdr.pi.over(ring))
    out = tensor_contract(_build(graph, vertex_ops, lambda _: edge, lambda _: i, lambda _: pi))
    return out.component(())


def _common_ring(maps) -> Ring:
    ring = Ring()
    for m in maps:
        if len(m.ring.variables) > len(ring.variables):
            ring = m.ring
    return ring


# observables and deformations ----------------------------------------------

def observable_correlator(O: GradedMap, H: GradedMap, G: GradedMap, names=("t1", "t2"),
                          representation: str = IDEMPOTENT, order: int | None = None) -> Form:
    """``exp(-t1 H - dt1 G) O exp(-t2 H - dt2 G)``."""
    vars_ = [("u_" if representation == IDEMPOTENT else "") + n for n in names]
    ring = _ring_with(O.ring, vars_, order if representation == TRUNCATED else None)
    I1 = _evolution(H, G, names[0], representation, ring, order)
    I2 = _evolution(H, G, names[1], representation, ring, order)
    return I1 @ Form.of(O.over(ring)) @ I2


def q_on_tensor(Q: GradedMap, n: int) -> GradedMap:
    """``sum_k id^{⊗k} ⊗ Q ⊗ id^{⊗(n-k-1)}`` on ``V^{⊗n}``."""
    V = Q.source
    ident = GradedMap.identity(V, Q.ring)
    total = None
    for k in range(n):
        term = None
        for j in range(n):
            f = Q if j == k else ident
            term = f if term is None else term.tensor(f)
        total = term if total is None else total + term
    return total


def closedness(form: Form, Q_source: GradedMap, Q_target: GradedMap, n_inputs: int) -> Form:
    """``(d + Q) F`` with ``Q`` acting on all inputs and the output."""
    ring = _form_ring(form)
    qs = q_on_tensor(Q_source, n_inputs).over(ring) if n_inputs else None
    return form.d() + form.q_action(qs, Q_target.over(ring))


def _form_ring(form: Form) -> Ring:
    return _common_ring(list(form.components.values())) if form.components else Ring()


def _pullback(form: Form, rules: dict, dts: dict) -> Form:
    """Replace ``dt_a`` by ``sum c * dt_b`` according to ``rules[a] = [(b, c), ...]``."""
    out = {}
    for key, x in form.components.items():
        terms = [((), x)]
        for name in key:
            new_terms = []
            for k, val in terms:
                for b, c in rules.get(name, [(name, 1)]):
                    sign, k2 = _merge(k, (b,))
                    if not sign:
                        continue
                    v = val.scale(Fraction(sign * c))
                    new_terms.append((k2, v))
            terms = new_terms
        for k, v in terms:
            out[k] = out[k] + v if k in out else v
    return Form(form.source, form.target, out, dts)


def deformation_response(deltaQ: GradedMap, H: GradedMap, G: GradedMap, order: int, kind: str = "form",
                         var: str = "t") -> Form:
    """First-order response ``δI(t) = ∫_{t1+t2=t} I(t1) δQ I(t2)`` in the truncated representation.

    ``kind="form"`` integrates the form ``I(t1) δQ I(t2)`` over the fibre
    ``t1 = s ∈ [0, t]`` (``ds`` moved to the front); its function part is
    ``-∫ e^{-sH} {G, δQ} e^{-(t-s)H} ds``.  ``kind="body"`` convolves only the
    function parts, ``∫ e^{-sH} δQ e^{-(t-s)H} ds``.
    """
    s = var + "_s"
    ring = _ring_with(_common_ring([deltaQ, H, G]), (var, s), order)
    tvar, svar = Series.var(ring, var), Series.var(ring, s)
    if kind == "body":
        b = evolution_form(H.over(ring), G.over(ring), TRUNCATED, order=order, var=var, ring=ring).body
        b1 = b.subs(var, svar)
        b2 = b.subs(var, tvar - svar)
        return Form.of(_integrate_simplex(b1 @ deltaQ.over(ring) @ b2, s, var))
    if kind != "form":
        raise ValueError(f"unknown kind {kind!r}")
    t1, t2 = var + "1", var + "2"
    ring2 = _ring_with(ring, (t1, t2), order)
    I1 = _evolution(H, G, t1, TRUNCATED, ring2, order)
    I2 = _evolution(H, G, t2, TRUNCATED, ring2, order)
    F = I1 @ Form.of(deltaQ.over(ring2)) @ I2
    F = F.map_components(lambda x: x.subs(t1, Series.var(ring2, s)).subs(t2, Series.var(ring2, var) - Series.var(ring2, s)))
    dt, ds = "d" + var, "d" + s
    F = _pullback(F, {"d" + t1: [(ds, 1)], "d" + t2: [(dt, 1), (ds, -1)]}, {dt: (var, "t"), ds: (s, "t")})
    out = {}
    for key, x in F.components.items():
        if ds not in key:
            continue
        pos = key.index(ds)
        rest = key[:pos] + key[pos + 1:]
        val = _integrate_simplex(x.drop_variable(t1).drop_variable(t2), s, var)
        val = -val if pos % 2 else val
        out[rest] = out[rest] + val if rest in out else val
    src = deltaQ.source
    return Form(src, src, out, {dt: (var, "t")})


def _integrate_simplex(x: GradedMap, s: str, t: str) -> GradedMap:
    """``∫_0^t x ds`` for polynomial dependence on ``s``; ``s`` is removed."""
    ks, kt = x.ring.index(s), x.ring.index(t)
    coeffs = {}
    for e, m in x.coeffs.items():
        p = e[ks]
        e2 = list(e)
        e2[ks] = 0
        e2[kt] += p + 1
        e2 = tuple(e2)
        val = m * Fraction(1, p + 1)
        coeffs[e2] = coeffs[e2] + val if e2 in coeffs else val
    out = GradedMap(x.source, x.target, x.parity, coeffs, x.ring, check=False)
    return out.drop_variable(s)


# gluing and factorization ------------------------------------------------------

def gluing_residual(n_vertices: int, phi: GradedMap, H: GradedMap, G: GradedMap, cut: int) -> Form:
    """Cut edge ``cut`` (1-based, post-order) of an ``n``-vertex chain by an identity vertex.

    Returns ``I_cut - pullback(I)`` where the pullback sends ``u -> u' u''``
    and ``dt -> dt' + dt''`` on the cut edge.
    """
    graph = DecoratedGraph.chain(n_vertices)
    decs = [phi] * n_vertices
    ident = GradedMap.identity(phi.source, phi.ring)
    name = graph.edges[cut - 1]
    a, b = name + "a", name + "b"
    edges = list(graph.edges)
    edges[cut - 1:cut] = [a, b]
    decs2 = list(decs)
    decs2.insert(cut - 1, ident)
    cut_graph = DecoratedGraph(DecoratedGraph.chain(n_vertices + 1).tree, tuple(edges), tuple(decs2))
    full = graph_amplitude(DecoratedGraph(graph.tree, graph.edges, tuple(decs)), H, G)
    glued = graph_amplitude(cut_graph, H, G)
    ring = _form_ring(glued)
    ring = _ring_with(ring, ["u_" + name])
    pulled = full.map_components(lambda x: x.over(ring).subs("u_" + name, Series.var(ring, "u_" + a) * Series.var(ring, "u_" + b)).drop_variable("u_" + name))
    dts = dict(glued.dts)
    pulled = _pullback(pulled, {"d" + name: [("d" + a, 1), ("d" + b, 1)]}, dts)
    return glued - pulled


def factorization_residual(graph: DecoratedGraph, sdr: SDR, ops: OperationSet | None, edge: str) -> Form:
    """``PA|_{u_e = 0}`` minus the composite of the two smaller preamplitudes.

    The composite is ``PA_up ∘ (id ⊗ .. ⊗ PA_low ⊗ .. ⊗ id)`` times the Koszul
    sign ``(-1)^{|PA_low| · p}``, ``p`` the total parity of the operations in
    branches to the right of the cut path.
    """
    if edge not in graph.internal_edges():
        raise StructuralError(f"{edge} is not an internal edge")
    pa = preamplitude(graph, sdr, ops)
    pa0 = pa.subs("u_" + edge, 0)
    vertex_ops = _vertex_ops(graph, ops)
    # split the tree at the edge
    names = iter(graph.edges)
    vops = iter(vertex_ops)
    state = {}

    def go(t):
        # returns (tree, edge names, decorations, total parity, contains cut)
        if t.is_leaf:
            return t, [next(names)], [], 0, False
        kids, enames, decs, par, has_cut = [], [], [], 0, False
        for c in t.children:
            kt, ke, kd, kp, kc = go(c)
            if has_cut:
                state["right"] += kp
            kids.append(kt)
            enames.extend(ke)
            decs.extend(kd)
            par += kp
            has_cut = has_cut or kc
        op = next(vops)
        decs.append(op)
        par += op.parity
        nm = next(names)
        if nm == edge:
            state["low"] = DecoratedGraph(Tree(tuple(kids)), tuple(enames + [nm]), tuple(decs))
            state["low_parity"] = par
            return Tree(()), ["cut_" + nm], [], 0, True
        return Tree(tuple(kids)), enames + [nm], decs, par, has_cut

    state["right"] = 0
    top_tree, top_edges, top_decs, _, _ = go(graph.tree)
    upper = DecoratedGraph(top_tree, tuple(top_edges), tuple(top_decs))
    lower = state["low"]
    # position of the cut leaf among the upper leaves (depth-first)
    pos = [e for e in upper.leaf_edges()].index("cut_" + edge)
    pa_up = preamplitude(upper, sdr)
    pa_low = preamplitude(lower, sdr)
    Vr = sdr.Vr.space
    ring = _ring_with(_common_ring(vertex_ops), ["u_" + e for e in graph.internal_edges()])
    ident = Form.of(GradedMap.identity(Vr, ring))
    factors = [ident] * pos + [pa_low.map_components(lambda x: x.over(ring))] + [ident] * (upper.tree.n_leaves - pos - 1)
    feed = factors[0]
    for f in factors[1:]:
        feed = feed.tensor(f)
    comp = pa_up.map_components(lambda x: x.over(ring)) @ feed
    if state["low_parity"] * state["right"] % 2:
        # the lower block is evaluated before, not beside, the odd branches to its right
        comp = -comp
    return pa0.map_components(lambda x: x.over(ring)) - comp
