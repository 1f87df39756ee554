"""``engine``: run problem files and write exact pass/fail reports.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import problem as pf
from .bcov import (bcov_vector_field, check_oa, leaf_to_root_family, structure_constants,
                   validate_bcov)
from .commutativity import (build_A, check_commutativity, transferred_one_form, validate_comm_family,
                            validate_strong_hodge)
from .complexes import PreconditionError, validate_sdr
from .graded import ParityError, StructuralError
from .models import eps_ring
from .report import Report, residual_to_json
from .saito import (SaitoData, SectionS, c_operators, check_good_section, find_good_section, gm_frame,
                    milnor_ring)
from .scalars import format_scalar
from .series import Series, TruncationError
from .tqm import DecoratedGraph, amplitude
from .transfer import (OperationSet, assemble, check_linfty, check_mc, check_transferred_mc, lift_mc,
                       tree_amplitude, transferred_operations)
from .trees import parse_tree

DEFAULT_ORDER = {"sdr": 0, "transfer": 4, "tqm": 0, "commutativity": 3, "bcov": 3, "saito": 3}


def _order(doc, order):
    if order is not None:
        return order
    return doc.get("order", doc["payload"].get("order", DEFAULT_ORDER[doc["kind"]]))


def _eps_ops(obj, space, order, field):
    ring = eps_ring(order)
    base = pf.parse_ops(obj, space, ("payload", "ops"), field)
    eps = Series.var(ring, "eps")
    return OperationSet(space, {n: m.over(ring).scale(eps) for n, m in base.ops.items()})


def run_sdr(doc, order, field) -> Report:
    return validate_sdr(pf.parse_sdr(doc["payload"], field=field))


def run_transfer(doc, order, field) -> Report:
    p = doc["payload"]
    sdr = pf.parse_sdr(p["sdr"], ("payload", "sdr"), field)
    rep = Report()
    rep.extend(validate_sdr(sdr), "sdr: ")
    if "phi" in p:
        V = sdr.V.space
        phis = [pf._map(m, ("payload", "phi", k), V, V, 1, field) for k, m in enumerate(p["phi"])]
        if len(phis) == 1 and order > 1:
            phis = lift_mc(sdr, phis[0], order)
        phi = assemble(phis, eps_ring(order))
        rep.add("Maurer-Cartan input", check_mc(sdr.V, phi, order), "transfer")
        rep.add("transferred Maurer-Cartan", check_transferred_mc(sdr, phi, order), "transfer")
    if "ops" in p:
        ops = _eps_ops(p["ops"], sdr.V.space, order, field)
        arity = p.get("max_arity", 3)
        rep.extend(check_linfty(ops, arity, sdr.Q.over(ops.ring)), "input: ")
        out = transferred_operations(sdr, ops, arity, order)
        rep.extend(check_linfty(out, arity, sdr.Vr.Q.over(out.ring)), "transferred: ")
    return rep


def run_tqm(doc, order, field) -> Report:
    p = doc["payload"]
    sdr = pf.parse_sdr(p["sdr"], ("payload", "sdr"), field)
    ops = pf.parse_ops(p["ops"], sdr.V.space, ("payload", "ops"), field)
    rep = Report()
    for k, text in enumerate(p["trees"]):
        try:
            graph = DecoratedGraph.from_text(text)
        except ValueError as e:
            raise pf.ProblemError(("payload", "trees", k), str(e)) from None
        rep.add(f"amplitude = tree formula: {text}",
                amplitude(graph, sdr, ops) - tree_amplitude(sdr, ops, parse_tree(text)), "tqm")
    return rep


def run_commutativity(doc, order, field) -> Report:
    p = doc["payload"]
    data = pf.parse_hodge(p, field=field)
    fam = pf.parse_family(p["family"], data, order, field=field)
    rep = Report()
    rep.extend(validate_strong_hodge(data), "hodge: ")
    rep.extend(validate_comm_family(data, fam), "family: ")
    B = transferred_one_form(data, fam, order, strict=False)
    rep.extend(check_commutativity(B, order), "transferred: ")
    if fam.mode == "simplified":
        A = build_A(data, fam, order)
        rep.add("build_A = transferred", {q: A[q] - B[q] for q in fam.params if not (A[q] - B[q]).is_zero()},
                "commutativity")
        rep.extend(check_commutativity(A, order), "product formula: ")
    return rep


def run_bcov(doc, order, field) -> Report:
    data = pf.parse_bcov(doc["payload"], field=field)
    rep = Report()
    rep.extend(validate_bcov(data), "bcov: ")
    f = structure_constants(bcov_vector_field(data, order + 2))
    rep.extend(check_oa(f, order))
    fam = leaf_to_root_family(data, order)
    hodge = data.hodge()
    rep.extend(validate_comm_family(hodge, fam), "family: ")
    rep.extend(check_commutativity(build_A(hodge, fam, order), order), "family: ")
    return rep


def run_saito(doc, order, field) -> Report:
    p = doc["payload"]
    data = SaitoData(p["n"], order)
    rep = Report()
    rep.add("mu = n - 1", data.mu - (data.n - 1), "saito")
    C = c_operators(data)
    rep.add("[C_j,C_k] = 0", {f"{j + 1},{k + 1}": C[j] @ C[k] - C[k] @ C[j]
                              for j in range(len(C)) for k in range(j + 1, len(C))}, "saito")
    if p.get("section", "monomial") == "find":
        res = find_good_section(data, p.get("degree_bound", 1))
        if not res.found:
            rep.add("good section exists", f"obstruction at t-order {res.obstruction_order}: {res.detail}", "saito")
            return rep
        S = res.section
    else:
        S = SectionS.monomial(data)
    rep.extend(check_good_section(S, data))
    return rep


RUNNERS = {"sdr": run_sdr, "transfer": run_transfer, "tqm": run_tqm,
           "commutativity": run_commutativity, "bcov": run_bcov, "saito": run_saito}


def run(doc, order=None, field="q") -> Report:
    pf.validate(doc)
    return RUNNERS[doc["kind"]](doc, _order(doc, order), field)


def saito_report(sub, doc, order) -> dict:
    p = doc["payload"] if doc.get("kind") == "saito" else doc
    n = p["n"]
    if sub == "milnor":
        mr = milnor_ring(n)
        return {"status": "pass", "mu": mr["mu"], "basis": mr["basis"],
                "table": [[[format_scalar(c) for c in v] for v in row] for row in mr["table"]]}
    data = SaitoData(n, order if order is not None else p.get("order", 3))
    if sub == "coperators":
        return {"status": "pass", "variables": list(data.t_ring.variables),
                "operators": [residual_to_json(C) for C in c_operators(data)]}
    if sub == "gmframe":
        return {"status": "pass", "frame": residual_to_json(gm_frame(data))}
    res = find_good_section(data, p.get("degree_bound", 1))
    if not res.found:
        return {"status": "fail", "obstruction_order": res.obstruction_order, "detail": res.detail}
    rep = check_good_section(res.section, data)
    out = rep.to_json()
    out["section"] = residual_to_json(res.section.matrix)
    return out


def _write(report: dict, path):
    text = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parser():
    ap = argparse.ArgumentParser(prog="engine", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=["run", "build", "saito"])
    ap.add_argument("subcommand", nargs="?", help="saito: milnor, coperators, gmframe or goodsection")
    ap.add_argument("--input", required=True, help="problem file (run, saito) or model parameters (build)")
    ap.add_argument("--order", type=int, default=None, help="truncation order (defaults per problem kind)")
    ap.add_argument("--report", default="-", help="output path, '-' for stdout")
    ap.add_argument("--field", choices=["q", "qi"], default="q", help="scalars: rationals or Gaussian rationals")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        if args.command == "build":
            with open(args.input, encoding="utf-8") as fh:
                params_doc = json.load(fh)
            if not isinstance(params_doc, dict) or "name" not in params_doc:
                raise pf.ProblemError((), "model parameters need a 'name'")
            params = {k: v for k, v in params_doc.items() if k != "name"}
            if args.order is not None:
                params["order"] = args.order
            _write(pf.build_model(params_doc["name"], params), args.report)
            return 0
        doc = pf.load(args.input)
        if args.command == "saito":
            if args.subcommand not in ("milnor", "coperators", "gmframe", "goodsection"):
                raise pf.ProblemError((), "saito needs one of milnor, coperators, gmframe, goodsection")
            if doc["kind"] != "saito":
                raise pf.ProblemError(("kind",), "saito subcommands need a saito problem")
            out = saito_report(args.subcommand, doc, args.order)
            out.update(kind="saito", command=args.subcommand)
            _write(out, args.report)
            return 0 if out["status"] == "pass" else 1
        order = _order(doc, args.order)
        rep = run(doc, order, args.field)
    except TruncationError as e:
        print(f"engine: truncation overflow: {e}; increase the window or lower --order", file=sys.stderr)
        return 2
    except (pf.ProblemError, PreconditionError, StructuralError, ParityError, KeyError, ValueError, OSError) as e:
        print(f"engine: input error: {e}", file=sys.stderr)
        return 2
    out = rep.to_json()
    out.update(kind=doc["kind"], order=order, field=args.field)
    _write(out, args.report)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
