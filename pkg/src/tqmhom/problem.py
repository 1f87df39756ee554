"""Problem files: JSON documents with exact rationals written as ``"p/q"`` strings."""

from __future__ import annotations

import json
from fractions import Fraction

import jsonschema
import numpy as np

from . import linalg
from .bcov import BCOVData
from .commutativity import SIMPLIFIED, CommFamily, HodgeData
from .complexes import SDR, Complex
from .graded import GradedMap, GradedSpace
from .models import polyvector_model
from .scalars import format_scalar, parse_scalar
from .transfer import OperationSet

KINDS = ("sdr", "transfer", "tqm", "commutativity", "bcov", "saito")


class ProblemError(ValueError):
    """A malformed problem file; ``path`` locates the offending field."""

    def __init__(self, path, message):
        self.path = "/".join(str(p) for p in path)
        super().__init__(f"{self.path or '<root>'}: {message}")


_scalar = {"oneOf": [{"type": "string"}, {"type": "integer"},
                     {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}]}
_matrix = {"type": "array", "items": {"type": "array", "items": _scalar}}
_parities = {"type": "array", "items": {"enum": [0, 1]}}
_indices = {"type": "array", "items": {"type": "integer", "minimum": 0}}
_complex = {"type": "object", "required": ["parities"],
            "properties": {"parities": _parities, "Q": _matrix}}
_sdr = {"type": "object", "required": ["V", "Vr", "i", "pi", "h"],
        "properties": {"V": _complex, "Vr": _complex, "i": _matrix, "pi": _matrix, "h": _matrix}}

PAYLOADS = {
    "sdr": _sdr,
    "transfer": {"type": "object", "required": ["sdr"], "properties": {
        "sdr": _sdr,
        "phi": {"type": "array", "items": _matrix},
        "ops": {"type": "object", "patternProperties": {"^[1-9][0-9]*$": _matrix}, "additionalProperties": False},
        "max_arity": {"type": "integer", "minimum": 1}}},
    "tqm": {"type": "object", "required": ["sdr", "ops", "trees"], "properties": {
        "sdr": _sdr,
        "ops": {"type": "object", "patternProperties": {"^[1-9][0-9]*$": _matrix}, "additionalProperties": False},
        "trees": {"type": "array", "items": {"type": "string"}}}},
    "commutativity": {"type": "object", "required": ["C", "G", "G_minus", "i", "pi", "W", "family"], "properties": {
        "C": _complex, "G": _matrix, "G_minus": _matrix, "i": _matrix, "pi": _matrix,
        "W": {"type": "object", "required": ["parities"], "properties": {"parities": _parities}},
        "window": _indices,
        "family": {"type": "object", "required": ["params", "operators"], "properties": {
            "params": {"type": "array", "items": {"type": "string"}},
            "operators": {"type": "array", "items": _matrix},
            "mode": {"enum": ["simplified", "full"]}}}}},
    "bcov": {"type": "object", "required": ["B", "m", "G", "G_minus", "i", "pi", "W"], "properties": {
        "B": _complex, "m": _matrix, "G": _matrix, "G_minus": _matrix, "i": _matrix, "pi": _matrix,
        "W": {"type": "object", "required": ["parities"], "properties": {"parities": _parities}},
        "unit": {"type": "integer", "minimum": 0}, "window": _indices}},
    "saito": {"type": "object", "required": ["n"], "properties": {
        "n": {"type": "integer", "minimum": 3},
        "order": {"type": "integer", "minimum": 0},
        "section": {"enum": ["monomial", "find"]},
        "degree_bound": {"type": "integer", "minimum": 0}}},
}

SCHEMA = {
    "type": "object",
    "required": ["kind", "payload"],
    "properties": {"kind": {"enum": list(KINDS)}, "payload": {"type": "object"},
                   "order": {"type": "integer", "minimum": 0}},
}


def validate(doc) -> None:
    for schema, base in ((SCHEMA, ()), (PAYLOADS.get(doc.get("kind") if isinstance(doc, dict) else None), ("payload",))):
        if schema is None:
            continue
        target = doc if not base else doc["payload"]
        err = jsonschema.exceptions.best_match(jsonschema.Draft7Validator(schema).iter_errors(target))
        if err is not None:
            raise ProblemError(base + tuple(err.absolute_path), err.message)


def load(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ProblemError((), f"invalid JSON: {e}") from None
    validate(doc)
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# matrices -------------------------------------------------------------------------

def matrix_to_json(m) -> list:
    return [[format_scalar(x) for x in row] for row in np.asarray(m)]


def map_to_json(x: GradedMap) -> list:
    if any(any(e) for e in x.coeffs):
        raise ValueError("only constant maps are serialised")
    return matrix_to_json(x.coefficient())


def parse_matrix(obj, path, shape, field="q") -> np.ndarray:
    rows, cols = shape
    if len(obj) != rows or any(len(r) != cols for r in obj):
        raise ProblemError(path, f"expected a {rows}x{cols} matrix")
    out = linalg.zeros(rows, cols)
    for r, row in enumerate(obj):
        for c, x in enumerate(row):
            try:
                out[r, c] = parse_scalar(x, field)
            except ValueError as e:
                raise ProblemError(tuple(path) + (r, c), str(e)) from None
    return out


def _space(parities, prefix) -> GradedSpace:
    return GradedSpace.from_parities(list(parities), prefix=prefix)


def _map(obj, path, src, tgt, parity, field) -> GradedMap:
    m = parse_matrix(obj, path, (tgt.dim, src.dim), field)
    try:
        return GradedMap(src, tgt, parity, {(): m})
    except ValueError as e:
        raise ProblemError(path, str(e)) from None


def _complex_from(obj, path, prefix, field):
    V = _space(obj["parities"], prefix)
    Q = _map(obj["Q"], path + ("Q",), V, V, 1, field) if "Q" in obj else GradedMap.zero(V, V, 1)
    try:
        return Complex(V, Q)
    except ValueError as e:
        raise ProblemError(path + ("Q",), str(e)) from None


def parse_sdr(p, path=("payload",), field="q") -> SDR:
    V = _complex_from(p["V"], path + ("V",), "v", field)
    Vr = _complex_from(p["Vr"], path + ("Vr",), "w", field)
    i = _map(p["i"], path + ("i",), Vr.space, V.space, 0, field)
    pi = _map(p["pi"], path + ("pi",), V.space, Vr.space, 0, field)
    h = _map(p["h"], path + ("h",), V.space, V.space, 1, field)
    return SDR(V, Vr, i, pi, h)


def sdr_to_json(sdr: SDR) -> dict:
    return {"V": {"parities": list(sdr.V.space.parity), "Q": map_to_json(sdr.V.Q)},
            "Vr": {"parities": list(sdr.Vr.space.parity), "Q": map_to_json(sdr.Vr.Q)},
            "i": map_to_json(sdr.i), "pi": map_to_json(sdr.pi), "h": map_to_json(sdr.h)}


def parse_ops(obj, space, path, field="q") -> OperationSet:
    ops = {}
    for key in sorted(obj, key=int):
        n = int(key)
        ops[n] = _map(obj[key], path + (key,), space.power(n), space, 1, field)
    return OperationSet(space, ops)


def parse_hodge(p, path=("payload",), field="q") -> HodgeData:
    cx = _complex_from(p["C"], path + ("C",), "c", field)
    C = cx.space
    W = _space(p["W"]["parities"], "w")
    window = tuple(p["window"]) if "window" in p else None
    if window is not None and any(k >= C.dim for k in window):
        raise ProblemError(path + ("window",), "index outside the basis")
    return HodgeData(cx, _map(p["G"], path + ("G",), C, C, 1, field),
                     _map(p["G_minus"], path + ("G_minus",), C, C, 1, field),
                     _map(p["i"], path + ("i",), W, C, 0, field),
                     _map(p["pi"], path + ("pi",), C, W, 0, field), window)


def parse_family(p, data: HodgeData, order: int, path=("payload", "family"), field="q") -> CommFamily:
    params = tuple(p["params"])
    if len(params) != len(p["operators"]):
        raise ProblemError(path + ("operators",), "one operator per parameter expected")
    ops = [_map(m, path + ("operators", k), data.C, data.C, 0, field) for k, m in enumerate(p["operators"])]
    return CommFamily.linear(ops, params, order, p.get("mode", SIMPLIFIED))


def hodge_to_json(data: HodgeData) -> dict:
    out = {"C": {"parities": list(data.C.parity), "Q": map_to_json(data.Q)},
           "G": map_to_json(data.G), "G_minus": map_to_json(data.G_minus),
           "i": map_to_json(data.i), "pi": map_to_json(data.pi),
           "W": {"parities": list(data.W.parity)}}
    if data.window is not None:
        out["window"] = list(data.window)
    return out


def parse_bcov(p, path=("payload",), field="q") -> BCOVData:
    cx = _complex_from(p["B"], path + ("B",), "b", field)
    B = cx.space
    W = _space(p["W"]["parities"], "w")
    window = tuple(p["window"]) if "window" in p else None
    return BCOVData(B, _map(p["m"], path + ("m",), B.power(2), B, 0, field), cx.Q,
                    _map(p["G_minus"], path + ("G_minus",), B, B, 1, field),
                    _map(p["G"], path + ("G",), B, B, 1, field),
                    _map(p["i"], path + ("i",), W, B, 0, field),
                    _map(p["pi"], path + ("pi",), B, W, 0, field),
                    p.get("unit"), window)


def bcov_to_json(data: BCOVData) -> dict:
    out = {"B": {"parities": list(data.B.parity), "Q": map_to_json(data.Q)},
           "m": map_to_json(data.m), "G": map_to_json(data.G), "G_minus": map_to_json(data.G_minus),
           "i": map_to_json(data.i), "pi": map_to_json(data.pi), "W": {"parities": list(data.W.parity)}}
    if data.unit is not None:
        out["unit"] = data.unit
    if data.window is not None:
        out["window"] = list(data.window)
    return out


# model builders ----------------------------------------------------------------------

def build_model(name: str, params: dict) -> dict:
    """A complete problem document for one of the built-in models.

    ``polyvector`` takes ``wprime`` (coefficients, lowest degree first),
    ``cutoff`` and optionally ``kind`` (``commutativity`` or ``bcov``);
    ``saito`` takes ``n`` and optionally ``order``.
    """
    if name == "polyvector":
        wprime = [parse_scalar(c) for c in params["wprime"]]
        model = polyvector_model(wprime, int(params["cutoff"]))
        kind = params.get("kind", "commutativity")
        if kind == "commutativity":
            payload = hodge_to_json(model.hodge)
            payload["family"] = {"params": [f"t{a + 1}" for a in range(model.mu)],
                                 "operators": [map_to_json(m) for m in model.multiplications],
                                 "mode": SIMPLIFIED}
        elif kind == "bcov":
            payload = bcov_to_json(model.bcov())
        else:
            raise ValueError(f"polyvector models build commutativity or bcov problems, not {kind!r}")
        doc = {"kind": kind, "payload": payload,
               "model": {"name": name, "wprime": [format_scalar(Fraction(c)) for c in model.wprime],
                         "cutoff": model.cutoff}}
    elif name == "saito":
        n = int(params["n"])
        if n < 3:
            raise ValueError("n must be at least 3")
        payload = {"n": n, "order": int(params.get("order", 3)), "section": params.get("section", "monomial")}
        doc = {"kind": "saito", "payload": payload, "model": {"name": name, "n": n}}
    else:
        raise ValueError(f"unknown model {name!r}; expected polyvector or saito")
    if "order" in params:
        doc["order"] = int(params["order"])
    validate(doc)
    return doc
