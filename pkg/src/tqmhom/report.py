"""Named exact residuals, collected into pass/fail reports."""

from __future__ import annotations

from dataclasses import dataclass, field

from .forms import Form
from .graded import GradedMap
from .scalars import format_scalar
from .series import Series


def is_zero(residual) -> bool:
    if residual is None:
        return True
    if isinstance(residual, (GradedMap, Form, Series)):
        return residual.is_zero()
    if isinstance(residual, dict):
        return all(is_zero(v) for v in residual.values())
    if isinstance(residual, (list, tuple)):
        return all(is_zero(v) for v in residual)
    return residual == 0


def series_to_json(s: Series):
    return [
        {"exp": list(e), "coeff": format_scalar(c)} for e, c in sorted(s.coeffs.items())
    ]


def residual_to_json(residual):
    if isinstance(residual, GradedMap):
        return {
            "variables": list(residual.ring.variables),
            "entries": [
                {"row": r, "col": c, "value": series_to_json(s)}
                for r, c, s in residual.nonzero_entries()
            ],
        }
    if isinstance(residual, Form):
        return {
            "form": [
                {"dt": list(k), "coefficient": residual_to_json(v)}
                for k, v in sorted(residual.components.items())
            ]
        }
    if isinstance(residual, Series):
        return series_to_json(residual)
    if isinstance(residual, dict):
        return {str(k): residual_to_json(v) for k, v in sorted(residual.items(), key=lambda kv: str(kv[0]))}
    if isinstance(residual, (list, tuple)):
        return [residual_to_json(v) for v in residual]
    if residual is None:
        return None
    return format_scalar(residual) if not isinstance(residual, (str, bool)) else residual


@dataclass
class Check:
    name: str
    residual: object
    module: str = ""
    ref: str = ""

    @property
    def passed(self) -> bool:
        return is_zero(self.residual)

    def to_json(self):
        out = {"name": self.name, "status": "pass" if self.passed else "fail"}
        if self.module:
            out["module"] = self.module
        if self.ref:
            out["ref"] = self.ref
        if not self.passed:
            out["residual"] = residual_to_json(self.residual)
        return out


@dataclass
class Report:
    checks: list = field(default_factory=list)

    def add(self, name, residual, module="", ref="") -> "Report":
        self.checks.append(Check(name, residual, module, ref))
        return self

    def extend(self, other: "Report", prefix: str = "") -> "Report":
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.residual, c.module, c.ref))
        return self

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self):
        return {"status": "pass" if self.passed else "fail", "checks": [c.to_json() for c in self.checks]}

    def __bool__(self):
        return self.passed
