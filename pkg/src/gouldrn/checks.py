"""Check records shared by the property suites, the scenario runner and the audit."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .convex import ConvexBody, SupportFn


def fmt_num(x):
    """Rationals as "p/q" strings, floats with 12 significant digits."""
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    return x


def jsonable(x):
    """Recursively convert values for a stable JSON dump."""
    if isinstance(x, ConvexBody):
        return x.to_json()
    if isinstance(x, SupportFn):
        return {"dim": x.dim, "values": [fmt_num(v) for v in x.values()]}
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return x.to_json()
    if hasattr(x, "mask") and hasattr(x, "key"):
        return x.key()
    return fmt_num(x)


@dataclass
class Check:
    """One verified property: ``ok`` iff ``residual <= tolerance``
    (or the boolean condition held, when there is no residual)."""

    id: str
    ref: str
    ok: bool
    value: object = None
    tolerance: object = None
    residual: object = None

    @property
    def status(self) -> str:
        return "pass" if self.ok else "fail"

    def row(self) -> dict:
        return {
            "id": self.id,
            "ref": self.ref,
            "status": self.status,
            "value": jsonable(self.value),
            "tolerance": fmt_num(self.tolerance),
            "residual": fmt_num(self.residual),
        }


def within(id, ref, residual, tol, value=None) -> Check:
    return Check(id, ref, residual <= tol, value=value, tolerance=tol, residual=residual)


def holds(id, ref, cond, value=None) -> Check:
    return Check(id, ref, bool(cond), value=value)
