"""Check records shared by the oracle and the identity verifier."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

RESIDUAL_FLOOR = 1e-12
NEAR_ZERO = 1e-9


@dataclass(frozen=True)
class CheckResult:
    """One identity verification: two independently computed sides.

    ``rel_residual`` is |lhs - rhs| / max(|lhs|, |rhs|, 1e-12).  A check
    passes when the relative residual is below tolerance, except that
    when both sides are near zero (below 1e-9) the absolute residual is
    compared instead.  Checks whose target value is exactly zero use
    ``mode="absolute"`` with a magnitude-scaled tolerance.  A check that
    could not be trusted (non-converged oracle, ambiguous eigenvalue
    tracking) is marked ``conclusive=False`` and never counts as a pass.
    """

    name: str
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    tolerance: float
    passed: bool
    conclusive: bool = True
    context: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_residual": self.abs_residual,
            "rel_residual": self.rel_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "conclusive": self.conclusive,
            "context": self.context,
        }


def make_check(
    name: str,
    lhs: float,
    rhs: float,
    tolerance: float,
    *,
    mode: str = "relative",
    conclusive: bool = True,
    context: dict[str, Any] | None = None,
) -> CheckResult:
    lhs = float(lhs)
    rhs = float(rhs)
    abs_res = abs(lhs - rhs)
    rel_res = abs_res / max(abs(lhs), abs(rhs), RESIDUAL_FLOOR)
    context = dict(context or {})
    if mode == "absolute":
        passed = abs_res < tolerance
        context.setdefault("comparison", "absolute")
    elif mode == "relative":
        if max(abs(lhs), abs(rhs)) <= NEAR_ZERO:
            passed = abs_res < tolerance
        else:
            passed = rel_res < tolerance
    else:
        raise ValueError(f"unknown check mode {mode!r}")
    conclusive = bool(conclusive)
    if not conclusive:
        passed = False
    return CheckResult(
        name=name,
        lhs=lhs,
        rhs=rhs,
        abs_residual=abs_res,
        rel_residual=rel_res,
        tolerance=float(tolerance),
        passed=bool(passed),
        conclusive=conclusive,
        context=context,
    )
