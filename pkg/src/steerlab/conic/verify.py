"""Independent a-posteriori checks of solver output."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cones import Cone
from .problem import ConicProblem, StandardForm
from .solver import ConicSolution, Status

VIOLATION_TOL = 1e-7
RAY_TOL = 1e-8


@dataclass
class VerificationReport:
    status: Status
    metrics: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags

    def __str__(self) -> str:
        body = ", ".join(f"{k}={v:.3g}" for k, v in self.metrics.items())
        return f"{self.status.value}: {body}" + (f" FLAGS {self.flags}" if self.flags else "")


def _check(report, name, value, tol):
    report.metrics[name] = float(value)
    if not value <= tol:
        report.flags.append(name)


def verify_solution(problem: ConicProblem | StandardForm, solution: ConicSolution) -> VerificationReport:
    """Recompute residuals, cone margins and duality gap from scratch.

    Only the problem data and the returned vectors are used.  Residuals are
    relative to ``1 + |rhs|``; cone margins and the gap are absolute.
    """
    form = problem.compile() if isinstance(problem, ConicProblem) else problem
    c, A, b, G, h = form.c, form.A, form.b, form.G, form.h
    cone = Cone(form.dims)
    rep = VerificationReport(solution.status)
    x, y, z = solution.x, solution.y, solution.z

    if solution.status is Status.OPTIMAL:
        s = h - G @ x
        _check(rep, "eq_residual", np.linalg.norm(A @ x - b) / (1 + np.linalg.norm(b)), VIOLATION_TOL)
        _check(rep, "primal_cone_violation", max(0.0, -cone.margin(s)) if s.size else 0.0, VIOLATION_TOL)
        _check(rep, "dual_residual", np.linalg.norm(A.T @ y + G.T @ z - c) / (1 + np.linalg.norm(c)), VIOLATION_TOL)
        _check(rep, "dual_cone_violation", max(0.0, -cone.margin(z)) if z.size else 0.0, VIOLATION_TOL)
        primal = c @ x + form.offset
        dual = b @ y + h @ z + form.offset
        # weak duality: primal <= dual up to tolerance
        _check(rep, "duality_gap", abs(dual - primal), VIOLATION_TOL * max(1.0, abs(primal)))
        _check(rep, "weak_duality", primal - dual, VIOLATION_TOL)
        _check(rep, "value_mismatch", abs(primal - solution.value), VIOLATION_TOL * max(1.0, abs(primal)))
    elif solution.status is Status.UNBOUNDED:
        r = solution.ray
        if r is None:
            rep.flags.append("missing_ray")
            return rep
        scale = max(1.0, np.linalg.norm(r))
        _check(rep, "ray_eq_residual", np.linalg.norm(A @ r) / scale, RAY_TOL)
        _check(rep, "ray_cone_violation", max(0.0, -cone.margin(-G @ r)) / scale if h.size else 0.0, RAY_TOL)
        _check(rep, "ray_not_improving", -(c @ r), -RAY_TOL)
    elif solution.status is Status.INFEASIBLE:
        scale = max(1.0, np.linalg.norm(y), np.linalg.norm(z))
        _check(rep, "farkas_residual", np.linalg.norm(A.T @ y + G.T @ z) / scale, RAY_TOL)
        _check(rep, "farkas_cone_violation", max(0.0, -cone.margin(z)) if z.size else 0.0, RAY_TOL)
        _check(rep, "farkas_not_separating", b @ y + h @ z, -RAY_TOL)
    else:
        rep.flags.append("no_certificate")
    return rep
