"""Public entry point of the conic solver: presolve, solve, map back."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .ipm import conelp
from .problem import ConicProblem, StandardForm, Variable

# relative size of a singular value (or objective component) treated as zero
RANK_TOL = 1e-9


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical-failure"


@dataclass
class ConicSolution:
    """Result of :func:`solve`.

    ``x`` and ``s`` are the primal point and cone slack, ``y`` and ``z`` the
    equality and cone multipliers with ``A'y + G'z = c``.  For an unbounded
    problem ``ray`` is a direction with ``A ray = 0``, ``-G ray in K`` and
    ``c'ray = 1``; for an infeasible one ``(y, z)`` is a Farkas certificate.
    """

    status: Status
    value: float
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    s: np.ndarray
    gap: float
    residuals: dict
    iterations: int = 0
    ray: np.ndarray | None = None
    form: StandardForm | None = field(default=None, repr=False)
    variables: tuple = field(default=(), repr=False)

    @property
    def primal(self) -> dict:
        return {v.name: self.x[v.index] for v in self.variables}

    @property
    def dual(self) -> dict:
        out = {}
        if self.form is not None:
            for name, sl in self.form.eq_slices.items():
                out[name] = self.y[sl]
            for name, sl in self.form.cone_slices.items():
                out[name] = self.z[sl]
        return out

    def __getitem__(self, var: Variable) -> np.ndarray:
        return self.x[var.index]

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


def _nullspace_split(M: np.ndarray, n: int):
    if M.shape[0] == 0:
        return np.zeros((n, 0)), np.eye(n)
    _, sv, Vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(sv > RANK_TOL * max(1.0, sv[0]))) if sv.size else 0
    return Vt[:rank].T, Vt[rank:].T


def _empty(form, status, message, value=np.nan):
    n, p, m = form.n, form.b.size, form.h.size
    return ConicSolution(status, value, np.zeros(n), np.zeros(p), np.zeros(m), np.zeros(m), np.inf, {"message": message}, form=form)


def _run(form: StandardForm) -> ConicSolution:
    """Presolve to full column rank and independent equalities, then run the IPM."""
    c, A, b, G, h, dims = form.c, form.A, form.b, form.G, form.h, form.dims
    n, p, m = form.n, b.size, h.size
    Q, N = _nullspace_split(np.vstack([A, G]), n)

    # an objective component along the joint nullspace of A and G is an
    # improving ray whenever the problem is feasible
    cn = N.T @ c
    if N.shape[1] and np.linalg.norm(cn) > RANK_TOL * max(1.0, np.linalg.norm(c)):
        feas = _run(StandardForm(np.zeros(n), A, b, G, h, dims, 0.0, form.eq_slices, form.cone_slices))
        if feas.status is not Status.OPTIMAL:
            return feas
        ray = N @ cn
        ray /= c @ ray
        feas.status, feas.value, feas.ray, feas.form = Status.UNBOUNDED, np.inf, ray, form
        feas.residuals["message"] = "objective has a component outside the constrained subspace"
        return feas

    Ar, Gr, cr = A @ Q, G @ Q, Q.T @ c
    k = Q.shape[1]
    # eliminate the equalities: u = u0 + Z w with Ar u0 = b and Ar Z = 0
    if p:
        U, sv, Vt = np.linalg.svd(Ar, full_matrices=True)
        rank = int(np.sum(sv > RANK_TOL * max(1.0, sv[0]))) if sv.size else 0
        Ur, Uo = U[:, :rank], U[:, rank:]
        inconsistent = Uo.T @ b
        if Uo.shape[1] and np.linalg.norm(inconsistent) > 1e-9 * max(1.0, np.linalg.norm(b)):
            sol = _empty(form, Status.INFEASIBLE, "inconsistent equality constraints")
            y = -Uo @ inconsistent
            sol.y = y / -(b @ y)
            return sol
        u0 = Vt[:rank].T @ ((Ur.T @ b) / sv[:rank])
        Z = Vt[rank:].T
    else:
        u0, Z = np.zeros(k), np.eye(k)
    Gw, hw, cw = Gr @ Z, h - Gr @ u0, Z.T @ cr

    res = conelp(-cw, Gw, hw, dims, np.zeros((0, Z.shape[1])), np.zeros(0))
    z, s = res.z, res.s
    sol = ConicSolution(Status.NUMERICAL_FAILURE, np.nan, Q @ (u0 + Z @ res.x), np.zeros(p), z, s, res.gap, {}, res.iterations, form=form)
    sol.residuals = {"primal": res.pres, "dual": res.dres, "message": res.status}
    if res.status == "optimal":
        sol.status = Status.OPTIMAL
        sol.value = float(c @ sol.x + form.offset)
        if p:
            sol.y = np.linalg.lstsq(A.T, c - G.T @ z, rcond=None)[0]
    elif res.status == "primal-infeasible":
        sol.status = Status.INFEASIBLE
        if p:
            sol.y = np.linalg.lstsq(A.T, -(G.T @ z), rcond=None)[0]
    elif res.status in ("dual-infeasible", "objective-limit"):
        sol.status = Status.UNBOUNDED
        sol.value = np.inf
        ray = Q @ (Z @ res.x)
        if res.status == "objective-limit":
            # the iterate itself is far out along an improving direction
            ray = sol.x / np.linalg.norm(sol.x)
        sol.ray = ray / (c @ ray)
    return sol


def solve(problem: ConicProblem | StandardForm) -> ConicSolution:
    """Maximise a conic problem.

    Returns ``status`` optimal (with ``value``), unbounded (with ``ray``),
    infeasible (with a dual certificate) or numerical-failure (with the best
    iterate found).  Never raises on a well-formed problem.
    """
    form = problem.compile() if isinstance(problem, ConicProblem) else problem
    sol = _run(form)
    if isinstance(problem, ConicProblem):
        sol.variables = tuple(problem.variables)
    return sol
