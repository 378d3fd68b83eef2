"""Steering robustness, its measurement-restricted variant, and the
non-signalling projection of experimental data.

All 2x2 Hermitian unknowns are parametrised by Pauli coordinates
``H = h0 I + hx X + hy Y + hz Z``; the conic layer turns each 2x2 PSD
condition into a second-order cone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .conic import ConicProblem, ConicSolution, Status, solve, verify_solution
from .errors import DomainError, ResourceLimitError, SolverError
from .quantum import (
    PAULI_BASIS,
    Assemblage,
    JointDistribution,
    MeasurementSet,
    distribution_from_assemblage,
    min_eigenvalue,
    pauli_coefficients,
)

MAX_STRATEGIES = 10**6
STEERABLE_THRESHOLD = 1e-6
WITNESS_TOL = 1e-7


@dataclass(frozen=True)
class DeterministicStrategySet:
    """All maps ``x -> a``; ``table[lam, x]`` is the outcome strategy ``lam`` assigns to ``x``.

    Strategies are numbered by their base-``n_a`` digits with ``x = 0`` most significant.
    """

    n_x: int
    n_a: int
    table: np.ndarray

    def __len__(self) -> int:
        return self.table.shape[0]

    @property
    def D(self) -> np.ndarray:
        """One-hot array ``D[lam, x, a]``."""
        return (self.table[:, :, None] == np.arange(self.n_a)).astype(float)


def enumerate_strategies(n_x: int, n_a: int) -> DeterministicStrategySet:
    if n_x < 1 or n_a < 1:
        raise DomainError("need at least one setting and one outcome")
    count = n_a**n_x
    if count > MAX_STRATEGIES:
        raise ResourceLimitError(f"{n_a}^{n_x} = {count} deterministic strategies exceeds {MAX_STRATEGIES}")
    lam = np.arange(count)
    powers = n_a ** np.arange(n_x - 1, -1, -1)
    table = (lam[:, None] // powers[None, :]) % n_a
    return DeterministicStrategySet(n_x, n_a, table)


@dataclass
class SteeringFunctional:
    """A steering witness.

    ``mode`` is ``"free-F"`` (any Hermitian ``F[x, a]``) or ``"bob-restricted"``
    (``F[x, a] = sum_{y,b} alpha[x, y, a, b] B[y, b]``).
    """

    induced_F: np.ndarray
    mode: str
    alpha: np.ndarray | None = None
    bob_effects: np.ndarray | None = None
    bob_bloch: np.ndarray | None = None

    @property
    def n_x(self) -> int:
        return self.induced_F.shape[0]

    def reconstruct_F(self) -> np.ndarray:
        return np.einsum("xyab,ybij->xaij", self.alpha, self.bob_effects)

    def feasibility_margin(self) -> float:
        """Smallest eigenvalue over ``F[x, a]`` and every ``I - sum_x F[x, lam(x)]``."""
        F = self.induced_F
        nx, na = F.shape[:2]
        margin = min(min_eigenvalue(F[x, a]) for x in range(nx) for a in range(na))
        strategies = enumerate_strategies(nx, na)
        d = F.shape[-1]
        for row in strategies.table:
            margin = min(margin, min_eigenvalue(np.eye(d) - F[np.arange(nx), row].sum(axis=0)))
        return float(margin)

    def to_json(self) -> str:
        data = {"mode": self.mode, "n_x": int(self.n_x), "n_a": int(self.induced_F.shape[1])}
        if self.alpha is not None:
            data["n_y"] = int(self.alpha.shape[1])
            data["alpha"] = self.alpha.tolist()
        if self.bob_bloch is not None:
            data["bob_bloch"] = np.asarray(self.bob_bloch).tolist()
        if self.mode == "free-F":
            data["F_pauli"] = pauli_coefficients(self.induced_F).tolist()
        return json.dumps(data)

    @classmethod
    def from_json(cls, text: str, bob_effects: np.ndarray | None = None) -> "SteeringFunctional":
        data = json.loads(text)
        if data["mode"] == "free-F":
            F = np.einsum("xak,kij->xaij", np.asarray(data["F_pauli"]), PAULI_BASIS)
            return cls(F, "free-F")
        alpha = np.asarray(data["alpha"], dtype=float)
        bloch = np.asarray(data["bob_bloch"]) if "bob_bloch" in data else None
        if bob_effects is None:
            if bloch is None:
                raise DomainError("witness needs Bob's measurements to rebuild F")
            bob_effects = MeasurementSet.from_bloch(bloch).effects
        F = np.einsum("xyab,ybij->xaij", alpha, bob_effects)
        return cls(F, "bob-restricted", alpha, np.asarray(bob_effects), bloch)


@dataclass
class RobustnessResult:
    value: float
    status: Status
    witness: SteeringFunctional | None
    solution: ConicSolution = field(repr=False)

    @property
    def steerable(self) -> bool:
        return self.status is Status.OPTIMAL and self.value > STEERABLE_THRESHOLD


def _one_op(K: int, k: int) -> np.ndarray:
    """Hermitian coefficients of a 4K-block of Pauli coordinates, selecting operator ``k``."""
    H = np.zeros((4 * K, 2, 2), dtype=complex)
    H[4 * k : 4 * k + 4] = PAULI_BASIS
    return H


def _robustness_problem(n_x, n_a, op_coeffs, var, prob, fast_path=True):
    """Add ``F[x, a] >= 0`` and ``I - sum_x F[x, lam(x)] >= 0`` to ``prob``.

    ``op_coeffs[x, a]`` gives the Hermitian coefficients of ``F[x, a]`` in ``var``.
    """
    for x in range(n_x):
        for a in range(n_a):
            prob.add_hermitian_psd({var: op_coeffs[x][a]}, name=f"F[{x},{a}]", fast_path=fast_path)
    for lam, row in enumerate(enumerate_strategies(n_x, n_a).table):
        total = sum(op_coeffs[x][row[x]] for x in range(n_x))
        prob.add_hermitian_psd({var: -total}, constant=np.eye(2), name=f"lhs[{lam}]", fast_path=fast_path)


def _check_solution(prob, sol, what):
    if sol.status is Status.NUMERICAL_FAILURE:
        raise SolverError(f"{what}: solver failed ({sol.residuals})")
    if sol.status is Status.OPTIMAL:
        report = verify_solution(prob, sol)
        if not report.ok:
            raise SolverError(f"{what}: optimum failed verification: {report}")


def steering_robustness(assemblage: Assemblage, fast_path: bool = True) -> RobustnessResult:
    """Steering robustness of a normalised assemblage with its optimal free witness.

    ``fast_path=False`` states the 2x2 PSD conditions through the real
    embedding instead of second-order cones (used for cross-checks).
    """
    sigma = assemblage.members
    if sigma.shape[-1] != 2:
        raise DomainError("steering robustness is implemented for qubit assemblages")
    if abs(assemblage.total_trace - 1.0) > 1e-9:
        raise DomainError("assemblage must be normalised")
    n_x, n_a = sigma.shape[:2]
    K = n_x * n_a
    prob = ConicProblem()
    f = prob.add_variable("F", "free", 4 * K)
    ops = [[_one_op(K, x * n_a + a) for a in range(n_a)] for x in range(n_x)]
    _robustness_problem(n_x, n_a, ops, f, prob, fast_path)
    # tr[F sigma] = 2 (f . s) in Pauli coordinates
    prob.set_objective({f: 2.0 * pauli_coefficients(sigma).reshape(-1)}, offset=-1.0)
    sol = solve(prob)
    _check_solution(prob, sol, "steering robustness")
    witness = None
    if sol.status is Status.OPTIMAL:
        F = np.einsum("xak,kij->xaij", sol.x.reshape(n_x, n_a, 4), PAULI_BASIS)
        witness = SteeringFunctional(F, "free-F")
    return RobustnessResult(float(sol.value), sol.status, witness, sol)


def _alpha_coeffs(n_x, n_y, n_a, n_b, bob_effects):
    """``coeffs[x][a]``: Hermitian coefficients of ``F[x, a]`` over the flattened alpha."""
    size = n_x * n_y * n_a * n_b
    out = []
    for x in range(n_x):
        row = []
        for a in range(n_a):
            H = np.zeros((n_x, n_y, n_a, n_b, 2, 2), dtype=complex)
            H[x, :, a, :] = bob_effects
            row.append(H.reshape(size, 2, 2))
        out.append(row)
    return out


def adapted_steering_robustness(dist: JointDistribution, bob) -> RobustnessResult:
    """Adapted steering robustness: the robustness SDP restricted to witnesses
    ``F[x, a] = sum_{y,b} alpha[x, y, a, b] B[y, b]``.

    Signalling input gives ``status`` unbounded rather than an exception.
    """
    effects = np.asarray(bob.effects)
    n_x, n_y, n_a, n_b = dist.shape
    if effects.shape[:2] != (n_y, n_b):
        raise DomainError(f"Bob's effects {effects.shape[:2]} do not match the distribution's (y, b) = {(n_y, n_b)}")
    prob = ConicProblem()
    alpha = prob.add_variable("alpha", "free", n_x * n_y * n_a * n_b)
    _robustness_problem(n_x, n_a, _alpha_coeffs(n_x, n_y, n_a, n_b, effects), alpha, prob)
    prob.set_objective({alpha: dist.p.reshape(-1)}, offset=-1.0)
    sol = solve(prob)
    _check_solution(prob, sol, "adapted steering robustness")
    witness = None
    if sol.status is Status.OPTIMAL:
        a = sol.x.reshape(n_x, n_y, n_a, n_b)
        witness = SteeringFunctional(
            np.einsum("xyab,ybij->xaij", a, effects), "bob-restricted", a, effects, getattr(bob, "bloch_vectors", None)
        )
    return RobustnessResult(float(sol.value), sol.status, witness, sol)


def evaluate_witness(witness: SteeringFunctional, data) -> float:
    """``sum alpha p - 1`` on a distribution, or ``sum tr[F sigma] - 1`` on an assemblage."""
    if isinstance(data, Assemblage):
        if data.members.shape != witness.induced_F.shape:
            raise DomainError("witness and assemblage shapes differ")
        return float(np.einsum("xaij,xaji->", witness.induced_F, data.members).real - 1.0)
    if witness.alpha is None:
        raise DomainError("a free-F witness can only be evaluated on an assemblage")
    p = data.p if isinstance(data, JointDistribution) else np.asarray(data)
    if p.shape != witness.alpha.shape:
        raise DomainError(f"witness shape {witness.alpha.shape} does not match distribution {p.shape}")
    return float(np.sum(witness.alpha * p) - 1.0)


@dataclass
class NsaResult:
    t: float
    sigma_tilde: Assemblage
    ns_dist: JointDistribution
    solution: ConicSolution = field(repr=False)

    @property
    def realised(self) -> np.ndarray:
        """``tr[sigma_tilde B]``, the unnormalised table dominating the input."""
        return self.ns_dist.p * (1.0 + self.t)


def nonsignalling_projection(dist_exp: JointDistribution, bob) -> NsaResult:
    """Smallest ``t`` such that ``(1 + t) p_NS >= p_exp`` for a non-signalling,
    Bob-realisable ``p_NS``.

    The common reduced state ``R = sum_a sigma[x, a]`` is a variable and the
    last outcome is eliminated, so non-signalling holds exactly.
    """
    effects = np.asarray(bob.effects)
    n_x, n_y, n_a, n_b = dist_exp.shape
    if effects.shape[:2] != (n_y, n_b):
        raise DomainError("Bob's effects do not match the distribution")
    if effects.shape[-1] != 2:
        raise DomainError("the projection is implemented for qubit measurements")
    free = n_a - 1
    prob = ConicProblem()
    r = prob.add_variable("R", "free", 4)
    s = prob.add_variable("sigma", "free", 4 * n_x * free) if free else None

    def coeffs(x, a):
        # Hermitian coefficients of sigma[x, a] over (R, sigma)
        cr = np.zeros((4, 2, 2), dtype=complex)
        cs = np.zeros((4 * n_x * free, 2, 2), dtype=complex) if free else None
        if a < free:
            cs[4 * (x * free + a) : 4 * (x * free + a) + 4] = PAULI_BASIS
        else:
            cr[:] = PAULI_BASIS
            for k in range(free):
                cs[4 * (x * free + k) : 4 * (x * free + k) + 4] = -PAULI_BASIS
        return {r: cr, s: cs} if free else {r: cr}

    for x in range(n_x):
        for a in range(n_a):
            co = coeffs(x, a)
            prob.add_hermitian_psd(co, name=f"sigma[{x},{a}]")
            # tr[sigma B] >= p for every (y, b)
            rows = {v: np.real(np.einsum("kij,ybji->ybk", H, effects)).reshape(n_y * n_b, -1) for v, H in co.items()}
            prob.add_inequality(rows, dist_exp.p[x, :, a, :].reshape(-1), name=f"dominate[{x},{a}]")
    # (1/n_x) sum_{a,x} tr sigma - 1 = tr R - 1 = 2 r0 - 1; maximise its negative
    prob.set_objective({r: [-2.0, 0.0, 0.0, 0.0]}, offset=1.0)
    sol = solve(prob)
    if sol.status is Status.INFEASIBLE:
        raise DomainError("no assemblage reproduces the data; check that Bob's effects are valid POVMs")
    if sol.status is not Status.OPTIMAL:
        raise SolverError(f"non-signalling projection: solver returned {sol.status.value} ({sol.residuals})")
    report = verify_solution(prob, sol)
    if not report.ok:
        raise SolverError(f"non-signalling projection failed verification: {report}")
    t = -sol.value
    members = np.empty((n_x, n_a, 2, 2), dtype=complex)
    for x in range(n_x):
        for a in range(n_a):
            members[x, a] = sum(np.tensordot(sol.x[v.index], H, axes=([0], [0])) for v, H in coeffs(x, a).items())
    sigma = Assemblage(members, tol=WITNESS_TOL)
    # entries can dip below zero by solver round-off only
    p_ns = np.clip(distribution_from_assemblage(members, effects), 0.0, None) / (1.0 + t)
    return NsaResult(float(t), sigma, JointDistribution(p_ns), sol)
