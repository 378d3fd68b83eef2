"""Four comparison steering inequalities evaluated on correlation matrices."""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, ResourceLimitError
from .quantum import CorrelationMatrix

VIOLATION_TOL = 1e-9
MAX_LS_SETTINGS = 20


@dataclass(frozen=True)
class InequalityReport:
    name: str  # LS, CHSH-LS, DBS or RIS
    value: float
    bound: float
    m: int
    d_A: int | None = None
    f_plus: float | None = None
    f_minus: float | None = None

    @property
    def violated(self) -> bool:
        return bool(self.value > self.bound + VIOLATION_TOL)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["violated"] = self.violated
        return out


def _matrix(M) -> np.ndarray:
    return M.M if isinstance(M, CorrelationMatrix) else np.asarray(M, dtype=float)


def linear_steering(M, bob) -> InequalityReport:
    """``|sum_i <A_i B_i>|`` against ``max_a lambda_max(sum_i a_i B_i)`` over signs ``a``.

    Settings are paired index-wise; Bob's observables are the differences of
    his two effects.
    """
    M = _matrix(M)
    effects = np.asarray(bob.effects)
    n = min(M.shape) if M.ndim == 2 else 0
    if M.ndim != 2 or M.shape[0] != M.shape[1] or effects.shape[0] != n:
        raise DomainError("linear steering needs n paired settings on both sides")
    if effects.shape[1] != 2:
        raise DomainError("linear steering needs two-outcome measurements")
    if n > MAX_LS_SETTINGS:
        raise ResourceLimitError(f"2^{n} sign vectors exceed the enumeration cap")
    obs = effects[:, 0] - effects[:, 1]
    bound = -np.inf
    for signs in itertools.product((1.0, -1.0), repeat=n):
        op = np.tensordot(np.asarray(signs), obs, axes=1)
        bound = max(bound, float(np.linalg.eigvalsh(op)[-1]))
    return InequalityReport("LS", float(abs(np.trace(M))), bound, n)


def chsh_like_steering(M) -> InequalityReport:
    """``sqrt(f+) + sqrt(f-)`` with ``f+- = <(A1 +- A2) B1>^2 + <(A1 +- A2) B2>^2``, bound 2."""
    M = _matrix(M)
    if M.shape != (2, 2):
        raise DomainError(f"CHSH-like steering needs a 2x2 correlation matrix, got {M.shape}")
    plus, minus = M[0] + M[1], M[0] - M[1]
    f_plus, f_minus = float(plus @ plus), float(minus @ minus)
    return InequalityReport("CHSH-LS", np.sqrt(f_plus) + np.sqrt(f_minus), 2.0, 2, f_plus=f_plus, f_minus=f_minus)


def dbs_bound(m: int, d_A: int) -> float:
    return float((1.0 / np.sqrt(d_A)) * ((np.sqrt(2.0 * d_A) - 1.0) / (m * np.sqrt(d_A))) ** m)


def dbs(M, d_A: int = 2) -> InequalityReport:
    """Dimension-bounded criterion: ``|det M|`` against a bound fixed by ``m`` and ``d_A``."""
    M = _matrix(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"DBS needs a square correlation matrix, got {M.shape}")
    if d_A < 2:
        raise DomainError("local dimension must be at least 2")
    m = M.shape[0]
    return InequalityReport("DBS", float(abs(np.linalg.det(M))), dbs_bound(m, d_A), m, d_A=d_A)


def ris(M) -> InequalityReport:
    """Rotationally invariant criterion: trace norm of ``M`` against ``sqrt(m)``."""
    M = _matrix(M)
    if M.ndim != 2:
        raise DomainError("RIS needs a matrix")
    m = M.shape[0]
    value = float(np.sum(np.linalg.svd(M, compute_uv=False)))
    return InequalityReport("RIS", value, float(np.sqrt(m)), m)


def all_reports(M, bob, d_A: int = 2) -> list[InequalityReport]:
    """Every criterion applicable to the shape of ``M`` (CHSH-LS only for 2x2)."""
    M = _matrix(M)
    reports = [linear_steering(M, bob)]
    if M.shape == (2, 2):
        reports.append(chsh_like_steering(M))
    reports += [dbs(M, d_A), ris(M)]
    return reports
