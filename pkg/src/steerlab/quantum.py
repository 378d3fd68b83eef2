"""Qubit-pair linear algebra: states, projective measurements, assemblages and
joint probability tables.

Conventions used throughout the package:

* tensor order is Alice (x) Bob;
* outcome labels ``+1, -1`` map to table index ``0, 1``;
* joint tables are indexed ``p[x, y, a, b]`` and assemblages ``sigma[x, a]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, UnsupportedError

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-9

OUTCOME_SIGNS = np.array([1.0, -1.0])

IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])
#: identity followed by the three Pauli matrices
PAULI_BASIS = np.stack([IDENTITY, PAULI_X, PAULI_Y, PAULI_Z])

SINGLET_KET = np.array([0.0, -1.0, 1.0, 0.0], dtype=complex) / np.sqrt(2.0)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


def hermitian(matrix, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a square Hermitian matrix and return it as a read-only complex array."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    if m.size and np.max(np.abs(m - m.conj().T)) > tol:
        raise DomainError("matrix is not Hermitian")
    return _frozen(m)


def min_eigenvalue(matrix: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(matrix)[0])


def clip_psd(matrix: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Zero out eigenvalues in ``[-tol, 0)``; larger negatives are a domain error."""
    w, v = np.linalg.eigh(matrix)
    if w[0] < -tol:
        raise DomainError(f"matrix has eigenvalue {w[0]:.3e} below -{tol:g}")
    if w[0] >= 0:
        return matrix
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T


def bloch_operator(vec) -> np.ndarray:
    """Return ``vec . sigma`` for a real 3-vector."""
    return np.tensordot(np.asarray(vec, dtype=float), PAULIS, axes=1)


def pauli_coefficients(matrix: np.ndarray) -> np.ndarray:
    """Real coordinates ``(h0, hx, hy, hz)`` with ``H = h0 I + h . sigma``."""
    m = np.asarray(matrix)
    return np.real(np.einsum("kij,...ji->...k", PAULI_BASIS, m)) / 2.0


def partial_trace_alice(rho: np.ndarray) -> np.ndarray:
    return np.einsum("ibic->bc", rho.reshape(2, 2, 2, 2))


@dataclass(frozen=True)
class DensityMatrix:
    """A trace-one positive semidefinite operator (4x4 for the pair, 2x2 reduced)."""

    rho: np.ndarray

    def __post_init__(self):
        rho = hermitian(self.rho)
        if rho.shape not in {(2, 2), (4, 4)}:
            raise DomainError(f"density matrix must be 2x2 or 4x4, got {rho.shape}")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > HERMITIAN_TOL:
            raise DomainError(f"density matrix trace is {tr!r}, expected 1")
        if min_eigenvalue(rho) < -PSD_TOL:
            raise DomainError("density matrix is not positive semidefinite")
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


def werner_state(mu: float) -> DensityMatrix:
    """Singlet mixed with white noise: ``mu |psi_s><psi_s| + (1 - mu) I/4``."""
    mu = float(mu)
    if not 0.0 <= mu <= 1.0:
        raise DomainError(f"Werner mixing parameter must lie in [0, 1], got {mu}")
    singlet = np.outer(SINGLET_KET, SINGLET_KET.conj())
    return DensityMatrix(mu * singlet + (1.0 - mu) / 4.0 * np.eye(4))


def singlet_state() -> DensityMatrix:
    return werner_state(1.0)


def fidelity_with_pure(state: DensityMatrix, target: DensityMatrix) -> float:
    """Overlap ``tr[state . target]`` with a rank-one target projector."""
    p = target.rho
    if np.max(np.abs(p @ p - p)) > NORM_TOL:
        raise DomainError("fidelity target must be a rank-one projector")
    if state.dim != target.dim:
        raise DomainError("state and target dimensions differ")
    return float(np.clip(np.trace(state.rho @ p).real, 0.0, 1.0))


@dataclass(frozen=True)
class MeasurementSetting:
    """A two-outcome projective qubit measurement along a Bloch direction.

    ``effects[0]`` belongs to outcome +1 and ``effects[1]`` to outcome -1.
    """

    bloch: np.ndarray
    effects: np.ndarray

    def __post_init__(self):
        bloch = np.asarray(self.bloch, dtype=float)
        effects = np.asarray(self.effects, dtype=complex)
        if bloch.shape != (3,) or abs(np.linalg.norm(bloch) - 1.0) > HERMITIAN_TOL * 10:
            raise DomainError("Bloch vector must be a unit 3-vector")
        if effects.shape != (2, 2, 2):
            raise DomainError(f"expected two 2x2 effects, got shape {effects.shape}")
        check_povm(effects)
        object.__setattr__(self, "bloch", _frozen(bloch))
        object.__setattr__(self, "effects", _frozen(effects))

    @property
    def observable(self) -> np.ndarray:
        return self.effects[0] - self.effects[1]


def check_povm(effects: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    """Raise unless ``effects`` (outcome, d, d) are Hermitian, PSD and sum to I."""
    for e in effects:
        hermitian(e, tol=tol)
        if min_eigenvalue(e) < -PSD_TOL:
            raise DomainError("POVM effect is not positive semidefinite")
    d = effects.shape[-1]
    if np.max(np.abs(effects.sum(axis=0) - np.eye(d))) > tol:
        raise DomainError("POVM effects do not sum to the identity")


def projective_setting(bloch) -> MeasurementSetting:
    """Projectors ``(I +/- n . sigma)/2`` for the direction ``bloch``.

    Vectors within 1e-9 of unit length are renormalised.
    """
    v = np.asarray(bloch, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise DomainError("Bloch vector must have three components")
    norm = np.linalg.norm(v)
    if norm < 1e-12 or abs(norm - 1.0) > 1e-9:
        raise DomainError(f"Bloch vector has norm {norm:.3g}, expected 1")
    v = v / norm
    op = bloch_operator(v)
    effects = np.stack([(IDENTITY + op) / 2.0, (IDENTITY - op) / 2.0])
    return MeasurementSetting(v, effects)


@dataclass(frozen=True)
class MeasurementSet:
    """An ordered collection of measurement settings for one party."""

    settings: tuple[MeasurementSetting, ...]

    def __post_init__(self):
        settings = tuple(self.settings)
        if not settings:
            raise DomainError("a measurement set needs at least one setting")
        object.__setattr__(self, "settings", settings)

    @classmethod
    def from_bloch(cls, vectors: Iterable) -> "MeasurementSet":
        return cls(tuple(projective_setting(v) for v in np.asarray(vectors, dtype=float)))

    @classmethod
    def pauli(cls, axes: Sequence[int] = (0, 1, 2)) -> "MeasurementSet":
        return cls.from_bloch(np.eye(3)[list(axes)])

    @property
    def n_settings(self) -> int:
        return len(self.settings)

    @property
    def effects(self) -> np.ndarray:
        """Array indexed ``[setting, outcome, row, col]``."""
        return np.stack([s.effects for s in self.settings])

    @property
    def bloch_vectors(self) -> np.ndarray:
        return np.stack([s.bloch for s in self.settings])

    def __len__(self) -> int:
        return len(self.settings)


class POVMSet:
    """General (not necessarily projective) qubit POVMs, e.g. loaded from a file.

    Exposes the same ``effects``/``n_settings`` surface as :class:`MeasurementSet`.
    """

    def __init__(self, effects):
        effects = np.asarray(effects, dtype=complex)
        if effects.ndim != 4 or effects.shape[2:] != (2, 2):
            raise DomainError(f"expected effects shaped (y, b, 2, 2), got {effects.shape}")
        for e in effects:
            check_povm(e, tol=1e-9)
        self.effects = _frozen(effects)

    @property
    def n_settings(self) -> int:
        return self.effects.shape[0]

    @property
    def bloch_vectors(self) -> np.ndarray | None:
        """Bloch vectors when every setting is a two-outcome projective measurement."""
        if self.effects.shape[1] != 2:
            return None
        obs = pauli_coefficients(self.effects[:, 0] - self.effects[:, 1])
        if np.max(np.abs(obs[:, 0])) > 1e-9 or np.max(np.abs(np.linalg.norm(obs[:, 1:], axis=1) - 1)) > 1e-9:
            return None
        return obs[:, 1:]

    def __len__(self) -> int:
        return self.n_settings


@dataclass(frozen=True)
class Assemblage:
    """Sub-normalised conditional states ``sigma[x, a]`` held by the trusted party."""

    members: np.ndarray
    tol: float = field(default=PSD_TOL, compare=False)

    def __post_init__(self):
        m = np.asarray(self.members, dtype=complex)
        if m.ndim != 4 or m.shape[2] != m.shape[3]:
            raise DomainError(f"assemblage must be shaped (x, a, d, d), got {m.shape}")
        if np.max(np.abs(m - np.conj(np.swapaxes(m, -1, -2)))) > 1e-10:
            raise DomainError("assemblage members must be Hermitian")
        if np.min(np.linalg.eigvalsh(m)) < -self.tol:
            raise DomainError("assemblage member is not positive semidefinite")
        reduced = m.sum(axis=1)
        if np.max(np.abs(reduced - reduced[0])) > NORM_TOL:
            raise DomainError("assemblage reduced states differ across settings")
        object.__setattr__(self, "members", _frozen(m))

    @property
    def n_x(self) -> int:
        return self.members.shape[0]

    @property
    def n_a(self) -> int:
        return self.members.shape[1]

    @property
    def reduced_state(self) -> np.ndarray:
        return self.members[0].sum(axis=0)

    @property
    def total_trace(self) -> float:
        """Common value of ``sum_a tr sigma[x, a]`` (1, or ``1 + t`` when rescaled)."""
        return float(np.trace(self.reduced_state).real)


def assemblage_from_state(state: DensityMatrix, alice) -> Assemblage:
    """``sigma[x, a] = tr_A[(A_{a|x} (x) I) rho]``."""
    if state.dim != 4:
        raise DomainError("assemblage needs a two-qubit (4x4) state")
    effects = alice.effects
    if effects.shape[-2:] != (2, 2):
        raise DomainError("Alice's effects must act on a qubit")
    rho = state.rho.reshape(2, 2, 2, 2)
    members = np.einsum("xaji,ibjc->xabc", effects, rho)
    return Assemblage(members)


@dataclass(frozen=True)
class JointDistribution:
    """Conditional outcome table ``p[x, y, a, b] = p(a, b | x, y)``."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 4:
            raise DomainError(f"joint distribution must be 4-dimensional, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise DomainError("joint distribution has non-finite entries")
        if p.size and p.min() < -HERMITIAN_TOL:
            raise DomainError(f"joint distribution has negative entry {p.min():.3e}")
        sums = p.sum(axis=(2, 3))
        bad = np.argwhere(np.abs(sums - 1.0) > NORM_TOL)
        if bad.size:
            x, y = bad[0]
            raise DomainError(f"p(.,.|x={x},y={y}) sums to {sums[x, y]!r}, expected 1")
        object.__setattr__(self, "p", _frozen(p))

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.p.shape

    n_x = property(lambda self: self.p.shape[0])
    n_y = property(lambda self: self.p.shape[1])
    n_a = property(lambda self: self.p.shape[2])
    n_b = property(lambda self: self.p.shape[3])


def joint_distribution(state: DensityMatrix, alice, bob) -> JointDistribution:
    """``p(a, b | x, y) = tr[(A_{a|x} (x) B_{b|y}) rho]``, evaluated on the full pair space."""
    if state.dim != 4:
        raise DomainError("joint distribution needs a two-qubit (4x4) state")
    a_eff, b_eff = alice.effects, bob.effects
    if a_eff.shape[-2:] != (2, 2) or b_eff.shape[-2:] != (2, 2):
        raise DomainError("measurement effects must act on a qubit")
    nx, na = a_eff.shape[:2]
    ny, nb = b_eff.shape[:2]
    p = np.empty((nx, ny, na, nb))
    for x in range(nx):
        for y in range(ny):
            for a in range(na):
                for b in range(nb):
                    op = np.kron(a_eff[x, a], b_eff[y, b])
                    p[x, y, a, b] = np.trace(op @ state.rho).real
    return JointDistribution(np.clip(p, 0.0, None))


def distribution_from_assemblage(sigma: np.ndarray, bob_effects: np.ndarray) -> np.ndarray:
    """Raw table ``tr[sigma[x, a] B[y, b]]`` (no normalisation check)."""
    return np.real(np.einsum("xaij,ybji->xyab", sigma, bob_effects))


@dataclass(frozen=True)
class CorrelationMatrix:
    """Two-point correlators ``M[j, k] = <A_j B_k>`` for +/-1 valued outcomes."""

    M: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.M, dtype=float)
        if m.ndim != 2:
            raise DomainError("correlation matrix must be two-dimensional")
        if m.size and np.max(np.abs(m)) > 1.0 + NORM_TOL:
            raise DomainError("correlators must lie in [-1, 1]")
        object.__setattr__(self, "M", _frozen(m))

    @property
    def shape(self) -> tuple[int, int]:
        return self.M.shape


def correlation_matrix(dist: JointDistribution) -> CorrelationMatrix:
    if dist.n_a != 2 or dist.n_b != 2:
        raise UnsupportedError("correlators need binary (+1/-1) outcomes on both sides")
    return CorrelationMatrix(np.einsum("xyab,a,b->xy", dist.p, OUTCOME_SIGNS, OUTCOME_SIGNS))


def signalling_magnitude(dist: JointDistribution) -> float:
    """Largest setting-dependence of either party's marginal outcome distribution."""
    p = dist.p
    alice = p.sum(axis=3)  # [x, y, a]
    bob = p.sum(axis=2)  # [x, y, b]
    alice_dev = np.max(alice.max(axis=1) - alice.min(axis=1)) if p.shape[1] > 1 else 0.0
    bob_dev = np.max(bob.max(axis=0) - bob.min(axis=0)) if p.shape[0] > 1 else 0.0
    return float(max(alice_dev, bob_dev, 0.0))


def matrix_to_pairs(matrix: np.ndarray) -> list:
    """Serialise a complex matrix as nested ``[re, im]`` pairs, row-major."""
    m = np.asarray(matrix, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_pairs(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise DomainError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]
