"""Random measurement triads, per-trial RNG streams and finite-shot sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .quantum import JointDistribution, MeasurementSet

GOLDEN_RATIO = (1.0 + np.sqrt(5.0)) / 2.0
SAMPLER_MODES = ("haar-rotation", "fibonacci-lattice")
DEFAULT_LATTICE_SIZE = 600
DEFAULT_SHOTS = 1000
TRIAD_TOL = 1e-10

# omitted-axis order used when choosing two of three axes (z, then y, then x)
OMISSION_ORDER = (2, 1, 0)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial; independent of execution order."""
    if seed < 0 or trial < 0:
        raise DomainError("seed and trial index must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(trial),))))


def fibonacci_points(K: int) -> np.ndarray:
    """Golden-angle spiral of ``K`` unit vectors, shape (K, 3)."""
    if int(K) != K or K < 3:
        raise DomainError("the Fibonacci lattice needs at least 3 points")
    i = np.arange(K)
    z = 1.0 - 2.0 * (i + 0.5) / K
    phi = 2.0 * np.pi * i / GOLDEN_RATIO
    r = np.sqrt(1.0 - z * z)
    pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


@dataclass(frozen=True)
class TriadSampler:
    mode: str = "haar-rotation"
    lattice_size: int = DEFAULT_LATTICE_SIZE
    seed: int = 0

    def __post_init__(self):
        if self.mode not in SAMPLER_MODES:
            raise DomainError(f"unknown sampler mode {self.mode!r}; expected one of {SAMPLER_MODES}")
        if self.mode == "fibonacci-lattice" and self.lattice_size < 3:
            raise DomainError("lattice_size must be at least 3")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class OrthogonalTriad:
    """Three orthonormal, right-handed Bloch axes stored as rows."""

    axes: np.ndarray

    def __post_init__(self):
        axes = np.array(self.axes, dtype=float)
        if axes.shape != (3, 3):
            raise DomainError("a triad needs three 3-vectors")
        if np.max(np.abs(axes @ axes.T - np.eye(3))) > TRIAD_TOL:
            raise DomainError("triad axes are not orthonormal")
        if abs(np.linalg.det(axes) - 1.0) > 1e-9:
            raise DomainError("triad is not right-handed")
        axes.setflags(write=False)
        object.__setattr__(self, "axes", axes)

    def measurements(self, keep=(0, 1, 2)) -> MeasurementSet:
        return MeasurementSet.from_bloch(self.axes[list(keep)])


def _quaternion_rotation(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _orthonormalise(axes: np.ndarray) -> np.ndarray:
    # polish rounding so the triad invariants hold to machine precision
    u, _, vt = np.linalg.svd(axes)
    return u @ vt


def sample_triad(sampler: TriadSampler, rng: np.random.Generator) -> OrthogonalTriad:
    if sampler.mode == "haar-rotation":
        # a normalised Gaussian 4-vector is a uniform unit quaternion
        R = _quaternion_rotation(rng.standard_normal(4))
        return OrthogonalTriad(_orthonormalise(R.T))
    n = fibonacci_points(sampler.lattice_size)[rng.integers(sampler.lattice_size)]
    helper = np.eye(3)[np.argmin(np.abs(n))]
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    second = np.cos(theta) * u + np.sin(theta) * v
    return OrthogonalTriad(_orthonormalise(np.stack([n, second, np.cross(n, second)])))


@dataclass(frozen=True)
class PairSelection:
    """Two of three axes per side, identified by the omitted axis index."""

    alice_omit: int
    bob_omit: int
    alice_axes: np.ndarray
    bob_axes: np.ndarray

    @property
    def label(self) -> str:
        return f"A-{'xyz'[self.alice_omit]}/B-{'xyz'[self.bob_omit]}"


def kept_axes(omit: int) -> tuple[int, int]:
    return tuple(i for i in range(3) if i != omit)


def pair_combinations(alice: OrthogonalTriad, bob: OrthogonalTriad) -> list[PairSelection]:
    """All nine (Alice pair, Bob pair) choices, ordered by omitted axis z, y, x."""
    return [
        PairSelection(ao, bo, alice.axes[list(kept_axes(ao))], bob.axes[list(kept_axes(bo))])
        for ao in OMISSION_ORDER
        for bo in OMISSION_ORDER
    ]


def sample_counts(ideal: JointDistribution, shots: int, rng: np.random.Generator) -> JointDistribution:
    """Empirical frequencies of one multinomial draw of ``shots`` per setting pair."""
    if int(shots) != shots or shots < 1:
        raise DomainError("shots per setting pair must be a positive integer")
    nx, ny, na, nb = ideal.shape
    p = np.clip(ideal.p.reshape(nx, ny, na * nb), 0.0, None)
    p = p / p.sum(axis=2, keepdims=True)
    counts = rng.multinomial(int(shots), p)
    return JointDistribution((counts / shots).reshape(nx, ny, na, nb))
