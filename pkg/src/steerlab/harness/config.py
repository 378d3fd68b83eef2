"""Campaign configuration."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..sampling import DEFAULT_LATTICE_SIZE, DEFAULT_SHOTS, SAMPLER_MODES

MODES = ("sweep-mu", "histogram", "violation-bars", "analyze-files")
MODE_ALIASES = {"sweep": "sweep-mu", "bars": "violation-bars", "analyze": "analyze-files"}
SAMPLER_ALIASES = {"haar": "haar-rotation", "fibonacci": "fibonacci-lattice"}
DEFAULT_TRIALS = {"sweep-mu": 50, "histogram": 10_000, "violation-bars": 2_000, "analyze-files": 1}
SEED_ENV = "STEERLAB_SEED"

# the experimental stand-in: a Werner state of singlet fidelity 0.93 measured with finite statistics
EXPERIMENT_PRESET = {"mu": [0.907], "shots": DEFAULT_SHOTS, "n_settings": [3], "bob": "pauli"}


@dataclass
class CampaignConfig:
    """Everything that determines a campaign's output.

    ``sampler`` is ``haar-rotation``, ``fibonacci-lattice`` or ``aligned``
    (both parties measure the Pauli axes, no randomness).  ``bob`` is
    ``pauli`` (Bob always measures the Pauli axes, the default) or ``random``
    (Bob draws a triad of his own every trial).
    """

    mode: str = "histogram"
    mu: list = field(default_factory=lambda: [1.0])
    n_settings: list = field(default_factory=lambda: [3])
    trials: int | None = None
    shots: int | None = None
    sampler: str = "haar-rotation"
    lattice_size: int = DEFAULT_LATTICE_SIZE
    bob: str = "pauli"
    seed: int = 0
    pair_combinations: bool = False
    exclude_orthogonal_plane_pairs: bool = True
    allow_signalling: bool = False
    output_dir: str = "steerlab-out"
    workers: int = 1

    def __post_init__(self):
        self.mode = MODE_ALIASES.get(self.mode, self.mode)
        self.sampler = SAMPLER_ALIASES.get(self.sampler, self.sampler)
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.sampler not in SAMPLER_MODES + ("aligned",):
            raise DomainError(f"unknown sampler {self.sampler!r}")
        if self.bob not in ("pauli", "random"):
            raise DomainError("bob must be 'pauli' or 'random'")
        self.mu = [float(m) for m in np.atleast_1d(self.mu)]
        if not self.mu or any(not 0.0 <= m <= 1.0 for m in self.mu):
            raise DomainError("every mu must lie in [0, 1]")
        self.n_settings = sorted({int(n) for n in np.atleast_1d(self.n_settings)}, reverse=True)
        if any(n not in (2, 3) for n in self.n_settings):
            raise DomainError("settings count must be 2 or 3")
        if self.trials is None:
            self.trials = DEFAULT_TRIALS[self.mode]
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError("trials must be a positive integer")
        self.trials = int(self.trials)
        if self.shots is not None and (int(self.shots) != self.shots or self.shots < 1):
            raise DomainError("shots must be a positive integer")
        if isinstance(self.seed, bool) or not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        self.seed = int(self.seed)
        if self.workers < 1:
            raise DomainError("workers must be at least 1")

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise DomainError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def parse_mu_grid(text: str) -> list[float]:
    """``0.5``, ``0.1,0.2,0.3`` or ``start:stop:step`` (stop inclusive)."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise DomainError("grid step must be positive")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise DomainError(f"cannot parse mu grid {text!r}") from exc


def resolve_seed(config_seed: int, cli_seed: int | None) -> int:
    """Explicit CLI seed, else ``STEERLAB_SEED``, else the configured seed."""
    if cli_seed is not None:
        return int(cli_seed)
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env.strip())
        except ValueError as exc:
            raise DomainError(f"{SEED_ENV} must be an unsigned integer, got {env!r}") from exc
    return config_seed
