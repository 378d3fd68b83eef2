"""Monte-Carlo campaigns: per-trial pipeline, worker pool and persistence."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..conic import Status
from ..errors import SteerlabError, UnsupportedError, ValidationError
from ..inequalities import all_reports
from ..quantum import (
    Assemblage,
    MeasurementSet,
    assemblage_from_state,
    correlation_matrix,
    joint_distribution,
    signalling_magnitude,
    werner_state,
)
from ..sampling import OrthogonalTriad, TriadSampler, pair_combinations, sample_counts, sample_triad, trial_rng
from ..sdp import adapted_steering_robustness, nonsignalling_projection, steering_robustness
from .config import CampaignConfig
from .io import load_distribution, load_measurements

NS_TOL = 1e-8
CRITERIA = ("LS", "CHSH-LS", "DBS", "RIS")
RECORDS_FILE = "records.jsonl"
CONFIG_FILE = "config.json"
PAULI_TRIAD = OrthogonalTriad(np.eye(3))


class SignallingError(SteerlabError):
    """ASR was requested on signalling data without explicit permission."""


@dataclass
class ResultSet:
    config: CampaignConfig
    records: list

    def save(self, out: Path) -> None:
        out.mkdir(parents=True, exist_ok=True)
        (out / CONFIG_FILE).write_text(json.dumps(self.config.to_dict(), indent=2, sort_keys=True) + "\n")
        with open(out / RECORDS_FILE, "w") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    @classmethod
    def load(cls, directory) -> "ResultSet":
        directory = Path(directory)
        config = CampaignConfig.from_dict(json.loads((directory / CONFIG_FILE).read_text()))
        with open(directory / RECORDS_FILE) as fh:
            records = [json.loads(line) for line in fh if line.strip()]
        return cls(config, records)


def _is_pauli(bob) -> bool:
    vecs = getattr(bob, "bloch_vectors", None)
    return vecs is not None and np.shape(vecs) == (3, 3) and np.allclose(vecs, np.eye(3), atol=1e-12)


def analyse(dist, bob, alice=None, state=None, nsa: bool = True, allow_signalling: bool = False) -> dict:
    """The certification pipeline on one distribution.

    With ``nsa`` the data are projected first and every later step uses the
    projected distribution; without it the data must already be
    non-signalling.  ``allow_signalling`` additionally runs ASR on the raw
    data and reports its (typically unbounded) status.
    """
    rec = {"signalling": signalling_magnitude(dist), "t": None, "raw_asr_status": None, "raw_asr_value": None}
    if allow_signalling:
        raw = adapted_steering_robustness(dist, bob)
        rec["raw_asr_status"] = raw.status.value
        rec["raw_asr_value"] = raw.value if raw.status is Status.OPTIMAL else None
    assemblage = None
    if nsa:
        ns = nonsignalling_projection(dist, bob)
        rec["t"] = ns.t
        dist = ns.ns_dist
        assemblage = Assemblage(ns.sigma_tilde.members / (1.0 + ns.t), tol=1e-7)
    elif state is not None and alice is not None:
        assemblage = assemblage_from_state(state, alice)
    if signalling_magnitude(dist) > NS_TOL:
        raise SignallingError(f"distribution signals by {signalling_magnitude(dist):.3g}; run the projection first")
    asr = adapted_steering_robustness(dist, bob)
    rec["asr_status"] = asr.status.value
    rec["asr_value"] = asr.value if asr.status is Status.OPTIMAL else None
    rec["sr_value"] = None
    if _is_pauli(bob) and assemblage is not None:
        rec["sr_value"] = steering_robustness(assemblage).value
    try:
        reports = {r.name: r for r in all_reports(correlation_matrix(dist), bob)}
    except UnsupportedError:
        reports = {}
    for name in CRITERIA:
        r = reports.get(name)
        rec[f"{name}_value"] = r.value if r else None
        rec[f"{name}_bound"] = r.bound if r else None
        rec[f"{name}_violated"] = r.violated if r else None
    return rec


def _evaluate(config: CampaignConfig, state, mu, trial, a_axes, b_axes, pair, rng, excluded=False) -> dict:
    start = time.perf_counter()
    alice = MeasurementSet.from_bloch(a_axes)
    bob = MeasurementSet.from_bloch(b_axes)
    exact = joint_distribution(state, alice, bob)
    data = exact if config.shots is None else sample_counts(exact, config.shots, rng)
    rec = {
        "trial_index": trial,
        "mu": mu,
        "n_settings": len(a_axes),
        "pair": pair,
        "excluded": excluded,
        "alice_axes": np.asarray(a_axes).tolist(),
        "bob_axes": np.asarray(b_axes).tolist(),
    }
    rec.update(
        analyse(data, bob, alice, state, nsa=config.shots is not None, allow_signalling=config.allow_signalling and config.shots is not None)
    )
    rec["wall_time_ms"] = (time.perf_counter() - start) * 1e3
    return rec


def run_trial(config: CampaignConfig, mu: float, trial: int) -> list[dict]:
    """All records of one trial; depends only on ``(config, mu, trial)``."""
    rng = trial_rng(config.seed, trial)
    if config.sampler == "aligned":
        alice_t = bob_t = PAULI_TRIAD
    else:
        sampler = TriadSampler(config.sampler, config.lattice_size, config.seed)
        alice_t = sample_triad(sampler, rng)
        bob_t = sample_triad(sampler, rng) if config.bob == "random" else PAULI_TRIAD
    state = werner_state(mu)
    records = []
    for n in config.n_settings:
        if n == 3:
            records.append(_evaluate(config, state, mu, trial, alice_t.axes, bob_t.axes, "", rng))
            continue
        use_pairs = config.pair_combinations or config.mode == "violation-bars"
        for pc in pair_combinations(alice_t, bob_t):
            # the A1A2/XY pairing stays in the records but is left out of the statistics
            excluded = use_pairs and config.exclude_orthogonal_plane_pairs and (pc.alice_omit, pc.bob_omit) == (2, 2)
            records.append(_evaluate(config, state, mu, trial, pc.alice_axes, pc.bob_axes, pc.label, rng, excluded))
            if not use_pairs:
                break
    return records


def _work(item):
    config, mu, trial = item
    return run_trial(config, mu, trial)


def check_output_dir(path) -> Path:
    """Create ``path`` and prove it is writable before any computation starts."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc.strerror}") from exc
    return out


def run_campaign(config: CampaignConfig, save: bool = True) -> ResultSet:
    """Run every (mu, trial) work item, in order, optionally on a process pool."""
    if config.mode == "analyze-files":
        raise UnsupportedError("use analyze_files for file input")
    out = check_output_dir(config.output_dir) if save else None
    items = [(config, mu, trial) for mu in config.mu for trial in range(config.trials)]
    if config.workers == 1:
        chunks = map(_work, items)
        records = [rec for chunk in chunks for rec in chunk]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunksize = max(1, len(items) // (4 * config.workers))
            records = [rec for chunk in pool.map(_work, items, chunksize=chunksize) for rec in chunk]
    result = ResultSet(config, records)
    if save:
        result.save(out)
    return result


def analyze_files(dist_path, bob_path, allow_signalling: bool = False) -> dict:
    """Signalling check, projection, ASR and inequalities for file input."""
    start = time.perf_counter()
    dist = load_distribution(dist_path)
    bob = load_measurements(bob_path)
    if dist.n_y != bob.n_settings or dist.n_b != np.asarray(bob.effects).shape[1]:
        raise ValidationError(f"distribution has (n_y, n_b) = {(dist.n_y, dist.n_b)} but the measurement file describes {np.asarray(bob.effects).shape[:2]}")
    rec = {"trial_index": 0, "mu": None, "n_settings": dist.n_x, "pair": "", "excluded": False, "alice_axes": None}
    vecs = getattr(bob, "bloch_vectors", None)
    rec["bob_axes"] = None if vecs is None else np.asarray(vecs).tolist()
    rec.update(analyse(dist, bob, nsa=True, allow_signalling=allow_signalling))
    rec["wall_time_ms"] = (time.perf_counter() - start) * 1e3
    return rec
