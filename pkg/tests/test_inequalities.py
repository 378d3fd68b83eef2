import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steerlab.errors import DomainError, ResourceLimitError
from steerlab.inequalities import all_reports, chsh_like_steering, dbs, dbs_bound, linear_steering, ris
from steerlab.quantum import MeasurementSet, correlation_matrix, joint_distribution, werner_state
from steerlab.sampling import TriadSampler, sample_triad, trial_rng

PAULI = MeasurementSet.pauli()


def aligned_M(mu, axes=(0, 1, 2)):
    ms = MeasurementSet.pauli(axes)
    return correlation_matrix(joint_distribution(werner_state(mu), ms, ms))


def rotation(seed):
    return sample_triad(TriadSampler(), trial_rng(seed, 0)).axes


class TestLinearSteering:
    def test_singlet_aligned(self):
        r = linear_steering(aligned_M(1.0), PAULI)
        assert r.value == pytest.approx(3.0)
        assert r.bound == pytest.approx(np.sqrt(3), abs=1e-9)
        assert r.violated and r.name == "LS" and r.m == 3

    def test_below_threshold(self):
        mu = 1 / np.sqrt(3) - 0.01
        r = linear_steering(aligned_M(mu), PAULI)
        assert r.value == pytest.approx(3 * mu) and not r.violated

    @pytest.mark.parametrize("seed", range(5))
    def test_orthogonal_bob_bound(self, seed):
        bob = MeasurementSet.from_bloch(rotation(seed))
        assert linear_steering(np.zeros((3, 3)), bob).bound == pytest.approx(np.sqrt(3), abs=1e-9)
        bob2 = MeasurementSet.from_bloch(rotation(seed)[:2])
        assert linear_steering(np.zeros((2, 2)), bob2).bound == pytest.approx(np.sqrt(2), abs=1e-9)

    def test_parallel_bob_bound(self):
        bob = MeasurementSet.from_bloch([[0, 0, 1], [0, 0, 1]])
        assert linear_steering(np.zeros((2, 2)), bob).bound == pytest.approx(2.0)

    def test_too_many_settings(self):
        bob = MeasurementSet.from_bloch(np.tile([0, 0, 1.0], (21, 1)))
        with pytest.raises(ResourceLimitError):
            linear_steering(np.zeros((21, 21)), bob)


class TestChsh:
    def test_singlet_zx(self):
        ms = MeasurementSet.from_bloch([[0, 0, 1], [1, 0, 0]])
        M = correlation_matrix(joint_distribution(werner_state(1.0), ms, ms))
        r = chsh_like_steering(M)
        assert r.f_plus == pytest.approx(2.0) and r.f_minus == pytest.approx(2.0)
        assert r.value == pytest.approx(2 * np.sqrt(2)) and r.bound == 2 and r.violated

    def test_mixed(self):
        r = chsh_like_steering(np.zeros((2, 2)))
        assert r.value == 0 and not r.violated

    def test_boundary(self):
        r = chsh_like_steering(aligned_M(1 / np.sqrt(2), (0, 1)))
        assert r.value == pytest.approx(2.0, abs=1e-9)

    def test_shape(self):
        with pytest.raises(DomainError):
            chsh_like_steering(np.zeros((3, 3)))


class TestDbs:
    def test_bound(self):
        assert dbs_bound(3, 2) == pytest.approx(1 / 108, rel=1e-12)
        assert dbs_bound(2, 2) == pytest.approx(1 / (8 * np.sqrt(2)), rel=1e-12)

    def test_values(self):
        r = dbs(aligned_M(1.0))
        assert r.value == pytest.approx(1.0) and r.violated and r.d_A == 2
        assert not dbs(np.zeros((3, 3))).violated

    def test_errors(self):
        with pytest.raises(DomainError):
            dbs(np.zeros((2, 3)))
        with pytest.raises(DomainError):
            dbs(np.zeros((2, 2)), d_A=1)


class TestRis:
    def test_values(self):
        r = ris(aligned_M(1.0))
        assert r.value == pytest.approx(3.0) and r.bound == pytest.approx(np.sqrt(3)) and r.violated
        assert not ris(np.zeros((3, 3))).violated

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_rotation_invariance_separates_ris_from_ls(self, seed):
        rng = np.random.default_rng(seed)
        M = rng.uniform(-1, 1, (3, 3))
        R = rotation(seed)
        assert ris(R @ M).value == pytest.approx(ris(M).value, abs=1e-10)

    def test_ls_is_not_rotation_invariant(self):
        M = aligned_M(1.0).M
        R = rotation(3)
        assert abs(linear_steering(R @ M, PAULI).value - linear_steering(M, PAULI).value) > 1e-3


class TestScaling:
    @pytest.mark.parametrize("mu", [0.0, 0.5, 1.0])
    def test_werner_scaling(self, mu):
        M3, M1 = aligned_M(mu), aligned_M(1.0)
        assert linear_steering(M3, PAULI).value == pytest.approx(mu * linear_steering(M1, PAULI).value, abs=1e-12)
        assert ris(M3).value == pytest.approx(mu * ris(M1).value, abs=1e-12)
        assert dbs(M3).value == pytest.approx(mu**3 * dbs(M1).value, abs=1e-12)
        M2 = aligned_M(mu, (0, 1))
        assert chsh_like_steering(M2).value == pytest.approx(mu * 2 * np.sqrt(2), abs=1e-12)

    def test_all_or_nothing(self):
        assert all(r.violated for r in all_reports(aligned_M(1.0, (0, 1)), MeasurementSet.pauli((0, 1))))
        assert not any(r.violated for r in all_reports(aligned_M(0.0), PAULI))
        assert [r.name for r in all_reports(aligned_M(1.0), PAULI)] == ["LS", "DBS", "RIS"]

    def test_report_dict(self):
        d = linear_steering(aligned_M(1.0), PAULI).as_dict()
        assert d["name"] == "LS" and d["violated"] is True
