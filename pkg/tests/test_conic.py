import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steerlab.conic import (
    ConeDims,
    ConicProblem,
    StandardForm,
    Status,
    embed_hermitian,
    smat,
    solve,
    svec,
    verify_solution,
)
from steerlab.conic.cones import Cone
from steerlab.errors import DomainError

PAULI_Y = np.array([[0, -1j], [1j, 0]])


def interior_point(dims: ConeDims, rng) -> np.ndarray:
    parts = [rng.uniform(0.1, 2.0, dims.l)]
    for d in dims.q:
        v = rng.standard_normal(d - 1)
        parts.append(np.concatenate([[np.linalg.norm(v) + rng.uniform(0.1, 1.0)], v]))
    for n in dims.s:
        B = rng.standard_normal((n, n))
        parts.append(svec(B @ B.T + 0.1 * np.eye(n)))
    return np.concatenate(parts)


class TestCones:
    dims = ConeDims(l=3, q=[3, 4, 3], s=[2, 3])

    def test_svec_roundtrip_and_inner_product(self):
        rng = np.random.default_rng(0)
        A, B = (rng.standard_normal((4, 4)) for _ in range(2))
        A, B = A + A.T, B + B.T
        assert np.allclose(smat(svec(A), 4), A)
        assert svec(A) @ svec(B) == pytest.approx(np.trace(A @ B))

    def test_nesterov_todd_identities(self):
        rng = np.random.default_rng(1)
        cone = Cone(self.dims)
        for _ in range(20):
            s, z = interior_point(self.dims, rng), interior_point(self.dims, rng)
            W = cone.scaling(s, z)
            assert np.allclose(W.W(z), W.lam, atol=1e-10)
            assert np.allclose(W.Winvt(s), W.lam, atol=1e-10)
            v, u = rng.standard_normal(cone.size), rng.standard_normal(cone.size)
            assert np.allclose(W.Winv(W.W(v)), v, atol=1e-10)
            assert np.allclose(W.Winvt(W.Wt(v)), v, atol=1e-10)
            assert W.W(u) @ v == pytest.approx(u @ W.Wt(v), rel=1e-10, abs=1e-10)
            assert np.allclose(W.lam_divide(W.lam_product(v)), v, atol=1e-9)

    def test_margin_and_step(self):
        rng = np.random.default_rng(2)
        cone = Cone(self.dims)
        x = interior_point(self.dims, rng)
        assert cone.margin(x) > 0
        assert cone.margin(cone.identity()) == pytest.approx(1.0)
        d = rng.standard_normal(cone.size)
        a = cone.max_step(x, d)
        assert cone.margin(x + 0.999 * a * d) >= -1e-12
        assert cone.margin(x + 1.001 * a * d) < 0


class TestEmbedding:
    def test_identity(self):
        assert np.array_equal(embed_hermitian(np.eye(2)), np.eye(4))

    def test_pauli_y(self):
        expected = np.array([[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]])
        E = embed_hermitian(PAULI_Y)
        assert np.array_equal(E, expected)
        assert np.allclose(np.linalg.eigvalsh(E), [-1, -1, 1, 1])

    def test_spectrum_doubles(self):
        rng = np.random.default_rng(3)
        for n in (2, 3):
            H = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            H = H + H.conj().T
            ev = np.linalg.eigvalsh(H)
            assert np.allclose(np.linalg.eigvalsh(embed_hermitian(H)), np.sort(np.repeat(ev, 2)))

    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError):
            embed_hermitian(np.array([[0, 1], [0, 0]]))


class TestSolveExamples:
    def test_scalar_lp(self):
        prob = ConicProblem()
        x = prob.add_variable("x", "nonneg")
        prob.add_inequality({x: [[-1.0]]}, [-3.0])
        prob.set_objective({x: [1.0]})
        sol = solve(prob)
        assert sol.status is Status.OPTIMAL and sol.value == pytest.approx(3.0, abs=1e-7)
        assert verify_solution(prob, sol).ok

    def test_psd_box(self):
        prob = ConicProblem()
        X = prob.add_variable("X", "psd", order=2)
        prob.add_inequality({X: -np.eye(3)}, -svec(np.eye(2)), cone=("s", 2))
        prob.set_objective({X: svec(np.eye(2))})
        sol = solve(prob)
        assert sol.status is Status.OPTIMAL and sol.value == pytest.approx(2.0, abs=1e-7)
        assert verify_solution(prob, sol).ok

    def test_unbounded(self):
        prob = ConicProblem()
        x = prob.add_variable("x", "nonneg")
        prob.set_objective({x: [1.0]})
        sol = solve(prob)
        assert sol.status is Status.UNBOUNDED
        report = verify_solution(prob, sol)
        assert report.ok and report.metrics["ray_eq_residual"] <= 1e-8

    def test_infeasible(self):
        prob = ConicProblem()
        x = prob.add_variable("x", "nonneg")
        prob.add_inequality({x: [[-1.0]]}, [1.0])  # -x >= 1
        prob.set_objective({x: [1.0]})
        sol = solve(prob)
        assert sol.status is Status.INFEASIBLE
        assert verify_solution(prob, sol).ok

    def test_inconsistent_equalities(self):
        prob = ConicProblem()
        x = prob.add_variable("x", "free", 2)
        prob.add_equality({x: [[1.0, 1.0], [2.0, 2.0]]}, [1.0, 3.0])
        prob.set_objective({x: [1.0, 0.0]})
        sol = solve(prob)
        assert sol.status is Status.INFEASIBLE
        assert verify_solution(prob, sol).ok

    def test_hermitian_fast_path_matches_embedding(self):
        # maximise <C, X> over 2x2 Hermitian X with 0 <= X <= I
        C = np.array([[1.0, 0.3 - 0.4j], [0.3 + 0.4j, -0.2]])
        basis = np.array([np.eye(2), [[0, 1], [1, 0]], PAULI_Y, np.diag([1, -1])], dtype=complex)
        values = []
        for fast in (True, False):
            prob = ConicProblem()
            r = prob.add_variable("r", "free", 4)
            prob.add_hermitian_psd({r: basis}, fast_path=fast)
            prob.add_hermitian_psd({r: -basis}, constant=np.eye(2), fast_path=fast, name="upper")
            prob.set_objective({r: [np.trace(C @ b).real for b in basis]})
            sol = solve(prob)
            assert verify_solution(prob, sol).ok
            values.append(sol.value)
        assert values[0] == pytest.approx(values[1], abs=1e-7)
        assert values[0] == pytest.approx(np.clip(np.linalg.eigvalsh(C), 0, None).sum(), abs=1e-7)

    def test_second_order_cone(self):
        # maximise x1 + x2 subject to ||(x1, x2)|| <= 1
        prob = ConicProblem()
        x = prob.add_variable("x", "free", 2)
        prob.add_inequality({x: [[0, 0], [1, 0], [0, 1]]}, [-1.0, 0.0, 0.0], cone=("q", 3))
        prob.set_objective({x: [1.0, 1.0]})
        sol = solve(prob)
        assert sol.value == pytest.approx(np.sqrt(2), abs=1e-7)
        assert np.allclose(sol[x], [np.sqrt(0.5)] * 2, atol=1e-6)


def enumerate_lp(c, G, h):
    """Best vertex of ``max c'x s.t. Gx <= h`` by brute force."""
    n = c.size
    best = -np.inf
    for rows in itertools.combinations(range(G.shape[0]), n):
        sub = G[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        v = np.linalg.solve(sub, h[list(rows)])
        if np.all(G @ v <= h + 1e-9):
            best = max(best, c @ v)
    return best


def random_lp(rng, n=3, m=6):
    G = rng.standard_normal((m, n))
    x0 = rng.standard_normal(n)
    h = G @ x0 + rng.uniform(0.1, 1.0, m)
    # box keeps the problem bounded
    G = np.vstack([G, np.eye(n), -np.eye(n)])
    h = np.concatenate([h, np.full(2 * n, 5.0)])
    return rng.standard_normal(n), G, h


class TestLinearPrograms:
    def test_matches_vertex_enumeration(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            c, G, h = random_lp(rng)
            prob = ConicProblem()
            x = prob.add_variable("x", "free", c.size)
            prob.add_inequality({x: -G}, -h)
            prob.set_objective({x: c})
            sol = solve(prob)
            assert sol.status is Status.OPTIMAL
            assert sol.value == pytest.approx(enumerate_lp(c, G, h), abs=1e-6)
            report = verify_solution(prob, sol)
            assert report.ok, report
            assert report.metrics["weak_duality"] <= 1e-7

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_scale_invariance(self, seed):
        rng = np.random.default_rng(seed)
        c, G, h = random_lp(rng)
        form = StandardForm(c, np.zeros((0, 3)), np.zeros(0), G, h, ConeDims(l=G.shape[0]))
        scaled = StandardForm(10 * c, form.A, form.b, G, h, form.dims)
        a, b = solve(form), solve(scaled)
        assert a.status is b.status is Status.OPTIMAL
        assert b.value == pytest.approx(10 * a.value, abs=1e-6 * max(1.0, abs(10 * a.value)))

    def test_equality_constrained(self):
        # max x0 + 2 x1 + 3 x2 s.t. x0 + x1 + x2 = 1, x >= 0  -> 3
        prob = ConicProblem()
        x = prob.add_variable("x", "nonneg", 3)
        prob.add_equality({x: [[1, 1, 1]]}, [1.0], name="simplex")
        prob.set_objective({x: [1.0, 2.0, 3.0]})
        sol = solve(prob)
        assert sol.value == pytest.approx(3.0, abs=1e-7)
        assert sol.dual["simplex"] == pytest.approx([3.0], abs=1e-6)
        assert verify_solution(prob, sol).ok


class TestVerification:
    def _solved(self):
        prob = ConicProblem()
        x = prob.add_variable("x", "nonneg", 2)
        prob.add_inequality({x: [[-1.0, -1.0]]}, [-1.0])
        prob.set_objective({x: [1.0, 2.0]})
        return prob, solve(prob)

    def test_clean_optimum(self):
        prob, sol = self._solved()
        assert verify_solution(prob, sol).ok

    def test_perturbed_primal_is_flagged(self):
        prob, sol = self._solved()
        sol.x = sol.x.copy()
        sol.x[1] += 1e-3
        report = verify_solution(prob, sol)
        assert not report.ok
        assert set(report.flags) & {"primal_cone_violation", "duality_gap", "value_mismatch"}

    def test_perturbed_dual_is_flagged(self):
        prob, sol = self._solved()
        sol.z = sol.z.copy()
        sol.z[0] += 1e-3
        assert "dual_residual" in verify_solution(prob, sol).flags

    def test_bad_ray_is_flagged(self):
        prob = ConicProblem()
        x = prob.add_variable("x", "nonneg")
        prob.set_objective({x: [1.0]})
        sol = solve(prob)
        sol.ray = -sol.ray
        assert not verify_solution(prob, sol).ok


class TestTextDump:
    def test_roundtrip(self):
        prob = ConicProblem()
        x = prob.add_variable("x", "nonneg", 2)
        r = prob.add_variable("r", "free", 4)
        prob.add_equality({x: [[1, 1]]}, [1.0])
        prob.add_hermitian_psd({r: np.array([np.eye(2), [[0, 1], [1, 0]], PAULI_Y, np.diag([1, -1])])}, fast_path=False)
        prob.set_objective({x: [1.0, 0.5], r: [0.1, 0, 0, 0]}, offset=0.25)
        form = prob.compile()
        back = StandardForm.from_text(form.to_text())
        for name in ("c", "A", "b", "G", "h"):
            assert np.array_equal(getattr(form, name), getattr(back, name))
        assert back.dims == form.dims and back.offset == form.offset
        assert "cone s 4" in prob.to_text()

    def test_unknown_record(self):
        with pytest.raises(DomainError):
            StandardForm.from_text("size 1 0 0\nQ 0 1\n")


class TestProblemValidation:
    def test_errors(self):
        prob = ConicProblem()
        x = prob.add_variable("x", "free", 2)
        with pytest.raises(DomainError):
            prob.add_variable("x")
        with pytest.raises(DomainError):
            prob.add_variable("y", "cone")
        with pytest.raises(DomainError):
            prob.add_inequality({x: [[1.0, 0.0]]}, [0.0], cone=("q", 3))
        with pytest.raises(DomainError):
            prob.add_equality({x: [[1.0]]}, [0.0])
        with pytest.raises(DomainError):
            ConicProblem().add_inequality({x: [[1.0, 0.0]]}, [0.0])
