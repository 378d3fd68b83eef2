"""Homogeneous self-dual primal-dual interior-point method.

Solves the minimisation pair

    minimize    c'x                    maximize   -h'z - b'y
    subject to  Gx + s = h, Ax = b     subject to G'z + A'y + c = 0
                s in K                             z in K

through the homogeneous embedding with variables ``(x, y, z, s, tau, kappa)``.
Search directions use Nesterov-Todd scaling and a Mehrotra predictor-corrector
step.  Either an optimal pair is returned (``tau > 0``) or a Farkas-type
certificate of primal or dual infeasibility (``kappa > 0``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .cones import Cone, ConeDims

FEASTOL = 1e-9
ABSTOL = 1e-8
RELTOL = 1e-7
MAX_ITERS = 500
STEP = 0.99
UNBOUNDED_OBJECTIVE = 1e6


@dataclass
class IpmResult:
    status: str  # optimal, primal-infeasible, dual-infeasible, objective-limit, max-iterations, singular
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    s: np.ndarray
    iterations: int
    pres: float
    dres: float
    gap: float


class _KKT:
    """Factorised reduced system for one scaling ``W``.

    Without equality constraints the system is solved through a QR
    factorisation of ``W^{-T} G``, which avoids squaring its condition number.
    """

    def __init__(self, G, A, W):
        self.A, self.W = A, W
        n, p = G.shape[1], A.shape[0]
        self.Gh = W.Winvt(G) if G.shape[0] else G
        self.n = n
        if p == 0:
            self.Q, self.R = np.linalg.qr(self.Gh)
            if n and np.min(np.abs(np.diag(self.R))) <= 1e-14 * max(1.0, np.max(np.abs(self.R))):
                raise np.linalg.LinAlgError("singular reduced system")
            self.lu = None
            return
        K = np.zeros((n + p, n + p))
        K[:n, :n] = self.Gh.T @ self.Gh
        K[:n, n:] = A.T
        K[n:, :n] = A
        self.K = K
        self.lu = sla.lu_factor(K, check_finite=True)

    def solve(self, ux, uy, uz, G=None, refine=1):
        """Solve ``A'y + G'z = ux``, ``Ax = uy``, ``Gx - W'W z = uz``.

        With ``G`` given, ``refine`` rounds of iterative refinement are applied
        to the unreduced equations.
        """
        x, y, z = self._solve(ux, uy, uz)
        if G is None or not uz.size:
            return x, y, z
        for _ in range(refine):
            ex = ux - self.A.T @ y - G.T @ z
            ey = uy - self.A @ x
            ez = uz - G @ x + self.W.Wt(self.W.W(z))
            cx, cy, cz = self._solve(ex, ey, ez)
            x, y, z = x + cx, y + cy, z + cz
        return x, y, z

    def _solve(self, ux, uy, uz):
        wuz = self.W.Winvt(uz) if uz.size else uz
        if self.lu is None:
            # R'R x = ux + R'Q' wuz
            x = sla.solve_triangular(self.R, sla.solve_triangular(self.R, ux, trans="T") + self.Q.T @ wuz)
            y = np.zeros(0)
        else:
            rhs = np.concatenate([ux + self.Gh.T @ wuz, uy])
            sol = sla.lu_solve(self.lu, rhs)
            # one step of iterative refinement
            sol += sla.lu_solve(self.lu, rhs - self.K @ sol)
            x, y = sol[: self.n], sol[self.n :]
        z = self.W.Winv(self.Gh @ x - wuz) if uz.size else uz
        return x, y, z


class _Identity:
    def W(self, v):
        return v

    Wt = Winv = Winvt = W


def _max_step(cone, s, ds, z, dz, tau, dtau, kappa, dkappa):
    steps = [cone.max_step(s, ds), cone.max_step(z, dz)]
    if dtau < 0:
        steps.append(-tau / dtau)
    if dkappa < 0:
        steps.append(-kappa / dkappa)
    return min(steps)


def conelp(c, G, h, dims: ConeDims, A, b, objective_limit: float | None = UNBOUNDED_OBJECTIVE, trace=None) -> IpmResult:
    """Run the method; ``trace`` (if given) is called with per-iteration statistics."""
    c, G, h, A, b = (np.asarray(v, dtype=float) for v in (c, G, h, A, b))
    n, m, p = c.size, h.size, b.size
    cone = Cone(dims)
    e = cone.identity()
    degree = dims.degree

    resx0 = max(1.0, np.linalg.norm(c))
    resy0 = max(1.0, np.linalg.norm(b))
    resz0 = max(1.0, np.linalg.norm(h))

    # starting point from two least-squares problems with W = I
    try:
        kkt = _KKT(G, A, _Identity())
    except (np.linalg.LinAlgError, ValueError):
        return IpmResult("singular", np.zeros(n), np.zeros(p), e.copy(), e.copy(), 0, np.inf, np.inf, np.inf)
    x, y, zp = kkt.solve(np.zeros(n), b, h)
    s = -zp
    _, y, z = kkt.solve(-c, np.zeros(p), np.zeros(m))
    if m:
        ms = cone.margin(s)
        if ms <= 0:
            s = s + (1.0 - ms) * e
        mz = cone.margin(z)
        if mz <= 0:
            z = z + (1.0 - mz) * e
    tau, kappa = 1.0, 1.0

    best = None
    for it in range(MAX_ITERS + 1):
        rx = A.T @ y + G.T @ z + c * tau
        ry = A @ x - b * tau
        rz = G @ x + s - h * tau
        cx, by, hz = c @ x, b @ y, h @ z
        rt = cx + by + hz + kappa

        mu = (s @ z + tau * kappa) / (degree + 1)
        pcost = cx / tau
        dcost = -(by + hz) / tau
        gap = (s @ z) / tau**2
        pres = max(np.linalg.norm(ry) / resy0, np.linalg.norm(rz) / resz0) / tau
        dres = np.linalg.norm(rx) / resx0 / tau
        if pcost < 0:
            relgap = gap / -pcost
        elif dcost > 0:
            relgap = gap / dcost
        else:
            relgap = np.inf

        if trace is not None:
            trace(dict(it=it, pcost=pcost, dcost=dcost, gap=gap, pres=pres, dres=dres, tau=tau, kappa=kappa))
        result = IpmResult("max-iterations", x / tau, y / tau, z / tau, s / tau, it, pres, dres, gap)
        if best is None or max(pres, dres, gap) < max(best.pres, best.dres, best.gap):
            best = result

        if pres <= FEASTOL and dres <= FEASTOL and (gap <= ABSTOL or relgap <= RELTOL):
            result.status = "optimal"
            return result
        if objective_limit is not None and -pcost > objective_limit and pres <= 1e-8:
            result.status = "objective-limit"
            return result
        # infeasibility certificates
        if hz + by < 0:
            pinf = np.linalg.norm(A.T @ y + G.T @ z) / resx0 / -(hz + by)
            if pinf <= FEASTOL:
                k = -(hz + by)
                return IpmResult("primal-infeasible", x, y / k, z / k, s, it, pres, dres, gap)
        if cx < 0:
            dinf = max(np.linalg.norm(A @ x) / resy0, np.linalg.norm(G @ x + s) / resz0) / -cx
            if dinf <= FEASTOL:
                k = -cx
                return IpmResult("dual-infeasible", x / k, y, z, s / k, it, pres, dres, gap)
        if it == MAX_ITERS:
            break

        try:
            W = cone.scaling(s, z)
            kkt = _KKT(G, A, W)
        except (np.linalg.LinAlgError, ValueError):
            best.status = "singular"
            return best
        lam = W.lam
        x1, y1, z1 = kkt.solve(-c, b, h, G)
        denom1 = c @ x1 + b @ y1 + h @ z1 - kappa / tau

        def direction(eta, ds_target, dk_target):
            # ds_target: scaled complementarity right-hand side, dk_target for tau*kappa
            lds = W.lam_divide(ds_target) if m else ds_target
            x2, y2, z2 = kkt.solve(-(1 - eta) * rx, -(1 - eta) * ry, -(1 - eta) * rz - (W.Wt(lds) if m else 0.0), G)
            rhs_t = -(1 - eta) * rt - dk_target / tau
            dtau = (rhs_t - (c @ x2 + b @ y2 + h @ z2)) / denom1
            dx, dy, dz = x2 + dtau * x1, y2 + dtau * y1, z2 + dtau * z1
            # from the linearised primal equation, which keeps its residual exact
            ds = -(1 - eta) * rz - G @ dx + h * dtau
            dkappa = (dk_target - kappa * dtau) / tau
            return dx, dy, dz, ds, dtau, dkappa

        # predictor
        lamlam = cone.product(lam, lam) if m else np.zeros(0)
        dx, dy, dz, ds, dtau, dkappa = direction(0.0, -lamlam, -tau * kappa)
        alpha = min(1.0, _max_step(cone, s, ds, z, dz, tau, dtau, kappa, dkappa))
        sigma = (1.0 - alpha) ** 3

        # corrector
        if m:
            corr = cone.product(W.Winvt(ds), W.W(dz))
            target = -lamlam + sigma * mu * e - corr
        else:
            target = lamlam
        dx, dy, dz, ds, dtau, dkappa = direction(sigma, target, -tau * kappa + sigma * mu - dtau * dkappa)
        alpha = min(1.0, STEP * _max_step(cone, s, ds, z, dz, tau, dtau, kappa, dkappa))

        x = x + alpha * dx
        y = y + alpha * dy
        z = z + alpha * dz
        s = s + alpha * ds
        tau += alpha * dtau
        kappa += alpha * dkappa
        if not (np.all(np.isfinite(x)) and np.isfinite(tau) and tau > 0 and kappa > 0):
            best.status = "singular"
            return best

    best.status = "max-iterations"
    return best
