"""Cone algebra for the primal-dual solver.

A slack vector is the concatenation of a nonnegative-orthant block, a list of
second-order cones ``{(u0, u1): u0 >= |u1|}`` and a list of PSD cones stored in
``svec`` form (lower triangle, column-major, off-diagonals scaled by sqrt 2 so
that ``svec(X) . svec(Y) = tr XY``).

Every cone supplies the Euclidean Jordan algebra operations needed by the
interior-point method together with Nesterov-Todd scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

SQRT2 = np.sqrt(2.0)


def svec_size(n: int) -> int:
    return n * (n + 1) // 2


def _tril_indices(n: int):
    # column-major lower triangle
    cols, rows = np.triu_indices(n)
    return rows, cols


def svec(X: np.ndarray) -> np.ndarray:
    """Symmetric matrix (or stack of them) to scaled lower-triangle vector."""
    n = X.shape[-1]
    r, c = _tril_indices(n)
    v = X[..., r, c].copy()
    v[..., r != c] *= SQRT2
    return v


def smat(v: np.ndarray, n: int) -> np.ndarray:
    r, c = _tril_indices(n)
    v = np.asarray(v, dtype=float)
    X = np.zeros(v.shape[:-1] + (n, n))
    off = r != c
    X[..., r, c] = np.where(off, v / SQRT2, v)
    X[..., c, r] = X[..., r, c]
    return X


@dataclass(frozen=True)
class ConeDims:
    """Sizes of the cone blocks: ``l`` orthant entries, SOC lengths ``q``, PSD orders ``s``."""

    l: int = 0
    q: tuple[int, ...] = ()
    s: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(int(d) for d in self.q))
        object.__setattr__(self, "s", tuple(int(n) for n in self.s))
        if self.l < 0 or any(d < 1 for d in self.q) or any(n < 1 for n in self.s):
            raise ValueError("cone dimensions must be positive")

    @property
    def size(self) -> int:
        return self.l + sum(self.q) + sum(svec_size(n) for n in self.s)

    @property
    def degree(self) -> int:
        return self.l + len(self.q) + sum(self.s)


class _Orthant:
    def __init__(self, start: int, size: int):
        self.sl = slice(start, start + size)
        self.degree = size

    def identity(self, out):
        out[self.sl] = 1.0

    def margin(self, u):
        v = u[self.sl]
        return v.min() if v.size else np.inf

    def margins(self, u):
        return u[self.sl]

    def product(self, u, v, out):
        out[self.sl] = u[self.sl] * v[self.sl]

    def max_step(self, x, d):
        xs, ds = x[self.sl], d[self.sl]
        neg = ds < 0
        if not neg.any():
            return np.inf
        return float(np.min(-xs[neg] / ds[neg]))

    def scaling(self, s, z):
        return _OrthantScaling(self.sl, np.sqrt(s[self.sl] / z[self.sl]), np.sqrt(s[self.sl] * z[self.sl]))


class _OrthantScaling:
    def __init__(self, sl, d, lam):
        self.sl, self.d, self.lam = sl, d, lam

    def _scale(self, v, f, out):
        blk = v[self.sl]
        out[self.sl] = blk * (f if blk.ndim == 1 else f[:, None])

    def W(self, v, out):
        self._scale(v, self.d, out)

    def Wt(self, v, out):
        self.W(v, out)

    def Winv(self, v, out):
        self._scale(v, 1.0 / self.d, out)

    def Winvt(self, v, out):
        self.Winv(v, out)

    def lam_product(self, u, out):
        out[self.sl] = self.lam * u[self.sl]

    def lam_divide(self, v, out):
        out[self.sl] = v[self.sl] / self.lam

    def lam_into(self, out):
        out[self.sl] = self.lam


def _soc_norm(b):
    # sqrt(u0^2 - |u1|^2) in factored form to limit cancellation near the boundary
    r = np.linalg.norm(b[:, 1:], axis=1)
    return np.sqrt((b[:, 0] - r) * (b[:, 0] + r))


class _SOCGroup:
    """All second-order cones of one common length, processed as a batch."""

    def __init__(self, starts: list[int], dim: int):
        self.dim = dim
        self.idx = np.asarray(starts)[:, None] + np.arange(dim)[None, :]
        self.degree = len(starts)

    def identity(self, out):
        out[self.idx[:, 0]] = 1.0
        out[self.idx[:, 1:]] = 0.0

    def margins(self, u):
        b = u[self.idx]
        return b[:, 0] - np.linalg.norm(b[:, 1:], axis=1)

    def margin(self, u):
        return self.margins(u).min()

    def product(self, u, v, out):
        a, b = u[self.idx], v[self.idx]
        out[self.idx[:, 0]] = np.einsum("ki,ki->k", a, b)
        out[self.idx[:, 1:]] = a[:, :1] * b[:, 1:] + b[:, :1] * a[:, 1:]

    def max_step(self, x, d):
        xb, db = x[self.idx], d[self.idx]
        nu = np.sqrt(np.maximum(xb[:, 0] ** 2 - np.einsum("ki,ki->k", xb[:, 1:], xb[:, 1:]), 1e-300))
        xn = xb / nu[:, None]
        # boost mapping xn to the cone axis, applied to d
        dot1 = np.einsum("ki,ki->k", xn[:, 1:], db[:, 1:])
        rho0 = (xn[:, 0] * db[:, 0] - dot1) / nu
        rho1 = (db[:, 1:] - xn[:, 1:] * db[:, :1] + xn[:, 1:] * (dot1 / (1.0 + xn[:, 0]))[:, None]) / nu[:, None]
        worst = np.max(np.linalg.norm(rho1, axis=1) - rho0)
        return np.inf if worst <= 0 else float(1.0 / worst)

    def scaling(self, s, z):
        sb, zb = s[self.idx], z[self.idx]
        sn, zn = _soc_norm(sb), _soc_norm(zb)
        sbar = sb / sn[:, None]
        zbar = zb / zn[:, None]
        gamma = np.sqrt((1.0 + np.einsum("ki,ki->k", sbar, zbar)) / 2.0)
        w = sbar.copy()
        w[:, 0] += zbar[:, 0]
        w[:, 1:] -= zbar[:, 1:]
        w /= (2.0 * gamma)[:, None]
        # hyperbolic Householder vector v with W = beta (2 v v^T - J)
        v = w.copy()
        v[:, 0] += 1.0
        v /= np.sqrt(2.0 * (w[:, 0] + 1.0))[:, None]
        beta = np.sqrt(sn / zn)
        return _SOCScaling(self.idx, v, beta, zb)


class _SOCScaling:
    # W = beta (2 w w^T - J), symmetric; W^{-1} = (2 J w w^T J - J) / beta
    def __init__(self, idx, w, beta, zb):
        self.idx, self.w, self.beta = idx, w, beta
        self.lam = self._apply(zb, inverse=False)

    def _apply(self, blk, inverse):
        w = self.w
        if inverse:
            w = w.copy()
            w[:, 1:] *= -1.0
        if blk.ndim == 2:
            wtv = np.einsum("ki,ki->k", w, blk)
            res = 2.0 * w * wtv[:, None]
            res[:, 0] -= blk[:, 0]
            res[:, 1:] += blk[:, 1:]
            scale = 1.0 / self.beta if inverse else self.beta
            return res * scale[:, None]
        wtv = np.einsum("ki,kic->kc", w, blk)
        res = 2.0 * w[:, :, None] * wtv[:, None, :]
        res[:, 0, :] -= blk[:, 0, :]
        res[:, 1:, :] += blk[:, 1:, :]
        scale = 1.0 / self.beta if inverse else self.beta
        return res * scale[:, None, None]

    def W(self, v, out):
        out[self.idx] = self._apply(v[self.idx], inverse=False)

    Wt = W

    def Winv(self, v, out):
        out[self.idx] = self._apply(v[self.idx], inverse=True)

    Winvt = Winv

    def lam_product(self, u, out):
        lam, ub = self.lam, u[self.idx]
        out[self.idx[:, 0]] = np.einsum("ki,ki->k", lam, ub)
        out[self.idx[:, 1:]] = lam[:, :1] * ub[:, 1:] + ub[:, :1] * lam[:, 1:]

    def lam_divide(self, v, out):
        lam, vb = self.lam, v[self.idx]
        det = lam[:, 0] ** 2 - np.einsum("ki,ki->k", lam[:, 1:], lam[:, 1:])
        u0 = (lam[:, 0] * vb[:, 0] - np.einsum("ki,ki->k", lam[:, 1:], vb[:, 1:])) / det
        out[self.idx[:, 0]] = u0
        out[self.idx[:, 1:]] = (vb[:, 1:] - u0[:, None] * lam[:, 1:]) / lam[:, :1]

    def lam_into(self, out):
        out[self.idx] = self.lam


class _PSD:
    def __init__(self, start: int, n: int):
        self.n = n
        self.sl = slice(start, start + svec_size(n))
        self.degree = n

    def identity(self, out):
        out[self.sl] = svec(np.eye(self.n))

    def margins(self, u):
        return np.linalg.eigvalsh(smat(u[self.sl], self.n))[:1]

    def margin(self, u):
        return float(self.margins(u)[0])

    def product(self, u, v, out):
        U, V = smat(u[self.sl], self.n), smat(v[self.sl], self.n)
        out[self.sl] = svec((U @ V + V @ U) / 2.0)

    def max_step(self, x, d):
        X, D = smat(x[self.sl], self.n), smat(d[self.sl], self.n)
        L = np.linalg.cholesky(X)
        Li = sla.solve_triangular(L, np.eye(self.n), lower=True)
        ev = np.linalg.eigvalsh(Li @ D @ Li.T)[0]
        return np.inf if ev >= 0 else float(-1.0 / ev)

    def scaling(self, s, z):
        n = self.n
        L1 = np.linalg.cholesky(smat(s[self.sl], n))
        L2 = np.linalg.cholesky(smat(z[self.sl], n))
        U, lam, Vt = np.linalg.svd(L2.T @ L1)
        R = L1 @ Vt.T / np.sqrt(lam)[None, :]
        return _PSDScaling(self.sl, n, R, lam)


class _PSDScaling:
    # W(X) = R^T X R and W^{-T}(X) = R^{-1} X R^{-T}; both map the iterates to diag(lam)
    def __init__(self, sl, n, R, lam):
        self.sl, self.n, self.R, self.lam = sl, n, R, lam
        self.Rinv = np.linalg.inv(R)

    def _congruence(self, v, M, out):
        # X -> M^T X M applied blockwise (columns of a matrix argument independently)
        blk = v[self.sl]
        if blk.ndim == 1:
            out[self.sl] = svec(M.T @ smat(blk, self.n) @ M)
        else:
            X = smat(blk.T, self.n)
            out[self.sl] = svec(M.T @ X @ M).T

    def W(self, v, out):
        self._congruence(v, self.R, out)

    def Wt(self, v, out):
        self._congruence(v, self.R.T, out)

    def Winv(self, v, out):
        self._congruence(v, self.Rinv, out)

    def Winvt(self, v, out):
        self._congruence(v, self.Rinv.T, out)

    def lam_product(self, u, out):
        U = smat(u[self.sl], self.n)
        out[self.sl] = svec((self.lam[:, None] * U + U * self.lam[None, :]) / 2.0)

    def lam_divide(self, v, out):
        V = smat(v[self.sl], self.n)
        out[self.sl] = svec(2.0 * V / (self.lam[:, None] + self.lam[None, :]))

    def lam_into(self, out):
        out[self.sl] = svec(np.diag(self.lam))


class Cone:
    """The product cone described by a :class:`ConeDims`."""

    def __init__(self, dims: ConeDims):
        self.dims = dims
        self.size = dims.size
        self.degree = dims.degree
        parts: list = []
        pos = 0
        if dims.l:
            parts.append(_Orthant(0, dims.l))
        pos = dims.l
        by_dim: dict[int, list[int]] = {}
        for d in dims.q:
            by_dim.setdefault(d, []).append(pos)
            pos += d
        for d, starts in by_dim.items():
            parts.append(_SOCGroup(starts, d))
        for n in dims.s:
            parts.append(_PSD(pos, n))
            pos += svec_size(n)
        self.parts = parts

    def identity(self) -> np.ndarray:
        e = np.zeros(self.size)
        for p in self.parts:
            p.identity(e)
        return e

    def margin(self, u: np.ndarray) -> float:
        """Smallest eigenvalue of ``u`` in the Jordan-algebra sense (>= 0 iff u in the cone)."""
        if not self.parts:
            return np.inf
        return float(min(p.margin(u) for p in self.parts))

    def product(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = np.empty(self.size)
        for p in self.parts:
            p.product(u, v, out)
        return out

    def max_step(self, x: np.ndarray, d: np.ndarray) -> float:
        """Largest ``a`` with ``x + a d`` in the cone, for ``x`` in the interior."""
        if not self.parts:
            return np.inf
        return min(p.max_step(x, d) for p in self.parts)

    def scaling(self, s: np.ndarray, z: np.ndarray) -> "Scaling":
        return Scaling(self.size, [p.scaling(s, z) for p in self.parts])


class Scaling:
    """Nesterov-Todd scaling ``W`` with ``W z = W^{-T} s = lam``."""

    def __init__(self, size: int, parts: list):
        self.size = size
        self.parts = parts
        self.lam = np.empty(size)
        for p in parts:
            p.lam_into(self.lam)

    def _apply(self, name: str, v: np.ndarray) -> np.ndarray:
        out = np.empty_like(v, dtype=float)
        for p in self.parts:
            getattr(p, name)(v, out)
        return out

    def W(self, v):
        return self._apply("W", v)

    def Wt(self, v):
        return self._apply("Wt", v)

    def Winv(self, v):
        return self._apply("Winv", v)

    def Winvt(self, v):
        return self._apply("Winvt", v)

    def lam_product(self, u):
        return self._apply("lam_product", u)

    def lam_divide(self, v):
        return self._apply("lam_divide", v)
