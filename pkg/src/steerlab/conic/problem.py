"""Problem assembly for the conic solver.

Problems are stated as

    maximize    c'x + offset
    subject to  A x = b
                G x + s = h,   s in K

where ``K`` is a product of a nonnegative orthant, second-order cones and PSD
cones (see :mod:`steerlab.conic.cones`).  :class:`ConicProblem` builds this
standard form from named variable blocks and constraints written as
``sum_k M_k x_k - rhs in cone``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..quantum import HERMITIAN_TOL, pauli_coefficients
from .cones import ConeDims, svec, svec_size

MAX_PSD_ORDER = 8
VARIABLE_KINDS = ("free", "nonneg", "psd")


def embed_hermitian(H) -> np.ndarray:
    """Real symmetric embedding ``[[Re H, -Im H], [Im H, Re H]]`` of a Hermitian matrix.

    The embedding is PSD exactly when ``H`` is; every eigenvalue of ``H``
    appears twice, so its trace is ``2 tr H``.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {H.shape}")
    if np.max(np.abs(H - H.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise DomainError("matrix is not Hermitian")
    re, im = H.real, H.imag
    return np.block([[re, -im], [im, re]])


@dataclass(frozen=True, eq=False)
class Variable:
    """A block of decision variables; PSD blocks are stored in svec form."""

    name: str
    kind: str
    size: int
    start: int
    order: int = 0

    @property
    def index(self) -> slice:
        return slice(self.start, self.start + self.size)


@dataclass(frozen=True, eq=False)
class Constraint:
    name: str
    kind: str  # "eq", "l", "q" or "s"
    rows: np.ndarray  # dense coefficient rows over all variables
    rhs: np.ndarray
    order: int = 0  # cone length (q) or matrix order (s)


@dataclass
class StandardForm:
    """``maximize c'x + offset`` s.t. ``Ax = b``, ``h - Gx in K``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    h: np.ndarray
    dims: ConeDims
    offset: float = 0.0
    # row ranges of named constraints in (A, b) or (G, h)
    eq_slices: dict = field(default_factory=dict)
    cone_slices: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.c.size

    def to_text(self) -> str:
        """Plain-text triplet dump, one nonzero per line."""
        out = io.StringIO()
        out.write("# maximize c'x + offset s.t. A x = b, h - G x in K\n")
        out.write(f"size {self.n} {self.b.size} {self.h.size}\n")
        out.write(f"cone l {self.dims.l}\n")
        out.write("cone q " + " ".join(str(d) for d in self.dims.q) + "\n")
        out.write("cone s " + " ".join(str(d) for d in self.dims.s) + "\n")
        out.write(f"offset {float(self.offset)!r}\n")
        for name, vec in (("c", self.c), ("b", self.b), ("h", self.h)):
            for i in np.flatnonzero(vec):
                out.write(f"{name} {i} {float(vec[i])!r}\n")
        for name, mat in (("A", self.A), ("G", self.G)):
            for i, j in zip(*np.nonzero(mat)):
                out.write(f"{name} {i} {j} {float(mat[i, j])!r}\n")
        return out.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "StandardForm":
        n = p = m = 0
        cones = {"l": [0], "q": [], "s": []}
        offset = 0.0
        entries = []
        for line in text.splitlines():
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            key = parts[0]
            if key == "size":
                n, p, m = (int(v) for v in parts[1:4])
            elif key == "cone":
                cones[parts[1]] = [int(v) for v in parts[2:]]
            elif key == "offset":
                offset = float(parts[1])
            else:
                entries.append(parts)
        vecs = {"c": np.zeros(n), "b": np.zeros(p), "h": np.zeros(m)}
        mats = {"A": np.zeros((p, n)), "G": np.zeros((m, n))}
        for parts in entries:
            if parts[0] in vecs:
                vecs[parts[0]][int(parts[1])] = float(parts[2])
            elif parts[0] in mats:
                mats[parts[0]][int(parts[1]), int(parts[2])] = float(parts[3])
            else:
                raise DomainError(f"unknown record {parts[0]!r}")
        dims = ConeDims(l=cones["l"][0] if cones["l"] else 0, q=cones["q"], s=cones["s"])
        return cls(vecs["c"], mats["A"], vecs["b"], mats["G"], vecs["h"], dims, offset)


class ConicProblem:
    """Incremental builder for a maximisation problem over conic constraints."""

    def __init__(self):
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self._objective: dict = {}
        self.offset = 0.0
        self._n = 0

    @property
    def n(self) -> int:
        return self._n

    def add_variable(self, name: str, kind: str = "free", size: int = 1, order: int = 0) -> Variable:
        """Add a block. ``kind="psd"`` takes the matrix ``order`` and ignores ``size``."""
        if kind not in VARIABLE_KINDS:
            raise DomainError(f"unknown variable kind {kind!r}")
        if any(v.name == name for v in self.variables):
            raise DomainError(f"duplicate variable name {name!r}")
        if kind == "psd":
            if not 1 <= order <= MAX_PSD_ORDER:
                raise DomainError(f"PSD block order must be in 1..{MAX_PSD_ORDER}")
            size = svec_size(order)
        elif size < 1:
            raise DomainError("variable block must have at least one entry")
        var = Variable(name, kind, int(size), self._n, int(order))
        self._n += var.size
        self.variables.append(var)
        return var

    def _rows(self, terms: dict, nrows: int | None = None) -> np.ndarray:
        blocks = []
        for var, coef in terms.items():
            if not isinstance(var, Variable) or var not in self.variables:
                raise DomainError("coefficient keyed by a variable of another problem")
            coef = np.asarray(coef, dtype=float)
            if coef.ndim == 1:
                coef = coef[None, :]
            if coef.ndim != 2 or coef.shape[1] != var.size:
                raise DomainError(f"coefficients for {var.name!r} have shape {coef.shape}, expected (*, {var.size})")
            blocks.append((var, coef))
        if nrows is None:
            if not blocks:
                raise DomainError("constraint has no terms")
            nrows = blocks[0][1].shape[0]
        rows = np.zeros((nrows, self._n))
        for var, coef in blocks:
            if coef.shape[0] != nrows:
                raise DomainError("coefficient blocks disagree on the number of rows")
            rows[:, var.index] += coef
        return rows

    def _add(self, name, kind, rows, rhs, order=0):
        rhs = np.broadcast_to(np.asarray(rhs, dtype=float), (rows.shape[0],)).copy()
        name = name or f"c{len(self.constraints)}"
        if any(c.name == name for c in self.constraints):
            raise DomainError(f"duplicate constraint name {name!r}")
        con = Constraint(name, kind, rows, rhs, order)
        self.constraints.append(con)
        return con

    def add_equality(self, terms: dict, rhs, name: str | None = None) -> Constraint:
        """``sum_k M_k x_k = rhs``."""
        return self._add(name, "eq", self._rows(terms), rhs)

    def add_inequality(self, terms: dict, rhs, cone=("l",), name: str | None = None) -> Constraint:
        """``sum_k M_k x_k - rhs`` lies in ``cone``: ``("l",)``, ``("q", d)`` or ``("s", n)``.

        PSD rows are in svec order.
        """
        kind = cone[0]
        rows = self._rows(terms)
        if kind == "l":
            order = 0
        elif kind == "q":
            order = int(cone[1])
            if rows.shape[0] != order:
                raise DomainError(f"second-order cone of length {order} needs {order} rows")
        elif kind == "s":
            order = int(cone[1])
            if not 1 <= order <= MAX_PSD_ORDER or rows.shape[0] != svec_size(order):
                raise DomainError(f"PSD cone of order {order} needs {svec_size(order)} rows")
        else:
            raise DomainError(f"unknown cone {cone!r}")
        return self._add(name, kind, rows, rhs, order)

    def add_hermitian_psd(self, terms: dict, constant=None, name: str | None = None, fast_path: bool = True) -> Constraint:
        """``constant + sum_k x_k H_k`` is PSD, with ``terms[var]`` of shape (var.size, n, n).

        2x2 blocks become a second-order cone in Pauli coordinates when
        ``fast_path`` is set; otherwise the real embedding is used.
        """
        stacks = {var: np.asarray(H, dtype=complex) for var, H in terms.items()}
        n = next(iter(stacks.values())).shape[-1]
        C = np.zeros((n, n), dtype=complex) if constant is None else np.asarray(constant, dtype=complex)
        for var, H in stacks.items():
            if H.shape != (var.size, n, n):
                raise DomainError(f"Hermitian coefficients for {var.name!r} have shape {H.shape}")
            if np.max(np.abs(H - np.swapaxes(H.conj(), -1, -2)), initial=0.0) > HERMITIAN_TOL:
                raise DomainError(f"coefficients for {var.name!r} are not Hermitian")
        if n == 2 and fast_path:
            coef = {var: pauli_coefficients(H).T for var, H in stacks.items()}
            return self.add_inequality(coef, -pauli_coefficients(C), cone=("q", 4), name=name)
        coef = {var: svec(np.stack([embed_hermitian(h) for h in H])).T for var, H in stacks.items()}
        return self.add_inequality(coef, -svec(embed_hermitian(C)), cone=("s", 2 * n), name=name)

    def set_objective(self, terms: dict, offset: float = 0.0) -> None:
        """Maximise ``sum_k c_k . x_k + offset``."""
        self._objective = dict(terms)
        self.offset = float(offset)

    def compile(self) -> StandardForm:
        n = self._n
        c = self._rows(self._objective, 1)[0] if self._objective else np.zeros(n)
        eqs = [con for con in self.constraints if con.kind == "eq"]
        groups = {"l": [], "q": [], "s": []}
        for var in self.variables:
            if var.kind == "free":
                continue
            rows = np.zeros((var.size, n))
            rows[:, var.index] = np.eye(var.size)
            item = Constraint(f"var:{var.name}", "l" if var.kind == "nonneg" else "s", rows, np.zeros(var.size), var.order)
            groups[item.kind].append(item)
        for con in self.constraints:
            if con.kind != "eq":
                groups[con.kind].append(con)
        eq_slices, cone_slices = {}, {}
        pos = 0
        for con in eqs:
            eq_slices[con.name] = slice(pos, pos + con.rhs.size)
            pos += con.rhs.size
        A = np.vstack([con.rows for con in eqs]) if eqs else np.zeros((0, n))
        b = np.concatenate([con.rhs for con in eqs]) if eqs else np.zeros(0)
        ordered = groups["l"] + groups["q"] + groups["s"]
        pos = 0
        for con in ordered:
            cone_slices[con.name] = slice(pos, pos + con.rhs.size)
            pos += con.rhs.size
        # M x - rhs in K  <=>  (-M) x + s = -rhs
        G = -np.vstack([con.rows for con in ordered]) if ordered else np.zeros((0, n))
        h = -np.concatenate([con.rhs for con in ordered]) if ordered else np.zeros(0)
        dims = ConeDims(
            l=sum(con.rhs.size for con in groups["l"]),
            q=[con.order for con in groups["q"]],
            s=[con.order for con in groups["s"]],
        )
        return StandardForm(c, A, b, G, h + 0.0, dims, self.offset, eq_slices, cone_slices)

    def to_text(self) -> str:
        return self.compile().to_text()
