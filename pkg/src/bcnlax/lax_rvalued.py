"""R-matrix valued Lax pairs of A and BC type over an entry-algebra backend.

Entries of the Lax matrices live either in the algebra of Weyl-group
operators (:class:`OperatorBackend`) or in ``Mat(2)^{(x) n}`` built from the
8-vertex R-matrix (:class:`MatrixBackend`).  In ``R^z_ij(q)`` the Lax
spectral parameter ``z`` takes the Planck-type slot and ``q`` the positional
one; ``F``, ``F~`` and ``Y~`` differentiate the positional argument.
"""
from __future__ import annotations

import numpy as np

from . import rmatrix8v as rm
from .elliptic import EllipticContext
from .lax_scalar import ModelParams, PhaseState, check_state, forces
from .reports import CheckRow, Report
from .weyl_op import WeylOperator, build_generator, sample_residuals, worst_sample


# ---------------------------------------------------------------------------
# backends


class MatrixBackend:
    """Entries are dense operators on ``n`` two-level sites."""

    name = "8v"

    def __init__(self, ctx: EllipticContext, nu, n: int):
        self.ctx, self.nu, self.n = ctx, tuple(complex(v) for v in nu), int(n)

    def identity(self):
        return rm.DenseOperator.identity(self.n)

    def zero(self):
        return rm.DenseOperator.zero(self.n)

    def scalar(self, c):
        return rm.DenseOperator.identity(self.n, c)

    def _pair(self, m, i, j):
        return rm.embed(m, (i, j), self.n)

    def _site(self, m, i):
        return rm.embed(m, (i,), self.n)

    def R(self, i, j, z, x):
        return self._pair(rm.baxter_r(self.ctx, z, x), i, j)

    def Rt(self, i, j, z, x):
        return self.R(i, j, z, x)

    def F(self, i, j, z, x):
        return self._pair(rm.baxter_f(self.ctx, z, x), i, j)

    def Ft(self, i, j, z, x):
        return self.F(i, j, z, x)

    def K(self, i, z, x):
        return self._site(rm.k_matrix8v(self.ctx, self.nu, z, x), i)

    def Y(self, i, z, x):
        return self._site(rm.k_matrix8v_dz(self.ctx, self.nu, z, x), i)

    def F0(self, i, j, x):
        return self._pair(rm.f0_matrix(self.ctx, x), i, j)

    def Ft0(self, i, j, x):
        return self.F0(i, j, x)

    def Y0(self, i, x):
        return self._site(rm.y0_matrix(self.ctx, self.nu, x), i)

    def residual(self, id, lhs, rhs, terms=(), tol=1e-8) -> CheckRow:
        """Worst entry of ``lhs - rhs`` over matching lists of entries."""
        res = max(float(np.max(np.abs(a.data - b.data))) for a, b in zip(lhs, rhs))
        scale = max([e.norm() for e in (*lhs, *rhs, *terms)] + [0.0])
        return CheckRow(id, res, scale, tol)


class OperatorBackend:
    """Entries are Weyl-group operators, compared at sampled coordinates ``x``.

    The K-type entries carry the dual couplings ``nu_bar`` (see
    :func:`bcnlax.weyl_op.build_generator`).
    """

    name = "operator"

    def __init__(self, ctx: EllipticContext, params: ModelParams, x_samples):
        self.ctx, self.cs, self.n = ctx, params.couplings, params.n
        self.x = np.atleast_2d(np.asarray(x_samples, dtype=complex))
        if self.x.shape[-1] != self.n:
            raise ValueError(f"x samples must have {self.n} columns")

    def identity(self):
        return WeylOperator.identity(self.n)

    def zero(self):
        return WeylOperator.zero(self.n)

    def scalar(self, c):
        return WeylOperator.identity(self.n, c)

    def _gen(self, kind, sites, z, x):
        return build_generator(self.ctx, self.cs, kind, sites, z, x, self.n)

    def R(self, i, j, z, x):
        return self._gen("R", (i, j), z, x)

    def Rt(self, i, j, z, x):
        return self._gen("R_tilde", (i, j), z, x)

    # F, F~ and Y~ do not depend on the Planck-type parameter
    def F(self, i, j, z, x):
        return self._gen("F", (i, j), None, x)

    def Ft(self, i, j, z, x):
        return self._gen("F_tilde", (i, j), None, x)

    def K(self, i, z, x):
        return self._gen("K_tilde", (i,), z, x)

    def Y(self, i, z, x):
        return self._gen("Y_tilde", (i,), None, x)

    def F0(self, i, j, x):
        return self.F(i, j, 0, x)

    def Ft0(self, i, j, x):
        return self.Ft(i, j, 0, x)

    def Y0(self, i, x):
        return self.Y(i, 0, x)

    def residual(self, id, lhs, rhs, terms=(), tol=1e-8) -> CheckRow:
        """Worst per-group-element coefficient of ``lhs - rhs``, judged sample by sample.

        At each sample the residual is the largest mismatch over all entries
        and group elements, the scale the largest coefficient majorant of
        any entry or term; the worst sample is reported.
        """
        S = self.x.shape[0]
        residual, scale = np.zeros(S), np.zeros(S)
        for a, b in zip(lhs, rhs):
            r, sc = sample_residuals(a, b, self.x)
            residual, scale = np.maximum(residual, r), np.maximum(scale, sc)
        for t in terms:
            _, sc = sample_residuals(t, self.zero(), self.x)
            scale = np.maximum(scale, sc)
        s = worst_sample(residual, scale)
        return CheckRow(id, float(residual[s]), float(scale[s]), tol)


# ---------------------------------------------------------------------------
# matrices with algebra-valued entries


class EntryMatrix:
    """A square matrix whose entries are backend elements."""

    def __init__(self, rows):
        self.rows = [list(r) for r in rows]

    @property
    def size(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def entries(self):
        return [e for r in self.rows for e in r]

    def __add__(self, other):
        return EntryMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return EntryMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __matmul__(self, other):
        m = self.size
        out = []
        for i in range(m):
            row = []
            for j in range(m):
                acc = self.rows[i][0] @ other.rows[0][j]
                for k in range(1, m):
                    acc = acc + self.rows[i][k] @ other.rows[k][j]
                row.append(acc)
            out.append(row)
        return EntryMatrix(out)

    def block(self, a: int, b: int) -> "EntryMatrix":
        """Block ``(a, b)``, ``a, b`` in ``{1, 2}``, of a ``2n x 2n`` matrix."""
        n = self.size // 2
        return EntryMatrix([r[(b - 1) * n:b * n] for r in self.rows[(a - 1) * n:a * n]])

    @classmethod
    def from_blocks(cls, b11, b12, b21, b22) -> "EntryMatrix":
        top = [r1 + r2 for r1, r2 in zip(b11.rows, b12.rows)]
        bottom = [r1 + r2 for r1, r2 in zip(b21.rows, b22.rows)]
        return cls(top + bottom)

    def to_dense(self) -> np.ndarray:
        """Assemble a dense matrix (matrix backend only)."""
        return np.block([[e.data for e in r] for r in self.rows])


def _square(n, fn):
    return EntryMatrix([[fn(i, j) for j in range(n)] for i in range(n)])


# ---------------------------------------------------------------------------
# A-type pair


def atype_forces(params: ModelParams, q) -> np.ndarray:
    """``pdot_i = g^2 sum_{k != i} wp'(q_i - q_k)``."""
    from . import elliptic as el

    q = np.asarray(q, dtype=complex)
    g = params.g
    out = np.zeros(len(q), dtype=complex)
    for i in range(len(q)):
        for k in range(len(q)):
            if k != i:
                out[i] += g * g * complex(el.weierstrass_p(params.ctx, q[i] - q[k], 1))
    return out


def atype_f0_sum(backend, params: ModelParams, q):
    """``F^0 = g sum_{k > m} F^0_km(q_k - q_m)``."""
    n = params.n
    acc = backend.zero()
    for k in range(n):
        for m in range(k):
            acc = acc + backend.F0(k, m, q[k] - q[m]) * params.g
    return acc


def build_lax_atype(backend, params: ModelParams, state: PhaseState, z, include_f0: bool = True):
    """``(L, Mbar)`` of the A-type R-matrix valued Lax pair.

    ``L_ij = Id p_i delta_ij + g (1 - delta_ij) R^z_ij(q_ij)`` and
    ``Mbar_ij = (D_i + F^0) delta_ij + g (1 - delta_ij) F^z_ij(q_ij)`` with
    ``D_i = -g sum_{k != i} F^0_ik(q_ik)``.  With ``include_f0=False`` the
    common term ``F^0`` is left out of ``Mbar``.
    """
    n, g = params.n, params.g
    q, p = state.q, state.p
    F0 = atype_f0_sum(backend, params, q) if include_f0 else backend.zero()
    D = []
    for i in range(n):
        acc = backend.zero()
        for k in range(n):
            if k != i:
                acc = acc - backend.F0(i, k, q[i] - q[k]) * g
        D.append(acc)
    L = _square(n, lambda i, j: backend.scalar(p[i]) if i == j else backend.R(i, j, z, q[i] - q[j]) * g)
    M = _square(n, lambda i, j: D[i] + F0 if i == j else backend.F(i, j, z, q[i] - q[j]) * g)
    return L, M


def atype_time_derivative(backend, params: ModelParams, state: PhaseState, z) -> EntryMatrix:
    n, g = params.n, params.g
    q, p = state.q, state.p
    pdot = atype_forces(params, q)
    return _square(n, lambda i, j: backend.scalar(pdot[i]) if i == j
                   else backend.F(i, j, z, q[i] - q[j]) * (g * (p[i] - p[j])))


# ---------------------------------------------------------------------------
# BC-type pair


def bc_hamiltonian_operator(backend, params: ModelParams, q):
    """``H = g sum_{k<l} (F^0_kl(q_kl) + F~^0_kl(q+_kl)) + 1/2 sum_k Y~^0_k(q_k)``."""
    n, g = params.n, params.g
    acc = backend.zero()
    for k in range(n):
        acc = acc + backend.Y0(k, q[k]) * 0.5
        for m in range(k + 1, n):
            acc = acc + (backend.F0(k, m, q[k] - q[m]) + backend.Ft0(k, m, q[k] + q[m])) * g
    return acc


def bc_diagonal(backend, params: ModelParams, q):
    """``A_i = -1/2 Y~^0_i(q_i) - g sum_{k != i} (F^0_ik(q_ik) + F~^0_ik(q+_ik))``."""
    n, g = params.n, params.g
    out = []
    for i in range(n):
        acc = backend.Y0(i, q[i]) * -0.5
        for k in range(n):
            if k != i:
                acc = acc - (backend.F0(i, k, q[i] - q[k]) + backend.Ft0(i, k, q[i] + q[k])) * g
        out.append(acc)
    return out


def build_lax_bc(backend, params: ModelParams, state: PhaseState, z, include_h: bool = True):
    """``(L, M)`` of the BC-type R-matrix valued Lax pair as ``2n x 2n`` entry matrices.

    Parameters
    ----------
    backend : MatrixBackend or OperatorBackend
    params : ModelParams
    state : PhaseState
    z : complex
        Spectral parameter.
    include_h : bool
        Add the global term ``H 1_{2n}`` to ``M``.

    Returns
    -------
    (EntryMatrix, EntryMatrix)
    """
    n, g = params.n, params.g
    q, p = state.q, state.p
    check_state(params, q)
    A = bc_diagonal(backend, params, q)
    qm = lambda i, j: q[i] - q[j]
    qp = lambda i, j: q[i] + q[j]

    L11 = _square(n, lambda i, j: backend.scalar(p[i]) if i == j else backend.R(i, j, z, qm(i, j)) * g)
    L12 = _square(n, lambda i, j: backend.K(i, z, q[i]) if i == j else backend.Rt(i, j, z, qp(i, j)) * g)
    L21 = _square(n, lambda i, j: -backend.K(i, -z, q[i]) if i == j else backend.Rt(i, j, -z, qp(i, j)) * -g)
    L22 = _square(n, lambda i, j: backend.scalar(-p[i]) if i == j else backend.R(i, j, -z, qm(i, j)) * -g)
    M11 = _square(n, lambda i, j: A[i] if i == j else backend.F(i, j, z, qm(i, j)) * g)
    M12 = _square(n, lambda i, j: backend.Y(i, z, q[i]) * 0.5 if i == j else backend.Ft(i, j, z, qp(i, j)) * g)
    M21 = _square(n, lambda i, j: backend.Y(i, -z, q[i]) * 0.5 if i == j else backend.Ft(i, j, -z, qp(i, j)) * g)
    M22 = _square(n, lambda i, j: A[i] if i == j else backend.F(i, j, -z, qm(i, j)) * g)
    L = EntryMatrix.from_blocks(L11, L12, L21, L22)
    M = EntryMatrix.from_blocks(M11, M12, M21, M22)
    if include_h:
        H = bc_hamiltonian_operator(backend, params, q)
        M = M + _square(2 * n, lambda i, j: H if i == j else backend.zero())
    return L, M


def bc_time_derivative(backend, params: ModelParams, state: PhaseState, z) -> EntryMatrix:
    """Analytic ``dL/dt`` along the BC_n equations of motion."""
    n, g = params.n, params.g
    q, p = state.q, state.p
    pdot = forces(params, q)
    qm = lambda i, j: q[i] - q[j]
    qp = lambda i, j: q[i] + q[j]
    D11 = _square(n, lambda i, j: backend.scalar(pdot[i]) if i == j
                  else backend.F(i, j, z, qm(i, j)) * (g * (p[i] - p[j])))
    D12 = _square(n, lambda i, j: backend.Y(i, z, q[i]) * p[i] if i == j
                  else backend.Ft(i, j, z, qp(i, j)) * (g * (p[i] + p[j])))
    D21 = _square(n, lambda i, j: backend.Y(i, -z, q[i]) * -p[i] if i == j
                  else backend.Ft(i, j, -z, qp(i, j)) * (-g * (p[i] + p[j])))
    D22 = _square(n, lambda i, j: backend.scalar(-pdot[i]) if i == j
                  else backend.F(i, j, -z, qm(i, j)) * (-g * (p[i] - p[j])))
    return EntryMatrix.from_blocks(D11, D12, D21, D22)


def _block_rows(backend, id, Ld, LM, ML, tol):
    """One row per block of ``dL/dt - (L M - M L)``."""
    rows = []
    for a in (1, 2):
        for b in (1, 2):
            lhs = Ld.block(a, b).entries()
            rhs = (LM - ML).block(a, b).entries()
            terms = LM.block(a, b).entries() + ML.block(a, b).entries()
            r = backend.residual(f"{id}/{a}{b}", lhs, rhs, terms, tol=tol)
            rows.append(r)
    return rows


def lax_residual_rv(backend, params: ModelParams, state: PhaseState, z, kind: str = "bc",
                    tol: float = 1e-8) -> Report:
    """Residual of ``dL/dt = [L, M]`` per block.

    Parameters
    ----------
    backend : MatrixBackend or OperatorBackend
    kind : {"bc", "atype"}
        ``"atype"`` checks the A-type pair with the A-type forces; its single
        block is reported as ``/11``.

    Returns
    -------
    Report
        Rows ``lax-rv-<kind>/<ab>``.
    """
    id = f"lax-rv-{kind}"
    rep = Report(f"R-matrix valued Lax equation ({kind}, {backend.name}, n={params.n})")
    if kind == "bc":
        L, M = build_lax_bc(backend, params, state, z)
        Ld = bc_time_derivative(backend, params, state, z)
        for r in _block_rows(backend, id, Ld, L @ M, M @ L, tol):
            rep.add(r)
    elif kind == "atype":
        L, M = build_lax_atype(backend, params, state, z)
        Ld = atype_time_derivative(backend, params, state, z)
        LM, ML = L @ M, M @ L
        rep.add(backend.residual(f"{id}/11", Ld.entries(), (LM - ML).entries(),
                                 LM.entries() + ML.entries(), tol=tol))
    else:
        raise ValueError(f"unknown Lax kind {kind!r}")
    return rep


def worst_row(report: Report, id: str) -> CheckRow:
    """Collapse a report into its worst row under a new id."""
    w = max(report.rows, key=lambda r: r.relative)
    return CheckRow(id, w.residual, w.scale, w.tol)


def scalar_consistency(backend: MatrixBackend, params: ModelParams, states, z, tol: float = 1e-9) -> CheckRow:
    """Heuristic reduction probe for the matrix backend.

    ``tr L(z)^2 / (4 * 2^n)`` with the trace over both the ``2n`` Lax indices
    and the spin sites should differ from the scalar Hamiltonian ``H`` by a
    function of ``z`` alone.  The row reports the spread of that difference
    over ``states``.
    """
    from .lax_scalar import hamiltonian

    diffs, scale = [], 0.0
    for st in states:
        L, _ = build_lax_bc(backend, params, st, z, include_h=False)
        dense = L.to_dense()
        t2 = complex(np.trace(dense @ dense)) / (4 * 2 ** params.n)
        H = hamiltonian(params, st)
        diffs.append(t2 - H)
        scale = max(scale, abs(t2), abs(H))
    diffs = np.array(diffs)
    return CheckRow("scalar-consistency", float(np.max(np.abs(diffs - diffs[0]))), scale, tol,
                    note="heuristic: trace-reduced tr L^2 / 4 minus H is state independent")


def atype_key_identity(backend, params: ModelParams, q, z, tol: float = 1e-8) -> Report:
    """The off-diagonal cancellation behind the A-type Lax equation.

    For every ``i != j`` checks
    ``[R_ij, F^0] + g sum_{l != i,j} (R_il F_lj - F_il R_lj) = D_i R_ij - R_ij D_j``
    with ``R_ij = R^z_ij(q_ij)``, ``F_ij = F^z_ij(q_ij)`` and ``D_i``, ``F^0``
    as in :func:`build_lax_atype`.
    """
    n, g = params.n, params.g
    q = np.asarray(q, dtype=complex)
    F0 = atype_f0_sum(backend, params, q)
    D = []
    for i in range(n):
        acc = backend.zero()
        for k in range(n):
            if k != i:
                acc = acc - backend.F0(i, k, q[i] - q[k]) * g
        D.append(acc)
    R = lambda i, j: backend.R(i, j, z, q[i] - q[j])
    F = lambda i, j: backend.F(i, j, z, q[i] - q[j])
    rep = Report(f"A-type key identity ({backend.name}, n={n})")
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            Rij = R(i, j)
            terms = [Rij @ F0, F0 @ Rij, D[i] @ Rij, Rij @ D[j]]
            lhs = Rij @ F0 - F0 @ Rij
            for l in range(n):
                if l not in (i, j):
                    a, b = R(i, l) @ F(l, j) * g, F(i, l) @ R(l, j) * g
                    lhs = lhs + a - b
                    terms += [a, b]
            rhs = D[i] @ Rij - Rij @ D[j]
            rep.add(backend.residual(f"atype-key/{i}{j}", [lhs], [rhs], terms, tol=tol))
    return rep
