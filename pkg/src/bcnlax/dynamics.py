"""Time integration, conserved quantities, equilibria and the frozen spin chain."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import elliptic as el
from . import rmatrix8v as rm
from .errors import DomainError, NotAnEquilibriumError, SingularJacobianError, StepRejectionError
from .lax_rvalued import (MatrixBackend, atype_f0_sum, atype_forces, bc_hamiltonian_operator, build_lax_atype,
                          build_lax_bc)
from .lax_scalar import ModelParams, PhaseState, build_lax, check_state, forces, hamiltonian
from .reports import CheckRow


# ---------------------------------------------------------------------------
# integration


@dataclass
class Trajectory:
    """States on an increasing time grid with fixed step ``step``."""

    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    step: float = 0.0

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> PhaseState:
        return self.states[-1]


def _rhs(params, y):
    n = params.n
    return np.concatenate([y[n:], forces(params, y[:n])])


def rk4_step(params: ModelParams, state: PhaseState, h: float) -> PhaseState:
    """One classical Runge-Kutta step of ``qdot = p``, ``pdot = forces(q)``."""
    y = state.as_vector()
    k1 = _rhs(params, y)
    k2 = _rhs(params, y + 0.5 * h * k1)
    k3 = _rhs(params, y + 0.5 * h * k2)
    k4 = _rhs(params, y + h * k3)
    return PhaseState.from_vector(y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))


def integrate(params: ModelParams, state0: PhaseState, T: float, h: float) -> Trajectory:
    """Fixed-step RK4 from ``t = 0`` to ``t = T``.

    The last step is shortened so the grid ends exactly at ``T``.

    Raises
    ------
    StepRejectionError
        When a stage leaves the admissible domain; ``.trajectory`` holds the
        states computed so far.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    if T < 0:
        raise ValueError("T must be non-negative")
    check_state(params, state0.q)
    traj = Trajectory([0.0], [state0], float(h))
    nsteps = int(np.ceil(T / h - 1e-9))
    t, st = 0.0, state0
    for k in range(nsteps):
        dt = min(h, T - t)
        try:
            st = rk4_step(params, st, dt)
            check_state(params, st.q)
        except DomainError as exc:
            raise StepRejectionError(f"step {k + 1} at t={t:.6g} left the admissible domain: {exc}",
                                     trajectory=traj) from exc
        t = (k + 1) * h if k + 1 < nsteps else float(T)
        traj.times.append(t)
        traj.states.append(st)
    return traj


def conserved_traces(params: ModelParams, state: PhaseState, z, ks=(2, 4)) -> list:
    """``[tr L(z)^k for k in ks]`` from the scalar Lax matrix."""
    L, _ = build_lax(params, state, z)
    out = []
    for k in ks:
        if k < 1:
            raise ValueError("trace powers must be positive")
        out.append(complex(np.trace(np.linalg.matrix_power(L.matrix, int(k)))))
    return out


def monitor(params: ModelParams, traj: Trajectory, z, ks=(2, 4), stride: int = 1) -> dict:
    """``H`` and ``tr L^k`` sampled every ``stride`` states.

    Returns a dict with ``times``, ``H`` and ``trL<k>`` arrays.
    """
    idx = list(range(0, len(traj), stride))
    if idx[-1] != len(traj) - 1:
        idx.append(len(traj) - 1)
    out = {"times": np.array([traj.times[i] for i in idx]),
           "H": np.array([hamiltonian(params, traj.states[i]) for i in idx])}
    traces = np.array([conserved_traces(params, traj.states[i], z, ks) for i in idx])
    for col, k in enumerate(ks):
        out[f"trL{k}"] = traces[:, col]
    return out


def trajectory_lax_fd(params: ModelParams, state: PhaseState, z, h: float = 1e-4) -> float:
    """Relative mismatch of ``(L(t+h) - L(t-h)) / 2h`` and ``[L, M]`` along the flow.

    The neighbouring states come from single RK4 steps of size ``+h`` and
    ``-h``, so the mismatch is ``O(h^2)``; the result is normalised by the
    largest entry of ``[L, M]``.
    """
    L0, M0 = build_lax(params, state, z)
    Lp, _ = build_lax(params, rk4_step(params, state, h), z)
    Lm, _ = build_lax(params, rk4_step(params, state, -h), z)
    fd = (Lp.matrix - Lm.matrix) / (2 * h)
    comm = L0.matrix @ M0.matrix - M0.matrix @ L0.matrix
    return float(np.max(np.abs(fd - comm)) / max(1.0, np.max(np.abs(comm))))


def relative_drift(values) -> float:
    """``max_t |v(t) - v(0)| / max(1, |v(0)|)``."""
    v = np.asarray(values)
    return float(np.max(np.abs(v - v[0])) / max(1.0, abs(v[0])))


def trajectory_csv(params: ModelParams, traj: Trajectory, z, stride: int = 1) -> str:
    """Trajectory as CSV text.

    Columns: ``t``, then ``q<i>_re, q<i>_im`` for each particle, then
    ``p<i>_re, p<i>_im``, then ``H_re, H_im, trL2_re, trL2_im, trL4_re, trL4_im``.
    """
    mon = monitor(params, traj, z, (2, 4), stride)
    n = params.n
    header = ["t"]
    header += [f"q{i}_{part}" for i in range(n) for part in ("re", "im")]
    header += [f"p{i}_{part}" for i in range(n) for part in ("re", "im")]
    header += [f"{name}_{part}" for name in ("H", "trL2", "trL4") for part in ("re", "im")]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    idx = list(range(0, len(traj), stride))
    if idx[-1] != len(traj) - 1:
        idx.append(len(traj) - 1)
    for row, i in enumerate(idx):
        st = traj.states[i]
        vals = [traj.times[i]]
        for arr in (st.q, st.p):
            for c in arr:
                vals += [c.real, c.imag]
        for name in ("H", "trL2", "trL4"):
            c = mon[name][row]
            vals += [c.real, c.imag]
        w.writerow([repr(float(v)) for v in vals])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# equilibria


@dataclass
class EquilibriumResult:
    zeta: np.ndarray
    force_residual: float
    iterations: int
    converged: bool
    kind: str = "bc"
    attempts: int = 1

    def to_dict(self) -> dict:
        return {
            "zeta": [[float(c.real), float(c.imag)] for c in np.asarray(self.zeta)],
            "force_residual": float(self.force_residual),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "kind": self.kind,
            "attempts": int(self.attempts),
        }


@dataclass(frozen=True)
class EquilibriumOptions:
    """Newton settings.

    ``kind`` selects the force map: ``"bc"`` for the full BC_n forces or
    ``"atype"`` for the pair-difference forces ``g^2 sum wp'(zeta_i - zeta_k)``;
    the A-type map is translation invariant and the last coordinate is held
    at its initial value.
    """

    kind: str = "bc"
    tol: float = 1e-10
    max_iter: int = 60
    restarts: int = 8
    seed: int = 0
    fd_step: float = 1e-6
    max_condition: float = 1e13


def force_map(params: ModelParams, zeta, kind: str = "bc") -> np.ndarray:
    """The equilibrium equations: BC_n forces at ``p = 0`` or the A-type forces."""
    if kind == "bc":
        return forces(params, zeta)
    if kind == "atype":
        zeta = np.asarray(zeta, dtype=complex)
        for i in range(len(zeta)):
            for k in range(i + 1, len(zeta)):
                el.check_off_lattice(params.ctx, f"zeta{i}-zeta{k}", zeta[i] - zeta[k])
        return atype_forces(params, zeta)
    raise ValueError(f"unknown equilibrium kind {kind!r}")


def staggered_init(n: int) -> np.ndarray:
    """``zeta_i = i / (2(n+1))``, ``i = 1..n``."""
    return np.arange(1, n + 1) / (2.0 * (n + 1)) + 0j


def _jacobian(fun, x, h):
    m = len(x)
    f0 = fun(x)
    J = np.empty((len(f0), m), dtype=complex)
    for j in range(m):
        e = np.zeros(m, dtype=complex)
        e[j] = h
        J[:, j] = (fun(x + e) - fun(x - e)) / (2 * h)
    return J


def _newton(fun, x0, opts):
    """Damped Newton with backtracking on ``max |F|``; returns ``(x, |F|, iterations)``."""
    x = np.array(x0, dtype=complex)
    fx = fun(x)
    norm = float(np.max(np.abs(fx)))
    it = 0
    while it < opts.max_iter and norm >= opts.tol:
        it += 1
        J = _jacobian(fun, x, opts.fd_step)
        cond = float(np.linalg.cond(J))
        if not np.isfinite(cond) or cond > opts.max_condition:
            raise SingularJacobianError(f"Jacobian condition {cond:.3e} at iteration {it}", condition=cond)
        step = np.linalg.solve(J, -fx)
        lam = 1.0
        while lam > 1e-6:
            try:
                trial = x + lam * step
                ft = fun(trial)
                nt = float(np.max(np.abs(ft)))
            except DomainError:
                nt = np.inf
            if nt < (1 - 1e-4 * lam) * norm:
                x, fx, norm = trial, ft, nt
                break
            lam *= 0.5
        else:
            break
    return x, norm, it


def find_equilibrium(params: ModelParams, init=None, opts: EquilibriumOptions | None = None) -> EquilibriumResult:
    """Solve the equilibrium equations by damped Newton with seeded restarts.

    Parameters
    ----------
    params : ModelParams
    init : array of n complex, optional
        Defaults to :func:`staggered_init`.
    opts : EquilibriumOptions, optional

    Returns
    -------
    EquilibriumResult
        ``force_residual`` is recomputed from the force map at the returned
        point; ``converged`` is false if no attempt reached ``opts.tol``.

    Raises
    ------
    SingularJacobianError
        When every attempt stops at a singular Jacobian.
    """
    opts = opts or EquilibriumOptions()
    n = params.n
    x0 = staggered_init(n) if init is None else np.asarray(init, dtype=complex).ravel()
    if len(x0) != n:
        raise ValueError(f"init must have {n} entries")
    rng = np.random.default_rng(opts.seed)
    real_regime = (abs(params.ctx.tau.real) < 1e-15 and abs(params.g.imag) < 1e-15
                   and all(abs(v.imag) < 1e-15 for v in params.nu))

    def attempt(start):
        if opts.kind == "atype":
            anchor = start[-1]
            fun = lambda y: force_map(params, np.append(y, anchor), "atype")[:-1]
            y, _, it = _newton(fun, start[:-1], opts)
            zeta = np.append(y, anchor)
        else:
            zeta, _, it = _newton(lambda y: force_map(params, y, "bc"), start, opts)
        return zeta, it

    best, singular, total_it = None, None, 0
    for k in range(opts.restarts + 1):
        if k == 0:
            start = x0
        elif real_regime:
            start = np.sort(rng.uniform(0.02, 0.48, n)) + 0j
        else:
            start = rng.uniform(0.05, 0.45, n) + rng.uniform(0.05, 0.45, n) * params.ctx.tau
        try:
            zeta, it = attempt(start)
        except SingularJacobianError as exc:
            singular = exc
            continue
        except DomainError:
            continue
        total_it += it
        res = float(np.max(np.abs(force_map(params, zeta, opts.kind))))
        if best is None or res < best[1]:
            best = (zeta, res, k + 1)
        if res < opts.tol:
            break
    if best is None:
        if singular is not None:
            raise singular
        raise DomainError("every Newton attempt left the admissible domain")
    zeta, res, attempts = best
    return EquilibriumResult(zeta, res, total_it, res < opts.tol, opts.kind, attempts)


# ---------------------------------------------------------------------------
# frozen spin chain


def _site_pauli(a, k, n):
    return rm.embed(rm.pauli(a), (k,), n)


def spin_chain_hamiltonian(params: ModelParams, zeta, kind: str = "bc") -> rm.DenseOperator:
    """The long-range spin chain Hamiltonian on ``(C^2)^{(x) n}``.

    For ``kind="bc"`` this is ``g sum_{k<l} (F0_kl(zeta_k - zeta_l) + F0_kl(zeta_k + zeta_l))
    + 1/2 sum_k Y0_k(zeta_k)``, assembled term by term from Pauli strings:
    the two-site terms carry ``sigma_{4-a} (x) sigma_{4-a}`` and the one-site
    terms ``sigma_{4-a}``.  ``kind="atype"`` keeps only the difference terms.
    """
    ctx, n, g = params.ctx, params.n, params.g
    zeta = np.asarray(zeta, dtype=complex)
    if len(zeta) != n:
        raise ValueError(f"zeta must have {n} entries")
    H = rm.DenseOperator.zero(n)
    for k in range(n):
        for m in range(k + 1, n):
            args = [zeta[k] - zeta[m]] + ([zeta[k] + zeta[m]] if kind == "bc" else [])
            c = sum(rm.f0_coefficients(ctx, x) for x in args)
            for a in range(4):
                H = H + (_site_pauli(4 - a, k, n) @ _site_pauli(4 - a, m, n)) * (g * c[a])
        if kind == "bc":
            d = rm.y0_coefficients(ctx, params.nu, zeta[k])
            for a in range(4):
                H = H + _site_pauli(4 - a, k, n) * (0.5 * d[a])
    if kind not in ("bc", "atype"):
        raise ValueError(f"unknown spin-chain kind {kind!r}")
    return H


def spin_chain_from_lax(params: ModelParams, zeta, kind: str = "bc") -> rm.DenseOperator:
    """The same Hamiltonian re-assembled from the Lax-pair building blocks."""
    backend = MatrixBackend(params.ctx, params.nu, params.n)
    zeta = np.asarray(zeta, dtype=complex)
    if kind == "bc":
        return bc_hamiltonian_operator(backend, params, zeta)
    return atype_f0_sum(backend, params, zeta)


def _commutator_row(id, A, B, tol):
    """``A - B`` for dense matrices, scaled by the largest entry of either side."""
    res = float(np.max(np.abs(A - B)))
    scale = float(max(np.max(np.abs(A)), np.max(np.abs(B))))
    return CheckRow(id, res, scale, tol)


def quantum_lax_residual(params: ModelParams, zeta, z, kind: str = "bc", tol: float = 1e-7,
                         force_tol: float = 1e-8, check: bool = True) -> CheckRow:
    """Residual of ``[H, L'(z)] = [L'(z), M'(z)]`` at ``p = 0``, ``q = zeta``.

    ``L'`` and ``M'`` are the matrix-backend Lax pair with ``M'`` excluding
    the common term (``H`` for BC type, ``F^0`` for A type).

    Parameters
    ----------
    check : bool
        Refuse points whose force residual exceeds ``force_tol``; the
        identity only holds at equilibria.  Pass ``False`` for controls.

    Raises
    ------
    NotAnEquilibriumError
    """
    zeta = np.asarray(zeta, dtype=complex)
    if check:
        fr = float(np.max(np.abs(force_map(params, zeta, kind))))
        if not fr < force_tol:
            raise NotAnEquilibriumError(f"force residual {fr:.3e} exceeds {force_tol:.1e}; "
                                        f"the quantum Lax equation holds only at equilibria")
    backend = MatrixBackend(params.ctx, params.nu, params.n)
    state = PhaseState(zeta, np.zeros(params.n))
    if kind == "bc":
        L, M = build_lax_bc(backend, params, state, z, include_h=False)
    elif kind == "atype":
        L, M = build_lax_atype(backend, params, state, z, include_f0=False)
    else:
        raise ValueError(f"unknown Lax kind {kind!r}")
    Ld, Md = L.to_dense(), M.to_dense()
    H = spin_chain_from_lax(params, zeta, kind).data
    Hbig = np.kron(np.eye(L.size), H)
    return _commutator_row(f"quantum-lax-{kind}", Hbig @ Ld - Ld @ Hbig, Ld @ Md - Md @ Ld, tol)


def spectrum(H) -> np.ndarray:
    """All eigenvalues of a dense operator, sorted by real then imaginary part."""
    data = H.data if isinstance(H, rm.DenseOperator) else np.asarray(H, dtype=complex)
    if data.shape[0] > 2 ** rm.MAX_SITES:
        raise ValueError(f"dimension {data.shape[0]} exceeds 2^{rm.MAX_SITES}")
    try:
        ev = np.linalg.eigvals(data)
    except np.linalg.LinAlgError as exc:
        cond = float(np.linalg.cond(data))
        raise np.linalg.LinAlgError(f"eigenvalue computation failed (condition {cond:.3e}): {exc}") from exc
    order = np.lexsort((ev.imag, ev.real))
    return ev[order]
