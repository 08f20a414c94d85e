"""The BC_n Calogero-Inozemtsev model and its 2n x 2n scalar Lax pair."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import elliptic as el
from .elliptic import CouplingSet, EllipticContext
from .errors import DomainError
from .reports import CheckRow


@dataclass(frozen=True)
class ModelParams:
    """Particle number ``n``, coupling ``g`` and the four boundary couplings ``nu``."""

    n: int
    g: complex
    nu: tuple
    ctx: EllipticContext

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "g", complex(self.g))
        nu = tuple(complex(v) for v in self.nu)
        if len(nu) != 4:
            raise ValueError("nu must have four entries")
        if not (np.isfinite(self.g) and all(np.isfinite(v) for v in nu)):
            raise ValueError("couplings must be finite")
        object.__setattr__(self, "nu", nu)

    @property
    def couplings(self) -> CouplingSet:
        return CouplingSet(self.g, self.nu)

    @property
    def nu_bar(self) -> tuple:
        return tuple(el.dual_couplings(self.nu))


@dataclass(frozen=True)
class PhaseState:
    """Positions ``q`` and momenta ``p`` (complex, length ``n``)."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=complex).ravel()
        p = np.array(self.p, dtype=complex).ravel()
        if q.shape != p.shape:
            raise ValueError("q and p must have equal length")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return len(self.q)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, y) -> "PhaseState":
        y = np.asarray(y, dtype=complex)
        n = len(y) // 2
        return cls(y[:n], y[n:])


def state_arguments(q):
    """Every argument the potential and Lax entries evaluate at.

    Returns ``(label, value, half)`` triples; ``half`` marks arguments that
    must also avoid the half-lattice.
    """
    q = np.asarray(q, dtype=complex)
    out = []
    for i in range(len(q)):
        out.append((f"q{i}", q[i], True))
        for k in range(i + 1, len(q)):
            out.append((f"q{i}-q{k}", q[i] - q[k], False))
            out.append((f"q{i}+q{k}", q[i] + q[k], False))
    return out


def check_state(params: ModelParams, q, margin=None) -> None:
    """Raise :class:`DomainError` unless ``q`` is admissible.

    Pair differences and sums must avoid the lattice and every ``q_i`` must
    avoid the half-lattice (so that ``q_i + omega_a`` avoids the lattice).
    """
    q = np.asarray(q, dtype=complex)
    if len(q) != params.n:
        raise ValueError(f"expected {params.n} positions, got {len(q)}")
    for name, val, half in state_arguments(q):
        el.check_off_lattice(params.ctx, name, val, half=half, margin=margin)


def _wp(ctx, z, d=0):
    return complex(el.weierstrass_p(ctx, z, d))


def _wps(ctx, weights, z, d=0):
    return complex(el.wp_shifted_sum(ctx, weights, z, d))


def hamiltonian(params: ModelParams, state: PhaseState) -> complex:
    """``H = sum p^2/2 - g^2 sum_{i<j} (wp(q_ij) + wp(q+_ij)) - 1/2 sum_a sum_k nu_a^2 wp(q_k + omega_a)``."""
    ctx, g = params.ctx, params.g
    q, p = state.q, state.p
    check_state(params, q)
    nu2 = np.array(params.nu) ** 2
    H = 0.5 * np.sum(p * p)
    for i in range(params.n):
        H -= 0.5 * _wps(ctx, nu2, q[i])
        for j in range(i + 1, params.n):
            H -= g * g * (_wp(ctx, q[i] - q[j]) + _wp(ctx, q[i] + q[j]))
    return complex(H)


def forces(params: ModelParams, q) -> np.ndarray:
    """``pdot`` as a function of positions alone."""
    ctx, g = params.ctx, params.g
    q = np.asarray(q, dtype=complex)
    check_state(params, q)
    n = params.n
    nu2 = np.array(params.nu) ** 2
    out = 0.5 * np.asarray(el.wp_shifted_sum(ctx, nu2, q, 1), dtype=complex).reshape(n)
    if n > 1:
        i, k = np.nonzero(~np.eye(n, dtype=bool))
        pair = np.asarray(el.weierstrass_p(ctx, np.concatenate([q[i] - q[k], q[i] + q[k]]), 1))
        m = len(i)
        np.add.at(out, i, g * g * (pair[:m] + pair[m:]))
    return out


def equations_of_motion(params: ModelParams, state: PhaseState):
    """Return ``(qdot, pdot)`` with ``qdot = p``."""
    return state.p.copy(), forces(params, state.q)


@dataclass(frozen=True)
class BlockLax:
    """A 2n x 2n matrix viewed as a 2 x 2 array of n x n blocks."""

    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2

    def block(self, a: int, b: int) -> np.ndarray:
        """Block ``L^{ab}`` with ``a, b`` in ``{1, 2}``."""
        n = self.n
        return self.matrix[(a - 1) * n:a * n, (b - 1) * n:b * n]

    @classmethod
    def from_blocks(cls, b11, b12, b21, b22) -> "BlockLax":
        return cls(np.block([[b11, b12], [b21, b22]]))


def _check_z(ctx, z):
    el.check_off_lattice(ctx, "z", z, half=True)


def diagonal_a(params: ModelParams, q) -> np.ndarray:
    """``a_i = g sum_{k != i} (wp(q_ik) + wp(q+_ik)) + 1/2 sum_a nu_a wp(q_i + omega_a)``.

    The boundary couplings enter to the first power.
    """
    ctx, g = params.ctx, params.g
    nu = np.array(params.nu)
    a = np.zeros(params.n, dtype=complex)
    for i in range(params.n):
        a[i] = 0.5 * _wps(ctx, nu, q[i])
        for k in range(params.n):
            if k != i:
                a[i] += g * (_wp(ctx, q[i] - q[k]) + _wp(ctx, q[i] + q[k]))
    return a


def _entries(params):
    """The functions ``phi``, ``f`` and ``v`` (with ``v'`` as ``deriv=1``) of the Lax pair."""
    ctx, cs = params.ctx, params.couplings
    phi = lambda s, u: complex(el.kronecker_phi(ctx, s, u))
    f = lambda s, u: complex(el.kron_f(ctx, s, u))
    v = lambda s, u, d=0: complex(el.v_pair(ctx, cs, "nu", s, u, d))
    return phi, f, v


def build_lax(params: ModelParams, state: PhaseState, z):
    """The Lax pair ``(L(z), M(z))`` as :class:`BlockLax` values.

    Parameters
    ----------
    params : ModelParams
    state : PhaseState
    z : complex
        Spectral parameter, off the half-lattice.

    Returns
    -------
    (BlockLax, BlockLax)
    """
    ctx, g, n = params.ctx, params.g, params.n
    q, p = state.q, state.p
    check_state(params, q)
    _check_z(ctx, z)
    phi, f, v = _entries(params)
    a = diagonal_a(params, q)
    L = [[np.zeros((n, n), dtype=complex) for _ in range(2)] for _ in range(2)]
    M = [[np.zeros((n, n), dtype=complex) for _ in range(2)] for _ in range(2)]
    for i in range(n):
        L[0][0][i, i] = p[i]
        L[0][1][i, i] = v(z, q[i])
        L[1][0][i, i] = -v(-z, q[i])
        L[1][1][i, i] = -p[i]
        M[0][0][i, i] = a[i]
        M[0][1][i, i] = 0.5 * v(z, q[i], 1)
        M[1][0][i, i] = 0.5 * v(-z, q[i], 1)
        M[1][1][i, i] = a[i]
        for j in range(n):
            if i == j:
                continue
            qm, qp = q[i] - q[j], q[i] + q[j]
            L[0][0][i, j] = g * phi(z, qm)
            L[0][1][i, j] = g * phi(z, qp)
            L[1][0][i, j] = -g * phi(-z, qp)
            L[1][1][i, j] = -g * phi(-z, qm)
            M[0][0][i, j] = g * f(z, qm)
            M[0][1][i, j] = g * f(z, qp)
            M[1][0][i, j] = g * f(-z, qp)
            M[1][1][i, j] = g * f(-z, qm)
    return BlockLax.from_blocks(*L[0], *L[1]), BlockLax.from_blocks(*M[0], *M[1])


def lax_time_derivative(params: ModelParams, state: PhaseState, z) -> BlockLax:
    """Analytic ``dL/dt`` by the chain rule along the equations of motion.

    ``d phi(z, u)/du = f(z, u)`` and ``d v(z, u)/du = v'(z, u)``.
    """
    ctx, g, n = params.ctx, params.g, params.n
    q, p = state.q, state.p
    check_state(params, q)
    _check_z(ctx, z)
    _, f, v = _entries(params)
    pdot = forces(params, q)
    D = [[np.zeros((n, n), dtype=complex) for _ in range(2)] for _ in range(2)]
    for i in range(n):
        D[0][0][i, i] = pdot[i]
        D[0][1][i, i] = v(z, q[i], 1) * p[i]
        D[1][0][i, i] = -v(-z, q[i], 1) * p[i]
        D[1][1][i, i] = -pdot[i]
        for j in range(n):
            if i == j:
                continue
            qm, qp = q[i] - q[j], q[i] + q[j]
            dm, dp = p[i] - p[j], p[i] + p[j]
            D[0][0][i, j] = g * f(z, qm) * dm
            D[0][1][i, j] = g * f(z, qp) * dp
            D[1][0][i, j] = -g * f(-z, qp) * dp
            D[1][1][i, j] = -g * f(-z, qm) * dm
    return BlockLax.from_blocks(*D[0], *D[1])


def lax_residual(params: ModelParams, state: PhaseState, z) -> float:
    """``max |(dL/dt - [L, M])_ab|``."""
    return lax_check(params, state, z).residual


def lax_check(params: ModelParams, state: PhaseState, z, tol: float = 1e-8, id: str = "lax-scalar") -> CheckRow:
    """Lax-equation residual as a report row.

    The scale is the largest entry of ``dL/dt``, ``L M`` and ``M L``.
    """
    L, M = build_lax(params, state, z)
    Ld = lax_time_derivative(params, state, z).matrix
    LM, ML = L.matrix @ M.matrix, M.matrix @ L.matrix
    res = float(np.max(np.abs(Ld - LM + ML)))
    scale = float(max(np.max(np.abs(Ld)), np.max(np.abs(LM)), np.max(np.abs(ML))))
    return CheckRow(id, res, scale, tol)


def trace_identity_rhs(params: ModelParams, state: PhaseState, z) -> complex:
    """``H + n(n-1) g^2 wp(z) + n/2 sum_a nubar_a^2 wp(z + omega_a)``, which equals ``tr L(z)^2 / 4``."""
    ctx, n, g = params.ctx, params.n, params.g
    nb2 = np.array(params.nu_bar) ** 2
    return hamiltonian(params, state) + n * (n - 1) * g * g * _wp(ctx, z) + 0.5 * n * _wps(ctx, nb2, z)


def hamiltonian_from_trace(params: ModelParams, state: PhaseState, z) -> complex:
    """``H`` recovered from ``tr L(z)^2 / 4`` minus the ``z``-dependent constants."""
    ctx, n, g = params.ctx, params.n, params.g
    L, _ = build_lax(params, state, z)
    nb2 = np.array(params.nu_bar) ** 2
    t2 = complex(np.trace(L.matrix @ L.matrix))
    return 0.25 * t2 - n * (n - 1) * g * g * _wp(ctx, z) - 0.5 * n * _wps(ctx, nb2, z)


def random_state(params: ModelParams, rng: np.random.Generator, p_scale: float = 1.0, max_tries: int = 1000):
    """A seeded admissible state: positions ``a + b tau`` with ``a, b`` in ``[0.1, 0.9]``."""
    from .errors import SamplerError

    ctx = params.ctx
    for _ in range(max_tries):
        q = rng.uniform(0.1, 0.9, params.n) + rng.uniform(0.1, 0.9, params.n) * ctx.tau
        try:
            check_state(params, q)
        except DomainError:
            continue
        p = p_scale * (rng.normal(size=params.n) + 1j * rng.normal(size=params.n))
        return PhaseState(q, p)
    raise SamplerError(f"no admissible state for n={params.n} in {max_tries} tries")
