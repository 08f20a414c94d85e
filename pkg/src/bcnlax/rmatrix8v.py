"""Baxter's 8-vertex R-matrix, the elliptic K-matrix and their tensor embeddings.

Two-level sites are numbered from 0 and site 0 is the leftmost tensor factor,
so the basis state ``|b_0 b_1 ... b_{n-1}>`` has index ``sum_k b_k 2^(n-1-k)``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import elliptic as el
from .elliptic import EllipticContext

MAX_SITES = 8

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli(a: int) -> np.ndarray:
    """``sigma_a`` for ``a`` in 0..4, with ``sigma_4 = sigma_0``."""
    if not 0 <= a <= 4:
        raise IndexError(f"Pauli index {a} out of range 0..4")
    return SIGMA[a % 4].copy()


def pauli_pair(a: int) -> np.ndarray:
    """``sigma_a (x) sigma_a`` as a 4x4 matrix."""
    s = pauli(a)
    return np.kron(s, s)


_PAIR_BASIS = [[np.kron(sa, sb) for sb in SIGMA] for sa in SIGMA]

SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]


def swap_factors(m: np.ndarray) -> np.ndarray:
    """``P m P`` with ``P`` the flip of the two tensor factors."""
    return SWAP @ m @ SWAP


@dataclass(frozen=True)
class DenseOperator:
    """A dense operator on ``(C^2)^{(x) n_sites}``."""

    n_sites: int
    data: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_sites <= MAX_SITES:
            raise ValueError(f"n_sites must be in 1..{MAX_SITES}, got {self.n_sites}")
        data = np.asarray(self.data, dtype=complex)
        dim = 2 ** self.n_sites
        if data.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got shape {data.shape}")
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return 2 ** self.n_sites

    @classmethod
    def zero(cls, n_sites):
        return cls(n_sites, np.zeros((2 ** n_sites, 2 ** n_sites), dtype=complex))

    @classmethod
    def identity(cls, n_sites, value=1.0):
        return cls(n_sites, value * np.eye(2 ** n_sites, dtype=complex))

    def _other(self, other):
        if isinstance(other, DenseOperator):
            if other.n_sites != self.n_sites:
                raise ValueError(f"site mismatch: {self.n_sites} vs {other.n_sites}")
            return other.data
        return other * np.eye(self.dim)

    def __add__(self, other):
        return DenseOperator(self.n_sites, self.data + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return DenseOperator(self.n_sites, self.data - self._other(other))

    def __rsub__(self, other):
        return DenseOperator(self.n_sites, self._other(other) - self.data)

    def __neg__(self):
        return DenseOperator(self.n_sites, -self.data)

    def __mul__(self, alpha):
        if isinstance(alpha, DenseOperator):
            raise TypeError("use @ for operator products")
        return DenseOperator(self.n_sites, alpha * self.data)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return DenseOperator(self.n_sites, self.data @ self._other(other))

    def norm(self) -> float:
        """Largest entry magnitude."""
        return float(np.max(np.abs(self.data)))


def _single_site(op, i, n):
    return np.kron(np.kron(np.eye(2 ** i), op), np.eye(2 ** (n - i - 1)))


@functools.lru_cache(maxsize=None)
def _pauli_string(a, b, i, j, n):
    m = _single_site(SIGMA[a], i, n) @ _single_site(SIGMA[b], j, n)
    m.setflags(write=False)
    return m


def embed(op, sites, n: int) -> DenseOperator:
    """Embed a one- or two-site operator into ``n`` sites.

    Two-site operators are expanded in the ``sigma_a (x) sigma_b`` basis and the
    first tensor factor is placed on ``sites[0]``, so that
    ``embed(R, (i, j)) == embed(swap_factors(R), (j, i))``.
    """
    op = np.asarray(op, dtype=complex)
    sites = tuple(int(s) for s in sites)
    if not 1 <= n <= MAX_SITES:
        raise ValueError(f"n must be in 1..{MAX_SITES}, got {n}")
    if any(not 0 <= s < n for s in sites):
        raise IndexError(f"sites {sites} out of range for n={n}")
    if op.shape == (2, 2) and len(sites) == 1:
        return DenseOperator(n, _single_site(op, sites[0], n))
    if op.shape == (4, 4) and len(sites) == 2:
        i, j = sites
        if i == j:
            raise IndexError(f"two-site embedding needs distinct sites, got {sites}")
        out = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for a in range(4):
            for b in range(4):
                c = np.trace(_PAIR_BASIS[a][b].conj().T @ op) / 4
                if c != 0:
                    out += c * _pauli_string(a, b, i, j, n)
        return DenseOperator(n, out)
    raise ValueError(f"cannot embed a {op.shape} matrix on sites {sites}")


# ---------------------------------------------------------------------------
# R-matrix and K-matrix


def _second_args(ctx, hbar):
    return [ctx.omega(k) + hbar / 2 for k in range(4)]


def _check_r_args(ctx, hbar, u):
    # omega_k + hbar/2 hits the lattice exactly when hbar does, at half the
    # distance; the inner evaluation uses the halved margin accordingly
    el.check_off_lattice(ctx, "u", u)
    el.check_off_lattice(ctx, "hbar", hbar)
    return ctx.with_margin(ctx.lattice_margin / 2)


def baxter_r(ctx: EllipticContext, hbar, u) -> np.ndarray:
    """``R^hbar(u) = 1/2 sum_k phi_k(u, omega_k + hbar/2) sigma_{4-k} (x) sigma_{4-k}``."""
    inner = _check_r_args(ctx, hbar, u)
    out = np.zeros((4, 4), dtype=complex)
    for k, v in enumerate(_second_args(ctx, hbar)):
        out += 0.5 * el.phi_shifted(inner, k, u, v) * pauli_pair(4 - k)
    return out


def baxter_f(ctx: EllipticContext, hbar, u) -> np.ndarray:
    """``F^hbar(u) = d/du R^hbar(u)``."""
    inner = _check_r_args(ctx, hbar, u)
    out = np.zeros((4, 4), dtype=complex)
    for k, v in enumerate(_second_args(ctx, hbar)):
        out += 0.5 * el.phi_shifted_dz(inner, k, u, v) * pauli_pair(4 - k)
    return out


def _k_terms(ctx, hbar, z):
    for k in range(4):
        w = ctx.omega(k)
        el.check_off_lattice(ctx, "z", z + w)
        el.check_off_lattice(ctx, "hbar", hbar + w)
        yield k, w, np.exp(2j * np.pi * (z + hbar + w) * el.DTAU_OMEGA[k])


def k_matrix8v(ctx: EllipticContext, nu, hbar, z) -> np.ndarray:
    """``K~^hbar(z) = sum_k nu_k exp(2 pi i (z + hbar + omega_k) dtau omega_k)
    phi(z + omega_k, hbar + omega_k) sigma_{4-k}``.

    The matrix is symmetric under ``hbar <-> z``; the same matrix serves as
    both ``K`` and ``K~`` in this realization.
    """
    out = np.zeros((2, 2), dtype=complex)
    for k, w, pre in _k_terms(ctx, hbar, z):
        out += nu[k] * pre * el.kronecker_phi(ctx, z + w, hbar + w) * pauli(4 - k)
    return out


def k_matrix8v_dz(ctx: EllipticContext, nu, hbar, z) -> np.ndarray:
    """Derivative of :func:`k_matrix8v` in ``z``."""
    out = np.zeros((2, 2), dtype=complex)
    for k, w, pre in _k_terms(ctx, hbar, z):
        d = el.DTAU_OMEGA[k]
        val = 2j * np.pi * d * el.kronecker_phi(ctx, z + w, hbar + w) + el.kron_f(ctx, hbar + w, z + w)
        out += nu[k] * pre * val * pauli(4 - k)
    return out


def matrix_derivative(ctx: EllipticContext, kind: str, hbar, x, nu=None) -> np.ndarray:
    """Analytic positional derivative: ``F_of_R`` gives ``d/du R^hbar(u)`` at ``u = x``,
    ``Y_of_K`` gives ``d/dz K~^hbar(z)`` at ``z = x``."""
    if kind == "F_of_R":
        return baxter_f(ctx, hbar, x)
    if kind == "Y_of_K":
        if nu is None:
            raise ValueError("Y_of_K needs the coupling vector nu")
        return k_matrix8v_dz(ctx, nu, hbar, x)
    raise ValueError(f"unknown derivative kind {kind!r}")


def _e1_bracket(ctx, x, a):
    w = ctx.omega(a)
    return el.eisenstein(ctx, 1, x + w) - el.eisenstein(ctx, 1, x) - el.eisenstein(ctx, 1, w)


def _f0_closed(ctx, x):
    c = np.empty(4, dtype=complex)
    c[0] = -0.5 * el.eisenstein(ctx, 2, x)
    for a in range(1, 4):
        c[a] = 0.5 * el.phi_shifted(ctx, a, x, ctx.omega(a)) * _e1_bracket(ctx, x, a)
    return c


# circle used to evaluate F0 across its removable singularities at half-periods
_REMOVABLE_RADIUS = 0.1
_REMOVABLE_NODES = 64


def f0_coefficients(ctx: EllipticContext, x) -> np.ndarray:
    """Coefficients ``c_a`` with ``F0(x) = sum_a c_a sigma_{4-a} (x) sigma_{4-a}``.

    ``c_0 = -E_2(x)/2`` and ``c_a = phi_a(x, omega_a) (E_1(x + omega_a) - E_1(x) - E_1(omega_a)) / 2``.
    These have removable singularities at the half-periods ``omega_1..omega_3``
    (the lattice itself holds genuine poles).  Within ``_REMOVABLE_RADIUS`` of
    a half-period the value is the mean over a circle around ``x`` of radius
    ``2 * _REMOVABLE_RADIUS``, shrunk if needed to half the distance to the
    lattice so that no pole is enclosed.
    """
    el.check_off_lattice(ctx, "x", x)
    near = min(float(el.lattice_distance(ctx, x - ctx.omega(a))) for a in range(1, 4))
    if near >= _REMOVABLE_RADIUS:
        return _f0_closed(ctx, x)
    radius = min(2 * _REMOVABLE_RADIUS, 0.5 * float(el.lattice_distance(ctx, x)))
    nodes = x + radius * np.exp(2j * np.pi * np.arange(_REMOVABLE_NODES) / _REMOVABLE_NODES)
    return sum(_f0_closed(ctx, u) for u in nodes) / _REMOVABLE_NODES


def f0_matrix(ctx: EllipticContext, x) -> np.ndarray:
    """``F0(x) = d/dx R^hbar(x) at hbar = 0``, a 4x4 matrix."""
    c = f0_coefficients(ctx, x)
    return sum(c[a] * pauli_pair(4 - a) for a in range(4))


def y0_coefficients(ctx: EllipticContext, nu, x) -> np.ndarray:
    """Coefficients ``d_a`` with ``Y0(x) = sum_a d_a sigma_{4-a}``; poles at the half-periods."""
    el.check_off_lattice(ctx, "x", x, half=True)
    d = np.empty(4, dtype=complex)
    d[0] = -nu[0] * el.eisenstein(ctx, 2, x)
    for a in range(1, 4):
        w = ctx.omega(a)
        d[a] = -nu[a] * el.phi_shifted(ctx, a, x - w, w) * _e1_bracket(ctx, x, a)
    return d


def y0_matrix(ctx: EllipticContext, nu, x) -> np.ndarray:
    """``Y0(x) = d/dx K~^hbar(x) at hbar = 0``, a 2x2 matrix."""
    d = y0_coefficients(ctx, nu, x)
    return sum(d[a] * pauli(4 - a) for a in range(4))


def zero_planck_limits(ctx: EllipticContext, nu, x):
    """The ``hbar -> 0`` derivatives ``(F0(x), Y0(x))``.

    ``F0`` is 4x4 and ``Y0`` is 2x2; both are finite although ``R`` and ``K~``
    have a simple pole at ``hbar = 0``.
    """
    return f0_matrix(ctx, x), y0_matrix(ctx, nu, x)


# ---------------------------------------------------------------------------
# relation suite


def _worst(rows):
    return max(rows, key=lambda r: r.relative)


def suite_8v(ctx: EllipticContext, nu, seed: int = 0, n_samples: int = 50, tol: float = 1e-9):
    """Verify the R- and K-matrix relations with dense matrices.

    Two-site relations use ``R^mu_ij = R^mu(q_i - q_j)``,
    ``R~^mu_ij = R^mu(q_i + q_j)`` and ``K~^mu_i = K~^mu(q_i)``; the
    associative Yang-Baxter equation is checked on three sites.  Each row
    keeps the worst of ``n_samples`` seeded draws.

    Returns
    -------
    Report
    """
    from .reports import Report, compare
    from .sampling import Sampler

    nu = tuple(complex(v) for v in nu)
    smp = Sampler(ctx, seed)
    qs, spectral = ["q0", "q1", "q2"], ["z", "w", "h"]
    rows = {}

    def add(id, lhs, rhs, terms=()):
        mats = lambda a: a.data if isinstance(a, DenseOperator) else a
        r = compare(id, mats(lhs), mats(rhs), tol, terms=[mats(t) for t in terms])
        rows.setdefault(id, []).append(r)

    wp = lambda u: el.weierstrass_p(ctx, u)
    wps = lambda u: el.wp_shifted_sum(ctx, np.array(nu) ** 2, u)
    for _ in range(n_samples):
        d = smp.draw(qs + spectral, groups=[qs, spectral])
        q = [d["q0"], d["q1"], d["q2"]]
        z, w, h = d["z"], d["w"], d["h"]

        R = lambda mu, x: baxter_r(ctx, mu, x)
        add("q01", R(h, z) @ swap_factors(R(h, -z)), (wp(h) - wp(z)) * np.eye(4))
        add("q011", R(h, z), -swap_factors(R(-h, -z)))
        Kp, Km = k_matrix8v(ctx, nu, h, z), k_matrix8v(ctx, nu, -h, z)
        add("unitildeK", Kp @ Km, (wps(z) - wps(h)) * np.eye(2))

        n3 = 3
        R3 = lambda mu, a, b: embed(R(mu, q[a] - q[b]), (a, b), n3)
        i, j, k = 0, 1, 2
        t = [R3(w, i, j) @ R3(z - w, i, k), R3(w - z, k, j) @ R3(z, i, j)]
        add("q02", R3(z, i, k) @ R3(w, k, j), t[0] + t[1], t)

        n2 = 2
        Rm = lambda mu: embed(R(mu, q[0] - q[1]), (0, 1), n2)
        Rp = lambda mu: embed(R(mu, q[0] + q[1]), (0, 1), n2)
        Fm = lambda mu: embed(baxter_f(ctx, mu, q[0] - q[1]), (0, 1), n2)
        Fp = lambda mu: embed(baxter_f(ctx, mu, q[0] + q[1]), (0, 1), n2)
        Kt = lambda mu, a: embed(k_matrix8v(ctx, nu, mu, q[a]), (a,), n2)
        Yt = lambda mu, a: embed(k_matrix8v_dz(ctx, nu, mu, q[a]), (a,), n2)
        Y0 = lambda a: embed(y0_matrix(ctx, nu, q[a]), (a,), n2)

        t = [Kt(w, 0) @ Rm(z - w), Rp(w - z) @ Kt(z, 0), Kt(-z, 1) @ Rp(w + z)]
        add("Fourrel", Rm(w + z) @ Kt(w, 1), t[0] + t[1] + t[2], t)
        add("RE", Rm(h) @ Kt(h, 0) @ Rp(h) @ Kt(h, 1), Kt(h, 1) @ Rp(h) @ Kt(h, 0) @ Rm(h))
        t = [Y0(1) @ Rm(z), Rm(z) @ Y0(0), Fp(z) @ Kt(-z, 1), Kt(z, 0) @ Fp(-z), Rp(z) @ Yt(-z, 1),
             Yt(z, 0) @ Rp(-z)]
        add("b30", t[0] - t[1], 2 * t[2] + 2 * t[3] + t[4] + t[5], t)

    rep = Report("8-vertex relations")
    for id in ("q01", "q011", "q02", "unitildeK", "Fourrel", "b30", "RE"):
        rep.add(_worst(rows[id]))
    return rep
