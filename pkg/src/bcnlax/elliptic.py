"""Jacobi theta functions and the elliptic functions built from them.

Everything here is vectorised: arguments may be scalars or numpy arrays and
broadcast against each other.  The lattice is ``Z + tau Z`` and the basic
theta function is ``theta_1`` (odd, with a simple zero at the origin).

Half-period convention::

    omega_0 = 0, omega_1 = 1/2, omega_2 = (1 + tau)/2, omega_3 = tau/2

with ``d omega_a / d tau = 0, 0, 1/2, 1/2``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, SeriesTruncationError

DTAU_OMEGA = (0.0, 0.0, 0.5, 0.5)

# (a, b, sign): theta_k = sign * sum_j exp(pi i tau (j+a)^2 + 2 pi i (j+a)(z+b))
_CHARACTERISTICS = {
    1: (0.5, 0.5, -1.0),
    2: (0.5, 0.0, 1.0),
    3: (0.0, 0.0, 1.0),
    4: (0.0, 0.5, 1.0),
}

# Hadamard-type involution relating the couplings nu and their duals.
DUAL_MATRIX = 0.5 * np.array(
    [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]], dtype=float
)


@dataclass(frozen=True)
class EllipticContext:
    """Modulus and numerical policy for every special-function evaluation.

    Parameters
    ----------
    tau : complex
        Modulus, ``Im(tau) >= 0.05``.
    series_tol : float
        Theta series stop once three consecutive terms fall below
        ``series_tol * (1 + |partial sum|)``.
    max_terms : int
        Hard cap on the number of series terms.
    lattice_margin : float
        Arguments closer than this to a singular set are rejected.
    """

    tau: complex
    series_tol: float = 1e-17
    max_terms: int = 200
    lattice_margin: float = 0.05

    def __post_init__(self):
        tau = complex(self.tau)
        object.__setattr__(self, "tau", tau)
        if not tau.imag >= 0.05:
            raise ValueError(f"Im(tau) must be >= 0.05, got tau={tau}")
        if not self.series_tol > 0:
            raise ValueError("series_tol must be positive")
        if int(self.max_terms) < 8:
            raise ValueError("max_terms must be at least 8")
        if not self.lattice_margin >= 0:
            raise ValueError("lattice_margin must be non-negative")

    @property
    def nome(self) -> complex:
        return complex(np.exp(1j * np.pi * self.tau))

    def with_margin(self, margin: float) -> "EllipticContext":
        return dataclasses.replace(self, lattice_margin=margin)

    def omega(self, a: int) -> complex:
        return half_period(self, a).omega

    @property
    def omegas(self):
        return tuple(self.omega(a) for a in range(4))

    @cached_property
    def theta1_d1_0(self) -> complex:
        """theta_1'(0), summed term by term."""
        return complex(_theta_sums(self, 1, 0.0, (1,))[0])

    @cached_property
    def theta1_d3_0(self) -> complex:
        return complex(_theta_sums(self, 1, 0.0, (3,))[0])

    @cached_property
    def e2_shift(self) -> complex:
        """The constant ``theta'''(0) / (3 theta'(0))`` with ``wp = E2 + e2_shift``."""
        return self.theta1_d3_0 / (3.0 * self.theta1_d1_0)


@dataclass(frozen=True)
class HalfPeriodIndex:
    a: int
    omega: complex
    dtau_omega: float


def half_period(ctx: EllipticContext, a: int) -> HalfPeriodIndex:
    if a not in (0, 1, 2, 3):
        raise ValueError(f"half-period index must be 0..3, got {a}")
    omega = (0.0, 0.5, (1 + ctx.tau) / 2, ctx.tau / 2)[a]
    return HalfPeriodIndex(a, complex(omega), DTAU_OMEGA[a])


# ---------------------------------------------------------------------------
# lattice geometry


def lattice_distance(ctx: EllipticContext, z, half: bool = False):
    """Distance from ``z`` to ``Z + tau Z`` (or to the half-lattice)."""
    z = np.asarray(z, dtype=complex)
    if half:
        return 0.5 * lattice_distance(ctx, 2 * z)
    tau = ctx.tau
    n = np.rint(z.imag / tau.imag)
    r = z - n * tau
    m = np.rint(r.real)
    r = r - m
    best = np.abs(r)
    for dm in (-1, 0, 1):
        for dn in (-1, 0, 1):
            if dm or dn:
                best = np.minimum(best, np.abs(r - dm - dn * tau))
    return best


def check_off_lattice(ctx: EllipticContext, name: str, z, half: bool = False, margin=None):
    margin = ctx.lattice_margin if margin is None else margin
    if margin <= 0:
        return
    d = lattice_distance(ctx, z, half=half)
    if np.any(d < margin):
        bad = np.asarray(z)[d < margin] if np.ndim(z) else z
        raise DomainError(
            f"argument {name} is within {margin} of the {'half-' if half else ''}lattice "
            f"(offending value {np.ravel(bad)[0]!r})",
            argument=name,
        )


# ---------------------------------------------------------------------------
# theta series


def _symmetric_indices():
    yield 0
    j = 1
    while True:
        yield -j
        yield j
        j += 1


def _theta_sums(ctx: EllipticContext, k: int, z, derivs):
    """Return ``[theta_k^{(m)}(z) for m in derivs]`` from the q-series."""
    a, b, sign = _CHARACTERISTICS[k]
    z = np.asarray(z, dtype=complex)
    sums = [np.zeros(z.shape, dtype=complex) for _ in derivs]
    quiet = np.zeros(z.shape, dtype=int)
    tau = ctx.tau
    last = None
    for count, j in enumerate(_symmetric_indices()):
        if count >= ctx.max_terms:
            raise SeriesTruncationError(
                f"theta_{k} series not converged after {ctx.max_terms} terms",
                partial_sum=sign * sums[0],
                last_term=float(np.max(last)) if last is not None else None,
            )
        c = j + a
        base = np.exp(1j * np.pi * tau * c * c + 2j * np.pi * c * (z + b))
        small = np.ones(z.shape, dtype=bool)
        last = np.zeros(z.shape)
        for s, m in zip(sums, derivs):
            term = base * (2j * np.pi * c) ** m
            s += term
            mag = np.abs(term)
            last = np.maximum(last, mag)
            small &= mag <= ctx.series_tol * (1.0 + np.abs(s))
        quiet = np.where(small, quiet + 1, 0)
        if np.all(quiet >= 3):
            break
    return [sign * s for s in sums]


def theta_jacobi(ctx: EllipticContext, k: int, z, deriv: int = 0):
    """Jacobi ``theta_k(z | tau)`` (or its ``deriv``-th z-derivative), k = 1..4."""
    if k not in _CHARACTERISTICS:
        raise ValueError(f"theta index must be 1..4, got {k}")
    out = _theta_sums(ctx, k, z, (deriv,))[0]
    return out if np.ndim(out) else complex(out)


def _theta1(ctx, z, derivs=(0,)):
    return _theta_sums(ctx, 1, z, derivs)


def _scalar(x):
    return x if np.ndim(x) else complex(x)


# ---------------------------------------------------------------------------
# Kronecker function and Eisenstein functions


def kronecker_phi(ctx: EllipticContext, z, u):
    """``phi(z, u) = theta'(0) theta(z+u) / (theta(z) theta(u))``."""
    z, u = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(u, dtype=complex))
    check_off_lattice(ctx, "z", z)
    check_off_lattice(ctx, "u", u)
    t_zu, t_z, t_u = _theta1(ctx, np.stack([z + u, z, u]))[0]
    return _scalar(ctx.theta1_d1_0 * t_zu / (t_z * t_u))


def eisenstein(ctx: EllipticContext, order: int, z):
    """``E_1 = theta'/theta`` or ``E_2 = -E_1'``."""
    z = np.asarray(z, dtype=complex)
    check_off_lattice(ctx, "z", z)
    if order == 1:
        t0, t1 = _theta1(ctx, z, (0, 1))
        return _scalar(t1 / t0)
    if order == 2:
        t0, t1, t2 = _theta1(ctx, z, (0, 1, 2))
        e1 = t1 / t0
        return _scalar(e1 * e1 - t2 / t0)
    raise ValueError("order must be 1 or 2")


def reduce_to_cell(ctx: EllipticContext, z):
    """Translate ``z`` by a lattice vector into the cell centred at the origin."""
    z = np.asarray(z, dtype=complex)
    m = np.round(z.imag / ctx.tau.imag)
    z = z - m * ctx.tau
    return z - np.round(z.real)


def weierstrass_p(ctx: EllipticContext, z, deriv: int = 0):
    """Weierstrass ``wp(z)`` for the lattice ``Z + tau Z`` or its derivative.

    The argument is first reduced to the central cell, which keeps the theta
    series short for arguments far from the origin.
    """
    z = np.asarray(z, dtype=complex)
    check_off_lattice(ctx, "z", z)
    z = reduce_to_cell(ctx, z)
    if deriv == 0:
        t0, t1, t2 = _theta1(ctx, z, (0, 1, 2))
        e1 = t1 / t0
        return _scalar(e1 * e1 - t2 / t0 + ctx.e2_shift)
    if deriv == 1:
        t0, t1, t2, t3 = _theta1(ctx, z, (0, 1, 2, 3))
        e1 = t1 / t0
        r2 = t2 / t0
        # wp' = -E_1''
        return _scalar(-(t3 / t0 - 3.0 * e1 * r2 + 2.0 * e1**3))
    raise ValueError("deriv must be 0 or 1")


def kron_f(ctx: EllipticContext, z, u):
    """``f(z, u) = d phi(z, u) / du``.

    Evaluated as ``theta'(0) (theta'(z+u) theta(u) - theta(z+u) theta'(u)) /
    (theta(z) theta(u)^2)``, which stays regular where ``z + u`` hits the
    lattice.  At ``z == 0`` exactly the limit ``-E_2(u)`` is returned.
    """
    z, u = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(u, dtype=complex))
    at_zero = z == 0
    check_off_lattice(ctx, "u", u)
    if np.any(~at_zero):
        check_off_lattice(ctx, "z", z[~at_zero])
    zz = np.where(at_zero, 0.5, z)
    (t_zu, t_z, t_u), (d_zu, _, d_u), (_, _, dd_u) = _theta1(ctx, np.stack([zz + u, zz, u]), (0, 1, 2))
    out = ctx.theta1_d1_0 * (d_zu * t_u - t_zu * d_u) / (t_z * t_u * t_u)
    if np.any(at_zero):
        e1 = d_u / t_u
        out = np.where(at_zero, -(e1 * e1 - dd_u / t_u), out)
    return _scalar(out)


def kron_f_du(ctx: EllipticContext, z, u):
    """Second u-derivative of ``phi(z, u)``."""
    z, u = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(u, dtype=complex))
    check_off_lattice(ctx, "z", z)
    check_off_lattice(ctx, "u", u)
    (t_zu, t_z, t_u), (d_zu, _, d_u), (dd_zu, _, dd_u) = _theta1(ctx, np.stack([z + u, z, u]), (0, 1, 2))
    # phi'' = theta'(0) [t_zu'' t_u^2 - 2 t_zu' t_u t_u' - t_zu t_u t_u'' + 2 t_zu t_u'^2] / (t_z t_u^3)
    num = dd_zu * t_u * t_u - 2 * d_zu * t_u * d_u - t_zu * t_u * dd_u + 2 * t_zu * d_u * d_u
    out = ctx.theta1_d1_0 * num / (t_z * t_u**3)
    return _scalar(out)


def phi_shifted(ctx: EllipticContext, a, z, u):
    """``phi_a(z, u) = exp(2 pi i z dtau omega_a) phi(z, u)``.

    ``u`` is the full second argument, i.e. the caller passes ``hbar + omega_a``.
    """
    a = a.a if isinstance(a, HalfPeriodIndex) else int(a)
    pre = np.exp(2j * np.pi * np.asarray(z, dtype=complex) * DTAU_OMEGA[a])
    return _scalar(pre * kronecker_phi(ctx, z, u))


def phi_shifted_dz(ctx: EllipticContext, a, z, u):
    """Derivative of ``phi_a(z, u)`` in its first argument."""
    a = a.a if isinstance(a, HalfPeriodIndex) else int(a)
    z = np.asarray(z, dtype=complex)
    d = DTAU_OMEGA[a]
    pre = np.exp(2j * np.pi * z * d)
    out = pre * (2j * np.pi * d * np.asarray(kronecker_phi(ctx, z, u)) + np.asarray(kron_f(ctx, u, z)))
    return _scalar(out)


# ---------------------------------------------------------------------------
# couplings and the v-function


def dual_couplings(nu):
    """``nu_bar = I nu``; the map is an involution."""
    nu = np.asarray(nu, dtype=complex)
    if nu.shape != (4,):
        raise ValueError("expected four couplings")
    return DUAL_MATRIX @ nu


@dataclass(frozen=True)
class CouplingSet:
    g: complex
    nu: tuple

    def __post_init__(self):
        nu = tuple(complex(x) for x in self.nu)
        if len(nu) != 4:
            raise ValueError("expected four couplings nu_0..nu_3")
        object.__setattr__(self, "g", complex(self.g))
        object.__setattr__(self, "nu", nu)

    @property
    def nu_bar(self) -> tuple:
        return tuple(complex(x) for x in dual_couplings(self.nu))

    def couplings(self, which: str):
        if which == "nu":
            return self.nu
        if which == "nu_bar":
            return self.nu_bar
        raise ValueError(f"which must be 'nu' or 'nu_bar', got {which!r}")


def _nu_vector(cs, which):
    if isinstance(cs, CouplingSet):
        return cs.couplings(which)
    nu = tuple(complex(x) for x in cs)
    return tuple(complex(x) for x in dual_couplings(nu)) if which == "nu_bar" else nu


def v_pair(ctx: EllipticContext, cs, which: str, z, u, deriv: int = 0):
    """``v(z, u | nu) = sum_a nu_a exp(4 pi i z dtau omega_a) phi(2z, u + omega_a)``.

    ``deriv=1`` gives the u-derivative ``v'(z, u)``; at ``z == 0`` exactly this
    is the limit ``-sum_a nu_a E_2(u + omega_a)``.  ``cs`` may be a
    :class:`CouplingSet` or a bare 4-vector of couplings.
    """
    nu = _nu_vector(cs, which)
    z, u = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(u, dtype=complex))
    total = np.zeros(z.shape, dtype=complex)
    for a in range(4):
        if nu[a] == 0:
            continue
        pre = np.exp(4j * np.pi * z * DTAU_OMEGA[a])
        shifted = u + ctx.omega(a)
        if deriv == 0:
            total = total + nu[a] * pre * np.asarray(kronecker_phi(ctx, 2 * z, shifted))
        elif deriv == 1:
            total = total + nu[a] * pre * np.asarray(kron_f(ctx, 2 * z, shifted))
        else:
            raise ValueError("deriv must be 0 or 1")
    return _scalar(total)


def v_dz(ctx: EllipticContext, cs, which: str, z, u):
    """Derivative of ``v(z, u)`` in its first argument."""
    nu = _nu_vector(cs, which)
    z, u = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(u, dtype=complex))
    total = np.zeros(z.shape, dtype=complex)
    for a in range(4):
        if nu[a] == 0:
            continue
        d = DTAU_OMEGA[a]
        pre = np.exp(4j * np.pi * z * d)
        shifted = u + ctx.omega(a)
        phi = np.asarray(kronecker_phi(ctx, 2 * z, shifted))
        # d/dz phi(2z, U) = 2 f(U, 2z) by the symmetry of phi
        total = total + nu[a] * pre * (4j * np.pi * d * phi + 2 * np.asarray(kron_f(ctx, shifted, 2 * z)))
    return _scalar(total)


def wp_shifted_sum(ctx: EllipticContext, weights, z, deriv: int = 0):
    """``sum_a weights_a * wp^{(deriv)}(z + omega_a)``."""
    z = np.asarray(z, dtype=complex)
    active = [a for a in range(4) if weights[a] != 0]
    if not active:
        return _scalar(np.zeros(z.shape, dtype=complex))
    shifted = np.stack([z + ctx.omega(a) for a in active])
    vals = np.asarray(weierstrass_p(ctx, shifted, deriv))
    w = np.array([weights[a] for a in active], dtype=complex).reshape((-1,) + (1,) * z.ndim)
    return _scalar(np.sum(w * vals, axis=0))
