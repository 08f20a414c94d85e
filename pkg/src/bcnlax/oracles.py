"""Independent reference evaluations used to cross-check the main implementation.

Nothing here calls the theta series of :mod:`bcnlax.elliptic`: the theta
functions come from the Jacobi triple product and ``wp`` from a lattice sum.
"""
from __future__ import annotations

import numpy as np


def theta_product(tau, k: int, z, terms: int = 80) -> complex:
    """Jacobi ``theta_k(z | tau)`` from its infinite product, truncated at ``terms`` factors."""
    tau, z = complex(tau), complex(z)
    q = np.exp(1j * np.pi * tau)
    n = np.arange(1, terms + 1)
    c = np.cos(2 * np.pi * z)
    base = np.prod(1 - q ** (2 * n))
    if k == 1:
        return complex(2 * np.exp(0.25j * np.pi * tau) * np.sin(np.pi * z) * base
                       * np.prod(1 - 2 * q ** (2 * n) * c + q ** (4 * n)))
    if k == 2:
        return complex(2 * np.exp(0.25j * np.pi * tau) * np.cos(np.pi * z) * base
                       * np.prod(1 + 2 * q ** (2 * n) * c + q ** (4 * n)))
    if k == 3:
        return complex(base * np.prod(1 + 2 * q ** (2 * n - 1) * c + q ** (4 * n - 2)))
    if k == 4:
        return complex(base * np.prod(1 - 2 * q ** (2 * n - 1) * c + q ** (4 * n - 2)))
    raise ValueError("theta index must be 1..4")


def wp_lattice(tau, z, rows: int = 40) -> complex:
    """Weierstrass ``wp`` from the lattice sum over ``Z + tau Z``.

    The absolutely convergent sum ``1/z^2 + sum' (1/(z-w)^2 - 1/w^2)`` is
    ordered by rows ``w = m + n tau`` of fixed ``n``; each row is summed in
    closed form (``sum_m 1/(x-m)^2 = pi^2 / sin^2(pi x)``, and
    ``sum_{m != 0} 1/m^2 = pi^2/3``) and rows ``|n| <= rows`` are kept, which
    converges geometrically.
    """
    tau, z = complex(tau), complex(z)
    total = np.pi**2 / np.sin(np.pi * z) ** 2 - np.pi**2 / 3
    for n in range(1, rows + 1):
        for s in (1, -1):
            total += np.pi**2 / np.sin(np.pi * (z - s * n * tau)) ** 2 - np.pi**2 / np.sin(np.pi * s * n * tau) ** 2
    return complex(total)


def wp_lattice_truncated(tau, z, N: int) -> complex:
    """The plain square truncation ``|m|, |n| <= N`` of the lattice sum (error ``O(1/N)``)."""
    tau, z = complex(tau), complex(z)
    m, n = np.meshgrid(np.arange(-N, N + 1), np.arange(-N, N + 1))
    w = (m + n * tau).ravel()
    w = w[w != 0]
    return complex(1 / z**2 + np.sum(1 / (z - w) ** 2 - 1 / w**2))


def central_difference(f, z, h: float = 2e-3):
    """Central difference ``f'(z)`` along the real direction.

    The fourth-order five-point stencil at steps ``h`` and ``h/2`` is combined
    by one Richardson step, giving a sixth-order estimate.
    """
    def d(s):
        return (-np.asarray(f(z + 2 * s)) + 8 * np.asarray(f(z + s)) - 8 * np.asarray(f(z - s))
                + np.asarray(f(z - 2 * s))) / (12 * s)

    return (16 * d(h / 2) - d(h)) / 15


def fd_relative_error(analytic, f, z, h: float = 2e-3) -> float:
    """``|analytic - fd| / max(1, |analytic|)`` for one derivative."""
    a = np.asarray(analytic)
    d = np.asarray(central_difference(f, z, h))
    return float(np.max(np.abs(a - d)) / max(1.0, float(np.max(np.abs(a)))))
