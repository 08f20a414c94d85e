"""Sampled verification of the functional identities of the elliptic layer."""
from __future__ import annotations

import numpy as np

from . import elliptic as el
from .elliptic import CouplingSet, EllipticContext
from .reports import Report, compare
from .sampling import Sampler

DEFAULT_TOL = 1e-9


def identity_suite_elliptic(ctx: EllipticContext, cs: CouplingSet, seed: int = 0, n_samples: int = 100,
                            tol: float = DEFAULT_TOL) -> Report:
    """Check every identity the Lax proofs rely on at seeded random points.

    Each row holds the worst residual over ``n_samples`` admissible draws and
    the largest individual term magnitude as its scale.

    Parameters
    ----------
    ctx : EllipticContext
    cs : CouplingSet
        Supplies ``nu`` for the v-function identities.
    seed : int
    n_samples : int
        Must be at least 1.
    tol : float
        Relative tolerance applied to every row.

    Returns
    -------
    Report
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    smp = Sampler(ctx, seed)
    nu = np.array(cs.nu)
    nub = np.array(cs.nu_bar)
    om = ctx.omegas
    dw = el.DTAU_OMEGA

    phi = lambda z, u: np.asarray(el.kronecker_phi(ctx, z, u))
    f = lambda z, u: np.asarray(el.kron_f(ctx, z, u))
    e1 = lambda z: np.asarray(el.eisenstein(ctx, 1, z))
    e2 = lambda z: np.asarray(el.eisenstein(ctx, 2, z))
    wp = lambda z, d=0: np.asarray(el.weierstrass_p(ctx, z, d))
    v = lambda z, u, d=0: np.asarray(el.v_pair(ctx, cs, "nu", z, u, d))
    vb = lambda z, u: np.asarray(el.v_pair(ctx, cs, "nu_bar", z, u))

    rep = Report("elliptic identities")
    add = lambda *a, **k: rep.add(compare(*a, tol=tol, **k))

    # Fay and its corollaries
    s = smp.draw_many(["z1", "u1", "z2", "u2"], n_samples)
    z1, u1, z2, u2 = s["z1"], s["u1"], s["z2"], s["u2"]
    t = [phi(z1, u1) * phi(z2, u2), phi(z1, u1 + u2) * phi(z2 - z1, u2), phi(z2, u1 + u2) * phi(z1 - z2, u1)]
    add("fay", t[0], t[1] + t[2], terms=t)
    t = [phi(z1, u1) * f(z2, u2), f(z1, u1) * phi(z2, u2),
         phi(z1, u1 + u2) * f(z2 - z1, u2), phi(z2, u1 + u2) * f(z1 - z2, u1)]
    add("a071", t[0] - t[1], t[2] - t[3], terms=t)

    s = smp.draw_many(["z", "u1", "u2"], n_samples, extra=lambda c: [c["z"] + c["u1"] + c["u2"]])
    z, u1, u2 = s["z"], s["u1"], s["u2"]
    lhs = phi(z, u1) * phi(z, u2)
    bracket = e1(z) + e1(u1) + e1(u2) - e1(z + u1 + u2)
    add("a08", lhs, phi(z, u1 + u2) * bracket, terms=[phi(z, u1 + u2) * e1(z + u1 + u2)])
    t = [phi(z, u1) * f(z, u2), phi(z, u2) * f(z, u1)]
    lhs = t[0] - t[1]
    p12 = phi(z, u1 + u2)
    r_wp = p12 * (wp(u1) - wp(u2))
    r_e2 = p12 * (e2(u1) - e2(u2))
    r_f0 = p12 * (f(0 * z, u2) - f(0 * z, u1))
    res = max(np.max(np.abs(lhs - r_wp)), np.max(np.abs(lhs - r_e2)), np.max(np.abs(lhs - r_f0)))
    row = compare("a09", lhs, r_wp, tol=tol, terms=t + [r_e2, r_f0])
    row.residual = float(res)
    rep.add(row)

    s = smp.draw_many(["z", "u"], n_samples)
    z, u = s["z"], s["u"]
    lhs = phi(z, u) * phi(z, -u)
    add("a10", lhs, wp(z) - wp(u), terms=[wp(z), wp(u)])
    row = compare("a10/E2", lhs, e2(z) - e2(u), tol=tol, terms=[e2(z), e2(u)])
    rep.add(row)
    t = [phi(z, u) * f(z, -u), phi(z, -u) * f(z, u)]
    add("a11", t[0] - t[1], wp(u, 1), terms=t)
    add("a062", f(0 * z, u), -e2(u))

    # quasi-periodicity
    add("a0621", np.concatenate([phi(z + 1, u), phi(z + ctx.tau, u)]),
        np.concatenate([phi(z, u), np.exp(-2j * np.pi * u) * phi(z, u)]))
    lhs, rhs = [], []
    for a in range(1, 4):
        for sgn in (1, -1):
            lhs.append(phi(z + sgn * 2 * om[a], u))
            rhs.append(np.exp(-sgn * 4j * np.pi * dw[a] * u) * phi(z, u))
    add("a0622", np.concatenate(lhs), np.concatenate(rhs))
    th = lambda x: np.asarray(el.theta_jacobi(ctx, 1, x))
    # a = 0 would read theta(z) = -theta(z); the relation is for a != 0 only
    lhs = np.concatenate([th(z + 2 * om[a]) for a in range(1, 4)])
    rhs = np.concatenate([-np.exp(-4j * np.pi * (z + om[a]) * dw[a]) * th(z) for a in range(1, 4)])
    add("a0623", lhs, rhs)
    lhs = np.concatenate([th(z + om[a]) for a in range(1, 4)])
    rhs = np.concatenate([-np.exp(-4j * np.pi * z * dw[a]) * th(z - om[a]) for a in range(1, 4)])
    add("a0624", lhs, rhs)
    lhs = np.concatenate([e2(z + 2 * om[a]) for a in range(4)] + [e1(z + 2 * om[a]) for a in range(4)])
    rhs = np.concatenate([e2(z) for a in range(4)] + [e1(z) - 4j * np.pi * dw[a] for a in range(4)])
    add("a0625", lhs, rhs)
    add("a0626", np.array([e1(om[a]) for a in range(1, 4)]), np.array([-2j * np.pi * dw[a] for a in range(1, 4)]))

    # half-period shifted functions
    lhs = np.stack([el.phi_shifted(ctx, a, 2 * z, u + om[a]) for a in range(4)])
    rhs = el.DUAL_MATRIX @ np.stack([el.phi_shifted(ctx, a, 2 * u, z + om[a]) for a in range(4)])
    add("w215", lhs, rhs)
    add("w216", sum(wp(z + om[a]) for a in range(4)), 4 * wp(2 * z), terms=[wp(z + om[a]) for a in range(4)])
    t1p = ctx.theta1_d1_0
    lhs = np.stack([el.phi_shifted(ctx, k, z, u + om[k]) for k in range(4)])
    rhs = np.stack([t1p * np.asarray(el.theta_jacobi(ctx, k + 1, z + u))
                    / (th(z) * np.asarray(el.theta_jacobi(ctx, k + 1, u))) for k in range(4)])
    add("w211", lhs, rhs)

    # v-function identities
    wps = lambda w, x, d=0: np.asarray(el.wp_shifted_sum(ctx, w, x, d))
    vzu, vzmu = v(z, u), v(z, -u)
    rhs = wps(nub**2, z) - wps(nu**2, u)
    add("q415", vzu * vzmu, rhs, terms=[wps(nub**2, z), wps(nu**2, u)])
    add("q419", vzu, vb(u, z))
    add("q419a", v(z, u) * v(-z, u), -rhs, terms=[vzu * vzmu])
    t = [vzu * v(z, -u, 1), vzmu * v(z, u, 1)]
    add("q420", t[0] - t[1], wps(nu**2, u, 1), terms=t)
    v0 = v(0 * u, u, 1)
    add("q441", v0, -wps(nu, u) + ctx.e2_shift * np.sum(nu), terms=[wps(nu, u)])

    s = smp.draw_many(["x", "y", "u", "w"], n_samples)
    x, y, u, w = s["x"], s["y"], s["u"], s["w"]
    t = [v(x, u) * phi(x + y, w - u), v(x, w) * phi(x - y, u - w), v(y, -u) * phi(x + y, u + w)]
    rhs = v(y, w) * phi(x - y, u + w)
    add("hident1", sum(t), rhs, terms=t)

    s = smp.draw_many(["z", "u", "w"], n_samples)
    z, u, w = s["z"], s["u"], s["w"]
    lhs = phi(z, u - w) * (v(0 * w, w, 1) - v(0 * u, u, 1))
    t = [2 * v(-z, w) * f(z, u + w), 2 * v(z, u) * f(-z, u + w), v(-z, w, 1) * phi(z, u + w),
         v(z, u, 1) * phi(-z, u + w)]
    add("hident3", lhs, sum(t), terms=t)

    s = smp.draw_many(["z", "qi", "qj"], n_samples)
    z, qi, qj = s["z"], s["qi"], s["qj"]
    qp, qm = qi + qj, qi - qj
    t = [phi(z, qp) * v(z, -qj, 1), v(z, qi, 1) * phi(z, -qp), 2 * v(z, qi) * f(z, -qp), 2 * f(z, qp) * v(z, -qj)]
    rhs = phi(z, qm) * (v(0 * qj, qj, 1) - v(0 * qi, qi, 1))
    add("q440", t[0] - t[1] + t[2] - t[3], rhs, terms=t)
    return rep
