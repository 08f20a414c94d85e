"""Seeded verification batteries shared by the command line and the acceptance tests."""
from __future__ import annotations

import time

import numpy as np

from . import dynamics as dy
from .bcn_suite import bcn_relation_suite, MIN_SITES
from .elliptic import CouplingSet, EllipticContext
from .elliptic_suite import identity_suite_elliptic
from .lax_rvalued import (MatrixBackend, OperatorBackend, atype_key_identity, lax_residual_rv,
                          scalar_consistency)
from .lax_scalar import ModelParams, PhaseState, hamiltonian, hamiltonian_from_trace, lax_check, random_state
from .reports import CheckRow, Report
from .rmatrix8v import suite_8v
from .sampling import Sampler

# generic couplings used when none are given
DEFAULT_G = 1.3
DEFAULT_NU = (0.7, 0.2, -0.4, 1.1)


def spectral_points(ctx: EllipticContext, seed: int, count: int):
    """``count`` seeded spectral parameters away from the half-lattice."""
    d = Sampler(ctx, seed).draw_many(["z"], count)
    return [complex(v) for v in d["z"]]


def _worst(id, rows, tol, note=""):
    rows = list(rows)
    if not rows:
        return CheckRow(id, float("nan"), 0.0, tol, skipped=True, note="no samples")
    w = max(rows, key=lambda r: r.relative if np.isfinite(r.relative) else np.inf)
    return CheckRow(id, w.residual, w.scale, tol, note=note or w.note)


def _states(params, seed, count, p_scale=1.0):
    rng = np.random.default_rng(seed)
    return [random_state(params, rng, p_scale) for _ in range(count)]


def verify_elliptic(ctx: EllipticContext, nu, seed: int = 0, samples: int = 100, tol: float = 1e-9) -> Report:
    return identity_suite_elliptic(ctx, CouplingSet(1.0, nu), seed=seed, n_samples=samples, tol=tol)


def verify_operators(ctx: EllipticContext, nu, n: int = 3, seed: int = 0, samples: int = 16,
                     tol: float = 1e-8) -> Report:
    """The operator relation suite at ``n`` sites, plus the four-site relations at ``n = 4`` when ``n < 4``."""
    cs = CouplingSet(1.0, nu)
    rep = bcn_relation_suite(ctx, cs, n=n, seed=seed, n_samples=samples, tol=tol)
    four = [k for k, m in MIN_SITES.items() if m > n]
    if four:
        big = bcn_relation_suite(ctx, cs, n=max(MIN_SITES.values()), seed=seed, n_samples=samples, tol=tol,
                                 only=four)
        rep.rows = [r for r in rep.rows if not r.skipped] + big.rows
    return rep


def verify_matrices(ctx: EllipticContext, nu, seed: int = 0, samples: int = 50, tol: float = 1e-9) -> Report:
    return suite_8v(ctx, nu, seed=seed, n_samples=samples, tol=tol)


def verify_lax_scalar(params: ModelParams, seed: int = 0, states: int = 20, n_z: int = 3, tol: float = 1e-8,
                      trace_tol: float = 1e-9) -> Report:
    """Scalar Lax equation, trace identity and the finite-difference trajectory witness.

    Rows
    ----
    ``lax-scalar``: worst relative residual of ``dL/dt - [L, M]`` over
    ``states x n_z`` draws.
    ``trace-identity``: worst mismatch between ``H`` and the value recovered
    from ``tr L(z)^2 / 4`` at every spectral point.
    ``lax-fd-order``: ``|log2(e(2h) / e(h)) - 2|`` for the finite-difference
    cross-check error ``e`` at ``h = 2e-3``; passes within ``0.25``.
    """
    rep = Report(f"scalar Lax pair (n={params.n})")
    sts = _states(params, seed, states)
    zs = spectral_points(params.ctx, seed + 1, n_z)
    rows, trace_rows = [], []
    for st in sts:
        H = hamiltonian(params, st)
        for z in zs:
            rows.append(lax_check(params, st, z, tol))
            Ht = hamiltonian_from_trace(params, st, z)
            trace_rows.append(CheckRow("trace-identity", abs(Ht - H), max(abs(H), abs(Ht)), trace_tol))
    rep.add(_worst("lax-scalar", rows, tol))
    rep.add(_worst("trace-identity", trace_rows, trace_tol))
    st = _states(params, seed + 2, 1, p_scale=0.5)[0]
    e2, e1 = dy.trajectory_lax_fd(params, st, zs[0], 4e-3), dy.trajectory_lax_fd(params, st, zs[0], 2e-3)
    if e1 == 0.0:
        rep.add(CheckRow("lax-fd-order", 0.0, 0.0, 0.25, note="exact finite difference (free motion)"))
    else:
        order = float(np.log2(e2 / e1))
        rep.add(CheckRow("lax-fd-order", abs(order - 2.0), 0.0, 0.25, note=f"observed order {order:.3f}"))
    return rep


def operator_backend(params: ModelParams, seed: int = 0, samples: int = 16) -> OperatorBackend:
    names = [f"x{k}" for k in range(params.n)]
    d = Sampler(params.ctx, seed).draw_many(names, samples)
    return OperatorBackend(params.ctx, params, np.stack([d[k] for k in names], axis=-1))


def verify_lax_rvalued(params: ModelParams, seed: int = 0, states: int = 20, n_z: int = 3, tol: float = 1e-8,
                       operator: bool | None = None, x_samples: int = 16) -> Report:
    """R-matrix valued Lax equations with the 8-vertex backend and, at ``n = 2``, the operator backend.

    Each block row is the worst over ``states x n_z`` draws.  The A-type pair
    is checked with the BC couplings as given (its forces ignore them), the
    key A-type identity at every state, and the heuristic scalar-consistency
    probe once.
    """
    n = params.n
    rep = Report(f"R-matrix valued Lax pairs (n={n})")
    sts = _states(params, seed, states)
    zs = spectral_points(params.ctx, seed + 1, n_z)
    mb = MatrixBackend(params.ctx, params.nu, n)
    backends = [mb]
    if operator if operator is not None else n == 2:
        backends.append(operator_backend(params, seed + 3, x_samples))
    for be in backends:
        acc: dict = {}
        for st in sts:
            for z in zs:
                for kind in ("bc", "atype"):
                    for r in lax_residual_rv(be, params, st, z, kind, tol).rows:
                        acc.setdefault(f"{r.id}-{be.name}", []).append(r)
        for id, rows in acc.items():
            rep.add(_worst(id, rows, tol))
    if n >= 2:
        rep.add(_worst("atype-key-8v", [r for st in sts for r in atype_key_identity(mb, params, st.q, zs[0], tol).rows],
                       tol))
    rep.add(scalar_consistency(mb, params, sts[:3], zs[0], tol=1e-9))
    return rep


def conservation_report(params: ModelParams, state: PhaseState, z, T: float = 1.0, h: float = 1e-3,
                        tol: float = 1e-6, stride: int = 10) -> Report:
    """Relative drift of ``H``, ``tr L^2`` and ``tr L^4`` along one RK4 trajectory."""
    traj = dy.integrate(params, state, T, h)
    mon = dy.monitor(params, traj, z, (2, 4), stride)
    rep = Report(f"conservation (n={params.n}, T={T}, h={h})")
    for key in ("H", "trL2", "trL4"):
        v = mon[key]
        rep.add(CheckRow(f"drift-{key}", float(np.max(np.abs(v - v[0]))), float(abs(v[0])), tol))
    return rep


def equilibrium_report(params: ModelParams, z, seed: int = 0, tol: float = 1e-10, lax_tol: float = 1e-7,
                       control_min: float = 1e-4, offset: float = 1e-2) -> tuple:
    """Equilibrium search plus the frozen quantum Lax equation and its negative control.

    Returns ``(Report, EquilibriumResult)``.
    """
    rep = Report(f"equilibrium and freezing (n={params.n})")
    res = dy.find_equilibrium(params, opts=dy.EquilibriumOptions(tol=tol, seed=seed))
    rep.add(CheckRow("bc-force", res.force_residual, 0.0, tol, note=f"converged={res.converged}"))
    if res.converged:
        rep.add(dy.quantum_lax_residual(params, res.zeta, z, "bc", lax_tol, force_tol=10 * tol))
        ctrl = dy.quantum_lax_residual(params, res.zeta + offset, z, "bc", lax_tol, check=False)
        # ratio below 1 means the perturbed residual is large enough
        ratio = control_min / ctrl.relative if ctrl.relative > 0 else float("inf")
        rep.add(CheckRow("quantum-lax-control", ratio, 0.0, 1.0,
                         note=f"perturbed relative residual {ctrl.relative:.3e} must exceed {control_min:.0e}"))
    return rep, res


def atype_equally_spaced(params: ModelParams, tol: float = 1e-10) -> CheckRow:
    """Force residual of the A-type map at ``zeta_j = j / n``."""
    zeta = np.arange(1, params.n + 1) / params.n + 0j
    f = dy.force_map(params, zeta, "atype")
    return CheckRow("atype-equally-spaced", float(np.max(np.abs(f))), 0.0, tol)


def timed(fn, *args, **kwargs):
    """``(result, seconds)``."""
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0



def oracle_report(ctx: EllipticContext, nu, seed: int = 0, samples: int = 10, tol: float = 1e-6,
                  lattice_tol: float = 1e-8) -> Report:
    """Analytic derivatives against central differences, ``wp`` against the lattice sum, and the dual involution.

    The lattice row is evaluated at ``tau = i`` regardless of ``ctx``.
    """
    from . import elliptic as el
    from . import oracles as orc
    from . import rmatrix8v as rm
    from .lax_scalar import forces

    rep = Report("oracles")
    d = Sampler(ctx, seed).draw_many(["z", "u"], samples, extra=lambda c: [c["z"] + c["u"], c["z"] - c["u"]])
    pts = list(zip(d["z"], d["u"]))
    fd = orc.fd_relative_error
    checks = {
        "fd-wp'": lambda z, u: fd(el.weierstrass_p(ctx, z, 1), lambda x: el.weierstrass_p(ctx, x), z),
        "fd-E2": lambda z, u: fd(-el.eisenstein(ctx, 2, z), lambda x: el.eisenstein(ctx, 1, x), z),
        "fd-f": lambda z, u: fd(el.kron_f(ctx, z, u), lambda x: el.kronecker_phi(ctx, z, x), u),
        "fd-f'": lambda z, u: fd(el.kron_f_du(ctx, z, u), lambda x: el.kron_f(ctx, z, x), u),
        "fd-phi_a dz": lambda z, u: max(
            fd(el.phi_shifted_dz(ctx, a, z, u + ctx.omega(a)), lambda x: el.phi_shifted(ctx, a, x, u + ctx.omega(a)), z)
            for a in range(4)),
        "fd-v'": lambda z, u: fd(el.v_pair(ctx, nu, "nu", z, u, 1), lambda x: el.v_pair(ctx, nu, "nu", z, x), u),
        "fd-v dz": lambda z, u: fd(el.v_dz(ctx, nu, "nu", z, u), lambda x: el.v_pair(ctx, nu, "nu", x, u), z),
        "fd-F(R)": lambda z, u: fd(rm.baxter_f(ctx, z, u), lambda x: rm.baxter_r(ctx, z, x), u),
        "fd-Y(K)": lambda z, u: fd(rm.k_matrix8v_dz(ctx, nu, z, u), lambda x: rm.k_matrix8v(ctx, nu, z, x), u),
    }
    for id, fn in checks.items():
        rep.add(CheckRow(id, max(fn(z, u) for z, u in pts), 0.0, tol))
    params = ModelParams(2, DEFAULT_G, nu, ctx)
    worst = 0.0
    for st in _states(params, seed, max(2, samples // 3)):
        pd = forces(params, st.q)
        for i in range(2):
            def H_of(x, i=i, st=st):
                q = np.array(st.q)
                q[i] = x
                return hamiltonian(params, PhaseState(q, st.p))
            worst = max(worst, fd(-pd[i], H_of, st.q[i]))
    rep.add(CheckRow("fd-forces", worst, 0.0, tol))
    square = EllipticContext(1j)
    zs = spectral_points(square, seed, samples)
    rep.add(CheckRow("lattice-wp", max(abs(el.weierstrass_p(square, z) - orc.wp_lattice(1j, z)) for z in zs),
                     max(abs(orc.wp_lattice(1j, z)) for z in zs), lattice_tol))
    rep.add(CheckRow("theta-product", max(abs(el.theta_jacobi(ctx, k, z) - orc.theta_product(ctx.tau, k, z))
                                          for k in range(1, 5) for z in d["z"]), 0.0, 1e-12))
    nu = np.asarray(nu, dtype=complex)
    rep.add(CheckRow("dual-involution", float(np.max(np.abs(el.dual_couplings(el.dual_couplings(nu)) - nu))),
                     float(np.max(np.abs(nu))), 1e-14))
    return rep
