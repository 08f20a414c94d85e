import numpy as np
import pytest

from bcnlax import elliptic as el
from bcnlax import oracles as orc
from bcnlax.elliptic import EllipticContext
from bcnlax.errors import DomainError
from bcnlax.rmatrix8v import (MAX_SITES, _f0_closed, SIGMA, DenseOperator, baxter_f, baxter_r, embed, f0_coefficients,
                              f0_matrix, k_matrix8v, k_matrix8v_dz, matrix_derivative, pauli, pauli_pair, suite_8v,
                              swap_factors, y0_matrix, zero_planck_limits)

from conftest import NU_A, NU_B, cell_point

CTX_I = EllipticContext(1j)
CTX_G = EllipticContext(0.3 + 0.8j)


def test_pauli_algebra():
    for a in range(4):
        assert np.allclose(pauli(a) @ pauli(a), np.eye(2))
    assert np.allclose(pauli(4), pauli(0))
    assert np.allclose(SIGMA[1] @ SIGMA[2], 1j * SIGMA[3])
    assert np.allclose(SIGMA[2] @ SIGMA[3], 1j * SIGMA[1])
    assert np.allclose(SIGMA[3] @ SIGMA[1], 1j * SIGMA[2])
    assert np.allclose(pauli_pair(3), np.kron(SIGMA[3], SIGMA[3]))


def test_dense_operator_ring():
    rng = np.random.default_rng(0)
    a, b, c = (DenseOperator(2, rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))) for _ in range(3))
    assert np.allclose((a @ (b + c)).data, (a @ b + a @ c).data)
    assert np.allclose((DenseOperator.identity(2) @ a).data, a.data)
    assert np.allclose((a - a).data, 0)
    with pytest.raises(ValueError):
        DenseOperator(2, np.eye(3))
    with pytest.raises(ValueError):
        DenseOperator(MAX_SITES + 1, np.eye(2))
    with pytest.raises(ValueError):
        a + DenseOperator.identity(1)


# ---------------------------------------------------------------------------
# embedding


def test_embed_examples():
    assert np.allclose(embed(np.eye(4), (0, 1), 3).data, np.eye(8))
    m = embed(np.kron(SIGMA[3], SIGMA[3]), (0, 2), 3).data
    for idx in range(8):
        b = [(idx >> (2 - s)) & 1 for s in range(3)]
        e = np.zeros(8)
        e[idx] = 1
        assert np.allclose(m @ e, (-1) ** (b[0] + b[2]) * e)
    rng = np.random.default_rng(1)
    A, B = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(2))
    EA, EB = embed(A, (0, 1), 4), embed(B, (2, 3), 4)
    assert np.allclose((EA @ EB - EB @ EA).data, 0)


def test_embed_homomorphism_and_order():
    rng = np.random.default_rng(2)
    for _ in range(10):
        A, B = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(2))
        for sites in [(0, 1), (2, 0), (1, 2)]:
            assert np.allclose(embed(A @ B, sites, 3).data, (embed(A, sites, 3) @ embed(B, sites, 3)).data)
        assert np.allclose(embed(A, (2, 0), 3).data, embed(swap_factors(A), (0, 2), 3).data)
    assert np.allclose(embed(A, (0, 1), 2).data, A)


def test_embed_errors():
    with pytest.raises(IndexError):
        embed(np.eye(4), (0, 0), 2)
    with pytest.raises(IndexError):
        embed(np.eye(2), (3,), 3)
    with pytest.raises(ValueError):
        embed(np.eye(4), (0,), 2)
    with pytest.raises(ValueError):
        embed(np.eye(2), (0,), 9)


# ---------------------------------------------------------------------------
# R-matrix


def test_r_explicit_entry(rng):
    for _ in range(5):
        u, h = cell_point(CTX_I, rng), cell_point(CTX_I, rng) - 0.5
        R = baxter_r(CTX_I, h, u)
        p00 = el.kronecker_phi(CTX_I, u, h / 2)
        p10 = el.kronecker_phi(CTX_I, u, (1 + h) / 2)
        assert R[0, 0] == pytest.approx((p00 + p10) / 2, rel=1e-12)
        # eight-vertex sparsity pattern
        mask = np.array([[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 1, 0], [1, 0, 0, 1]], bool)
        assert np.all(R[~mask] == 0)


def test_r_unitarity_and_skew(ctx, rng):
    for _ in range(5):
        u, h = cell_point(ctx, rng), cell_point(ctx, rng) - 0.5
        lhs = baxter_r(ctx, h, u) @ swap_factors(baxter_r(ctx, h, -u))
        rhs = (el.weierstrass_p(ctx, h) - el.weierstrass_p(ctx, u)) * np.eye(4)
        assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1, np.max(np.abs(lhs)))
        assert np.allclose(baxter_r(ctx, h, u), -swap_factors(baxter_r(ctx, -h, -u)), rtol=1e-13, atol=1e-13)


def test_r_rejects_poles():
    with pytest.raises(DomainError):
        baxter_r(CTX_I, 0.3, 1e-3)
    with pytest.raises(DomainError):
        baxter_r(CTX_I, 1e-3, 0.3)


def test_f_against_finite_difference(ctx, rng):
    for _ in range(5):
        u, h = cell_point(ctx, rng), cell_point(ctx, rng) - 0.5
        err = orc.fd_relative_error(matrix_derivative(ctx, "F_of_R", h, u), lambda x: baxter_r(ctx, h, x), u)
        assert err < 1e-6


def test_f_unitarity_derivative(ctx, rng):
    for _ in range(5):
        u, h = cell_point(ctx, rng), cell_point(ctx, rng) - 0.5
        lhs = (baxter_r(ctx, h, u) @ swap_factors(baxter_f(ctx, h, -u))
               - baxter_f(ctx, h, u) @ swap_factors(baxter_r(ctx, h, -u)))
        rhs = el.weierstrass_p(ctx, u, 1) * np.eye(4)
        assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1, np.max(np.abs(rhs)))


# ---------------------------------------------------------------------------
# K-matrix


def test_k_symmetry_and_unitarity(ctx, rng):
    nu = np.array(NU_B)
    for _ in range(5):
        z, h = cell_point(ctx, rng), cell_point(ctx, rng) - 0.5
        K = k_matrix8v(ctx, nu, h, z)
        assert np.allclose(K, k_matrix8v(ctx, nu, z, h), rtol=1e-12)
        lhs = K @ k_matrix8v(ctx, nu, -h, z)
        rhs = (el.wp_shifted_sum(ctx, nu ** 2, z) - el.wp_shifted_sum(ctx, nu ** 2, h)) * np.eye(2)
        assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1, np.max(np.abs(lhs)))


def test_k_single_term_reduction():
    z, h = 0.31 + 0.22j, 0.17 + 0.21j
    K = k_matrix8v(CTX_G, (1, 0, 0, 0), h, z)
    assert np.allclose(K, el.kronecker_phi(CTX_G, z, h) * np.eye(2), rtol=1e-13)


def test_k_derivative_against_finite_difference(ctx, rng):
    for _ in range(5):
        z, h = cell_point(ctx, rng), cell_point(ctx, rng) - 0.5
        analytic = matrix_derivative(ctx, "Y_of_K", h, z, nu=NU_A)
        assert orc.fd_relative_error(analytic, lambda x: k_matrix8v(ctx, NU_A, h, x), z) < 1e-6
    with pytest.raises(ValueError):
        matrix_derivative(ctx, "Y_of_K", 0.3, 0.2)
    with pytest.raises(ValueError):
        matrix_derivative(ctx, "G", 0.3, 0.2)


# ---------------------------------------------------------------------------
# zero Planck constant limits


def test_f0_is_limit_of_f(ctx, rng):
    open_ctx = ctx.with_margin(0.0)
    for _ in range(5):
        x = cell_point(ctx, rng)
        # the symmetric average cancels the O(hbar) term
        h = 1e-6
        limit = 0.5 * (baxter_f(open_ctx, h, x) + baxter_f(open_ctx, -h, x))
        assert np.allclose(f0_matrix(ctx, x), limit, atol=1e-5 * max(1, np.max(np.abs(limit))))


def test_y0_is_limit_of_k_derivative(ctx, rng):
    open_ctx = ctx.with_margin(0.0)
    for _ in range(5):
        x = 0.5 * cell_point(ctx, rng) + 0.1
        h = 1e-6
        limit = 0.5 * (k_matrix8v_dz(open_ctx, NU_A, h, x) + k_matrix8v_dz(open_ctx, NU_A, -h, x))
        assert np.allclose(y0_matrix(ctx, NU_A, x), limit, atol=1e-5 * max(1, np.max(np.abs(limit))))


def test_f0_symmetry(ctx, rng):
    for _ in range(5):
        x = cell_point(ctx, rng)
        assert np.allclose(f0_matrix(ctx, x), swap_factors(f0_matrix(ctx, -x)), rtol=1e-12)


def test_y0_single_term():
    x = 0.3 + 0.21j
    assert np.allclose(y0_matrix(CTX_I, (1, 0, 0, 0), x), -el.eisenstein(CTX_I, 2, x) * np.eye(2), rtol=1e-13)
    F0, Y0 = zero_planck_limits(CTX_I, NU_A, x)
    assert F0.shape == (4, 4) and Y0.shape == (2, 2)


def test_f0_contour_mean_matches_closed_form(ctx):
    # near omega_1..omega_3 a contour mean replaces the closed form; where the
    # closed form is still accurate the two agree
    for a in (1, 2, 3):
        w = ctx.omega(a)
        for x in (w + 0.08, w - 0.07j * ctx.tau):
            assert np.allclose(f0_coefficients(ctx, x), _f0_closed(ctx, x), rtol=1e-9)
        assert np.all(np.isfinite(f0_coefficients(ctx, w)))


def test_f0_near_lattice_keeps_pole():
    # close to the lattice the closed form is used; a contour mean would drop the pole
    x = 0.07 + 0.02j
    c = f0_coefficients(CTX_I, x)
    assert c[0] == pytest.approx(-0.5 * el.eisenstein(CTX_I, 2, x), rel=1e-13)
    with pytest.raises(DomainError):
        f0_coefficients(CTX_I, 1e-3)


# ---------------------------------------------------------------------------
# relation suite


@pytest.mark.parametrize("tau", [1j, 0.3 + 0.8j])
@pytest.mark.parametrize("nu", [NU_A, NU_B])
def test_suite_8v(tau, nu):
    rep = suite_8v(EllipticContext(tau), nu, seed=3, n_samples=50)
    assert rep.ids() == ["q01", "q011", "q02", "unitildeK", "Fourrel", "b30", "RE"]
    assert rep.all_passed, rep.summary()
    assert rep.row("q011").relative < 1e-13
