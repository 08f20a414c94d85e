import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bcnlax import elliptic as el
from bcnlax import oracles as orc
from bcnlax.elliptic import CouplingSet, EllipticContext
from bcnlax.elliptic_suite import identity_suite_elliptic
from bcnlax.errors import DomainError, SeriesTruncationError

from conftest import NU_A, NU_B, cell_point

CTX_I = EllipticContext(1j)
CTX_G = EllipticContext(0.3 + 0.8j)
# limit checks evaluate within the default domain margin
CTX_OPEN = CTX_I.with_margin(0.0)

unit = st.floats(0.12, 0.88)


def point(ctx, a, b):
    return a + b * ctx.tau


# ---------------------------------------------------------------------------
# context and half-periods


def test_context_validation():
    with pytest.raises(ValueError):
        EllipticContext(0.01j)
    with pytest.raises(ValueError):
        EllipticContext(1j, max_terms=4)
    with pytest.raises(ValueError):
        EllipticContext(1j, series_tol=0.0)
    assert abs(EllipticContext(0.05j).nome) < 1


def test_half_periods():
    tau = CTX_G.tau
    assert CTX_G.omegas == (0, 0.5, (1 + tau) / 2, tau / 2)
    assert [el.half_period(CTX_G, a).dtau_omega for a in range(4)] == [0, 0, 0.5, 0.5]
    with pytest.raises(ValueError):
        el.half_period(CTX_G, 4)


def test_truncation_error_carries_partial_sum():
    ctx = EllipticContext(0.05j, max_terms=8)
    with pytest.raises(SeriesTruncationError) as info:
        el.theta_jacobi(ctx, 3, 0.1)
    assert info.value.partial_sum is not None
    assert info.value.last_term is not None


# ---------------------------------------------------------------------------
# theta functions


def test_theta1_zero_and_oddness():
    assert abs(el.theta_jacobi(CTX_I, 1, 0.0)) < 1e-15
    z = 0.3 + 0.1j
    assert el.theta_jacobi(CTX_I, 1, z + 1) == pytest.approx(-el.theta_jacobi(CTX_I, 1, z), abs=1e-14)


def test_theta_frozen_values():
    # frozen from the triple-product oracle
    assert el.theta_jacobi(EllipticContext(0.8j), 3, 0.2) == pytest.approx(1.0499926949135372, abs=1e-13)
    assert el.theta_jacobi(CTX_I, 1, 0.3 + 0.1j) == pytest.approx(0.773651221771173 + 0.17293153659159258j, abs=1e-13)
    assert el.theta_jacobi(CTX_G, 1, 0.23 + 0.17j) == pytest.approx(0.6815319804871852 + 0.6068027920817288j,
                                                                    abs=1e-13)


@given(unit, unit, st.integers(1, 4))
def test_theta_matches_product(a, b, k):
    z = point(CTX_G, a, b) - 0.5
    assert el.theta_jacobi(CTX_G, k, z) == pytest.approx(orc.theta_product(CTX_G.tau, k, z), abs=1e-12)


def test_theta1_derivative_at_zero():
    # theta_1'(0) = 2 pi q^(1/4) prod (1 - q^2n)^3, and the central difference agrees
    for ctx in (CTX_I, CTX_G):
        q = ctx.nome
        n = np.arange(1, 60)
        prod = 2 * np.pi * np.exp(0.25j * np.pi * ctx.tau) * np.prod((1 - q ** (2 * n)) ** 3)
        assert ctx.theta1_d1_0 == pytest.approx(prod, rel=1e-13)
        fd = orc.central_difference(lambda x: el.theta_jacobi(ctx, 1, x), 0.0)
        assert fd == pytest.approx(ctx.theta1_d1_0, rel=1e-9)


def test_theta_vectorised():
    zs = np.array([0.1 + 0.2j, 0.3 - 0.1j])
    out = el.theta_jacobi(CTX_G, 2, zs)
    assert out.shape == (2,)
    assert out[1] == pytest.approx(el.theta_jacobi(CTX_G, 2, zs[1]))


# ---------------------------------------------------------------------------
# Kronecker function


def test_phi_residue():
    u = 0.31 + 0.07j
    assert 1e-6 * el.kronecker_phi(CTX_OPEN, 1e-6, u) == pytest.approx(1, abs=1e-5)


@given(unit, unit, unit, unit)
def test_phi_symmetries(a, b, c, d):
    z, u = point(CTX_G, a, b), point(CTX_G, c, d) - 0.5
    try:
        val = el.kronecker_phi(CTX_G, z, u)
    except DomainError:
        return
    scale = max(1.0, abs(val))
    assert abs(el.kronecker_phi(CTX_G, u, z) - val) < 1e-12 * scale
    assert abs(el.kronecker_phi(CTX_G, -z, -u) + val) < 1e-12 * scale


def test_phi_quasi_periodicity(ctx, rng):
    for _ in range(10):
        z, u = cell_point(ctx, rng), cell_point(ctx, rng) - 0.5
        val = el.kronecker_phi(ctx, z, u)
        assert el.kronecker_phi(ctx, z + 1, u) == pytest.approx(val, rel=1e-9)
        shifted = cmath.exp(-2j * cmath.pi * u) * val
        assert el.kronecker_phi(ctx, z + ctx.tau, u) == pytest.approx(shifted, rel=1e-9)


def test_phi_rejects_poles():
    with pytest.raises(DomainError, match="z"):
        el.kronecker_phi(CTX_I, 0.01, 0.3)
    with pytest.raises(DomainError, match="u"):
        el.kronecker_phi(CTX_I, 0.3, 1 + 1j + 0.001)


# ---------------------------------------------------------------------------
# f, E1, E2, wp


def test_f_parity_and_limit(rng):
    z, u = cell_point(CTX_G, rng), cell_point(CTX_G, rng) - 0.5
    assert el.kron_f(CTX_G, -z, -u) == pytest.approx(el.kron_f(CTX_G, z, u), rel=1e-12)
    u = 0.31 + 0.07j
    assert el.kron_f(CTX_OPEN, 1e-6, u) == pytest.approx(-el.eisenstein(CTX_I, 2, u), abs=1e-5)
    assert el.kron_f(CTX_I, 0.0, u) == pytest.approx(-el.eisenstein(CTX_I, 2, u), rel=1e-13)


def test_f_against_difference_quotient(ctx, rng):
    for _ in range(5):
        z, u = cell_point(ctx, rng), cell_point(ctx, rng) - 0.5
        h = 1e-5
        fd = (el.kronecker_phi(ctx, z, u + h) - el.kronecker_phi(ctx, z, u - h)) / (2 * h)
        f = el.kron_f(ctx, z, u)
        assert abs(f - fd) < 1e-6 * max(1, abs(f))


def test_e1_parity_and_shifts():
    z = 0.27 + 0.31j
    assert el.eisenstein(CTX_I, 1, -z) == pytest.approx(-el.eisenstein(CTX_I, 1, z), rel=1e-13)
    w3 = CTX_I.omega(3)
    assert el.eisenstein(CTX_I, 1, z + 2 * w3) - el.eisenstein(CTX_I, 1, z) == pytest.approx(-2j * np.pi, abs=1e-11)
    assert abs(el.eisenstein(CTX_I, 1, CTX_I.omega(1))) < 1e-13
    for a in (2, 3):
        assert el.eisenstein(CTX_G, 1, CTX_G.omega(a)) == pytest.approx(-1j * np.pi, abs=1e-11)


def test_wp_lattice_sum():
    z = 0.3 + 0.2j
    # frozen row-summed lattice value
    assert el.weierstrass_p(CTX_I, z) == pytest.approx(3.3721036737358205 - 5.991418600455645j, abs=1e-12)
    # the plain square truncation |m|, |n| <= 60 only gets within O(1/N^2)
    assert abs(el.weierstrass_p(CTX_I, z) - orc.wp_lattice_truncated(1j, z, 60)) < 1e-4


def test_wp_on_sample_rectangle(rng):
    for _ in range(20):
        z = cell_point(CTX_I, rng)
        assert abs(el.weierstrass_p(CTX_I, z) - orc.wp_lattice(1j, z)) < 1e-8


def test_wp_even_and_duplication(ctx, rng):
    for _ in range(10):
        z = cell_point(ctx, rng) * 0.5
        try:
            el.check_off_lattice(ctx, "z", z, half=True)
            el.check_off_lattice(ctx, "2z", 2 * z, half=False)
        except DomainError:
            continue
        wp = el.weierstrass_p(ctx, z)
        assert el.weierstrass_p(ctx, -z) == pytest.approx(wp, rel=1e-12)
        total = el.wp_shifted_sum(ctx, (1, 1, 1, 1), z)
        assert total == pytest.approx(4 * el.weierstrass_p(ctx, 2 * z), rel=1e-9, abs=1e-9)


def test_wp_reduction_to_cell():
    z = 0.2 + 0.3j
    far = z + 3 + 2 * CTX_G.tau
    assert el.weierstrass_p(CTX_G, far) == pytest.approx(el.weierstrass_p(CTX_G, z), rel=1e-11)
    assert el.weierstrass_p(CTX_G, far, 1) == pytest.approx(el.weierstrass_p(CTX_G, z, 1), rel=1e-11)


def test_derivatives_against_finite_differences(ctx, rng):
    for _ in range(5):
        z, u = cell_point(ctx, rng), cell_point(ctx, rng) - 0.5
        fd = orc.fd_relative_error
        assert fd(el.weierstrass_p(ctx, z, 1), lambda x: el.weierstrass_p(ctx, x), z) < 1e-6
        assert fd(-el.eisenstein(ctx, 2, z), lambda x: el.eisenstein(ctx, 1, x), z) < 1e-6
        assert fd(el.kron_f_du(ctx, z, u), lambda x: el.kron_f(ctx, z, x), u) < 1e-6


# ---------------------------------------------------------------------------
# shifted phi and v


def test_phi_shifted_reductions(rng):
    z, h = cell_point(CTX_G, rng), cell_point(CTX_G, rng) - 0.5
    assert el.phi_shifted(CTX_G, 0, z, h) == el.kronecker_phi(CTX_G, z, h)
    w1 = CTX_G.omega(1)
    theta_form = (CTX_G.theta1_d1_0 * el.theta_jacobi(CTX_G, 2, z + h)
                  / (el.theta_jacobi(CTX_G, 1, z) * el.theta_jacobi(CTX_G, 2, h)))
    assert el.phi_shifted(CTX_G, 1, z, h + w1) == pytest.approx(theta_form, rel=1e-12)


def test_w215_transformation(rng):
    ctx = CTX_G
    z, u = 0.5 * cell_point(ctx, rng), 0.5 * cell_point(ctx, rng) + 0.1
    lhs = np.array([el.phi_shifted(ctx, a, 2 * z, u + ctx.omega(a)) for a in range(4)])
    rhs = np.array([el.phi_shifted(ctx, a, 2 * u, z + ctx.omega(a)) for a in range(4)])
    assert np.allclose(lhs, el.DUAL_MATRIX @ rhs, rtol=1e-10, atol=1e-10)


def test_v_product_and_duality(ctx, rng):
    cs = CouplingSet(1.0, NU_A)
    nu2, nub2 = np.array(cs.nu) ** 2, np.array(cs.nu_bar) ** 2
    for _ in range(5):
        z, u = 0.5 * cell_point(ctx, rng) + 0.05, 0.5 * cell_point(ctx, rng) + 0.3
        prod = el.v_pair(ctx, cs, "nu", z, u) * el.v_pair(ctx, cs, "nu", z, -u)
        rhs = el.wp_shifted_sum(ctx, nub2, z) - el.wp_shifted_sum(ctx, nu2, u)
        assert abs(prod - rhs) < 1e-9 * max(1, abs(prod), abs(rhs))
        v = el.v_pair(ctx, cs, "nu", z, u)
        assert el.v_pair(ctx, cs, "nu_bar", u, z) == pytest.approx(v, rel=1e-10)


def test_v_prime_limit():
    cs = CouplingSet(1.0, NU_B)
    u = 0.31 + 0.27j
    nu = np.array(cs.nu)
    expected = -el.wp_shifted_sum(CTX_I, nu, u) + CTX_I.e2_shift * nu.sum()
    assert el.v_pair(CTX_OPEN, cs, "nu", 1e-6, u, 1) == pytest.approx(expected, abs=1e-4)
    assert el.v_pair(CTX_I, cs, "nu", 0.0, u, 1) == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------------
# couplings


def test_dual_couplings_examples():
    assert np.allclose(el.dual_couplings([1, 0, 0, 0]), [0.5] * 4)
    assert np.allclose(el.dual_couplings([1, 1, 1, 1]), [2, 0, 0, 0])


@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=4,
                max_size=4))
def test_dual_involution(nu):
    back = el.dual_couplings(el.dual_couplings(nu))
    assert np.allclose(back, nu, rtol=1e-14, atol=1e-12)


def test_coupling_set():
    cs = CouplingSet(2, NU_A)
    assert cs.couplings("nu") == cs.nu
    assert np.allclose(cs.couplings("nu_bar"), el.dual_couplings(NU_A))
    with pytest.raises(ValueError):
        CouplingSet(1, (1, 2, 3))
    with pytest.raises(ValueError):
        cs.couplings("mu")


# ---------------------------------------------------------------------------
# identity suite


@pytest.mark.parametrize("nu", [NU_A, NU_B])
def test_identity_suite(ctx, nu):
    rep = identity_suite_elliptic(ctx, CouplingSet(1.0, nu), seed=3, n_samples=30)
    assert rep.all_passed, rep.summary()
    for id in ("fay", "a071", "a08", "a09", "a10", "a11", "q415", "q419a", "w215", "w216", "a0621", "a0624"):
        assert id in rep.ids()


def test_identity_suite_pure_phi_case():
    rep = identity_suite_elliptic(CTX_I, CouplingSet(1.0, (1, 0, 0, 0)), seed=1, n_samples=20)
    assert rep.all_passed, rep.summary()


def test_identity_suite_deterministic():
    a = identity_suite_elliptic(CTX_G, CouplingSet(1.0, NU_A), seed=9, n_samples=5)
    b = identity_suite_elliptic(CTX_G, CouplingSet(1.0, NU_A), seed=9, n_samples=5)
    assert a.to_dict() == b.to_dict()
    with pytest.raises(ValueError):
        identity_suite_elliptic(CTX_G, CouplingSet(1.0, NU_A), n_samples=0)
