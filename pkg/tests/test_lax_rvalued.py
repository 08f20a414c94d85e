import numpy as np
import pytest

from bcnlax import rmatrix8v as rm
from bcnlax.battery import operator_backend
from bcnlax.elliptic import EllipticContext
from bcnlax.lax_rvalued import (EntryMatrix, MatrixBackend, OperatorBackend, atype_key_identity,
                                bc_hamiltonian_operator, build_lax_atype, build_lax_bc, lax_residual_rv,
                                scalar_consistency)
from bcnlax.lax_scalar import ModelParams, PhaseState, random_state

CTX_I = EllipticContext(1j)
CTX_G = EllipticContext(0.3 + 0.8j)
NU = (0.5 + 0.1j, -0.3, 0.2j, 0.7)
ZS = (0.21 + 0.37j, 0.61 + 0.13j, -0.33 + 0.52j)


def setup(n, ctx=CTX_I, g=0.8 - 0.3j, nu=NU, seed=0, count=3):
    prm = ModelParams(n, g, nu, ctx)
    rng = np.random.default_rng(seed)
    return prm, [random_state(prm, rng) for _ in range(count)]


def assert_passed(rep):
    assert rep.all_passed, rep.summary()


# ---------------------------------------------------------------------------
# structure


def test_atype_structure_matrix_backend():
    prm, (s,) = setup(2, count=1)
    be = MatrixBackend(prm.ctx, prm.nu, 2)
    L, M = build_lax_atype(be, prm, s, ZS[0])
    assert L.size == 2
    assert L[0, 0].data.shape == (4, 4)
    assert np.allclose(L[0, 0].data, s.p[0] * np.eye(4))
    assert np.allclose(L[1, 1].data, s.p[1] * np.eye(4))
    assert L.to_dense().shape == (8, 8)


def test_bc_block_symmetries():
    prm, (s,) = setup(2, ctx=CTX_G, count=1)
    be = MatrixBackend(prm.ctx, prm.nu, 2)
    z = ZS[1]
    L, M = build_lax_bc(be, prm, s, z, include_h=False)
    Lm, Mm = build_lax_bc(be, prm, s, -z, include_h=False)
    d = lambda X: X.to_dense()
    assert np.allclose(d(L.block(1, 1)), -d(Lm.block(2, 2)), atol=1e-13)
    assert np.allclose(d(L.block(1, 2)), -d(Lm.block(2, 1)), atol=1e-13)
    assert np.allclose(d(M.block(1, 1)), d(Mm.block(2, 2)), atol=1e-13)
    assert np.allclose(d(M.block(1, 2)), d(Mm.block(2, 1)), atol=1e-13)


def test_hamiltonian_operator_reassembly():
    prm, states = setup(3, ctx=CTX_G, count=2)
    be = MatrixBackend(prm.ctx, prm.nu, 3)
    for s in states:
        q = s.q
        H = np.zeros((8, 8), dtype=complex)
        for k in range(3):
            _, Y0 = rm.zero_planck_limits(prm.ctx, prm.nu, q[k])
            H += 0.5 * rm.embed(Y0, (k,), 3).data
            for m in range(k + 1, 3):
                Fm, _ = rm.zero_planck_limits(prm.ctx, prm.nu, q[k] - q[m])
                Fp, _ = rm.zero_planck_limits(prm.ctx, prm.nu, q[k] + q[m])
                H += prm.g * (rm.embed(Fm, (k, m), 3).data + rm.embed(Fp, (k, m), 3).data)
        assert np.allclose(bc_hamiltonian_operator(be, prm, q).data, H, rtol=1e-14, atol=1e-14)


def test_operator_backend_validation():
    prm, _ = setup(2, count=1)
    with pytest.raises(ValueError):
        OperatorBackend(prm.ctx, prm, np.zeros((4, 3)))


# ---------------------------------------------------------------------------
# Lax equations


@pytest.mark.parametrize("ctx", [CTX_I, CTX_G], ids=["tau=i", "tau=0.3+0.8i"])
def test_bc_matrix_backend_two_sites(ctx):
    prm, states = setup(2, ctx=ctx, seed=1, count=4)
    be = MatrixBackend(ctx, prm.nu, 2)
    for s in states:
        for z in ZS:
            rep = lax_residual_rv(be, prm, s, z)
            assert rep.ids() == ["lax-rv-bc/11", "lax-rv-bc/12", "lax-rv-bc/21", "lax-rv-bc/22"]
            assert_passed(rep)


def test_bc_matrix_backend_three_sites():
    prm, states = setup(3, ctx=CTX_G, seed=2, count=2)
    be = MatrixBackend(prm.ctx, prm.nu, 3)
    for s in states:
        assert_passed(lax_residual_rv(be, prm, s, ZS[0]))


def test_bc_operator_backend():
    prm, states = setup(2, ctx=CTX_G, seed=3, count=2)
    be = operator_backend(prm, seed=3)
    for s in states:
        assert_passed(lax_residual_rv(be, prm, s, ZS[2]))


def test_atype_pair_both_backends():
    prm, states = setup(3, ctx=CTX_I, seed=4, count=2)
    be = MatrixBackend(prm.ctx, prm.nu, 3)
    for s in states:
        assert_passed(lax_residual_rv(be, prm, s, ZS[1], kind="atype"))
    prm2, states2 = setup(2, ctx=CTX_G, seed=5, count=2)
    op = operator_backend(prm2, seed=5)
    for s in states2:
        assert_passed(lax_residual_rv(op, prm2, s, ZS[0], kind="atype"))
    with pytest.raises(ValueError):
        lax_residual_rv(op, prm2, states2[0], ZS[0], kind="c")


def test_atype_key_identity():
    prm, states = setup(3, ctx=CTX_G, seed=6, count=2)
    be = MatrixBackend(prm.ctx, prm.nu, 3)
    for s in states:
        rep = atype_key_identity(be, prm, s.q, ZS[0])
        assert len(rep.rows) == 6
        assert_passed(rep)


def test_free_case_is_exact():
    prm, (s,) = setup(2, g=0, nu=(0, 0, 0, 0), count=1)
    be = MatrixBackend(prm.ctx, prm.nu, 2)
    rep = lax_residual_rv(be, prm, s, ZS[0])
    assert all(r.residual == 0 for r in rep.rows)


def test_residual_detects_wrong_dynamics():
    # dropping the diagonal A_i terms from M must break the Lax equation
    prm, (s,) = setup(2, ctx=CTX_G, seed=7, count=1)
    be = MatrixBackend(prm.ctx, prm.nu, 2)
    from bcnlax import lax_rvalued as lr

    L, M = build_lax_bc(be, prm, s, ZS[0])
    Ld = lr.bc_time_derivative(be, prm, s, ZS[0])
    broken = EntryMatrix([[e if i != j else be.zero() for j, e in enumerate(row)] for i, row in enumerate(M.rows)])
    rows = lr._block_rows(be, "broken", Ld, L @ broken, broken @ L, 1e-8)
    assert not all(r.passed for r in rows)


def test_scalar_consistency_probe():
    prm, states = setup(1, ctx=CTX_G, seed=8, count=5)
    be = MatrixBackend(prm.ctx, prm.nu, 1)
    row = scalar_consistency(be, prm, states, ZS[0])
    assert row.passed, row.line()
    assert "heuristic" in row.note
