"""Operators ``sum_w c_w(x) w`` over the signed permutation group.

An operator acts on functions of ``x = (x_0, ..., x_{n-1})`` by

    (A f)(x) = sum_w c_w(x) f(w^{-1} x),

so the coefficient stands to the left of the group element.  Coefficients are
batched evaluators: they take ``x`` of shape ``(S, n)`` and return ``(S,)``.
Spectral parameters may be arrays of shape ``(S,)``; sample ``s`` then uses
its own parameter values, which lets a whole sweep of random configurations
run as one vectorised evaluation.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import elliptic as el
from .elliptic import CouplingSet, EllipticContext
from .reports import CheckRow
from .signed_perm import (SignedPermutation, identity, reflection, sp_act, sp_compose, sp_inverse,
                          transposition)


class CoeffFn:
    """A coefficient evaluator with a tag used in diagnostics.

    Besides its value, every coefficient carries a majorant: the sum of the
    magnitudes of the elementary products it was assembled from.  Residual
    checks use it as the scale, so cancellations between large terms are
    judged against the size of those terms.
    """

    def __init__(self, fn: Callable, tag: str = "", pair: Callable | None = None):
        self.fn = fn
        self.tag = tag
        self._pair = pair

    def pair(self, x):
        """``(value, majorant)`` at ``x``."""
        x = np.asarray(x, dtype=complex)
        if self._pair is not None:
            val, mag = self._pair(x)
        else:
            val = np.asarray(self.fn(x), dtype=complex)
            mag = np.abs(val)
        shape = x.shape[:-1]
        return np.broadcast_to(val, shape), np.broadcast_to(mag, shape)

    def __call__(self, x):
        return self.pair(x)[0]

    def scaled(self, alpha) -> "CoeffFn":
        alpha = np.asarray(alpha, dtype=complex)

        def pair(x):
            v, m = self.pair(x)
            return alpha * v, np.abs(alpha) * m

        return CoeffFn(None, self.tag, pair)

    def plus(self, other: "CoeffFn") -> "CoeffFn":
        def pair(x):
            v1, m1 = self.pair(x)
            v2, m2 = other.pair(x)
            return v1 + v2, m1 + m2

        return CoeffFn(None, f"({self.tag}+{other.tag})", pair)

    def times_twisted(self, other: "CoeffFn", g) -> "CoeffFn":
        """``self(x) * other(g x)``."""

        def pair(x):
            v1, m1 = self.pair(x)
            v2, m2 = other.pair(sp_act(g, x))
            return v1 * v2, m1 * m2

        return CoeffFn(None, f"{self.tag}.{other.tag}", pair)


def const(value, tag: str = "") -> CoeffFn:
    """Coefficient independent of ``x`` (``value`` may be a per-sample array)."""
    value = np.asarray(value, dtype=complex)
    return CoeffFn(lambda x: value * np.ones(x.shape[:-1]), tag or "const")


class WeylOperator:
    """Finite formal sum of group elements with coefficient evaluators.

    Supports ``+``, ``-``, scalar ``*`` and composition ``@`` so it can be used
    as a Lax-matrix entry.
    """

    def __init__(self, n: int, terms=None):
        self.n = int(n)
        self.terms: dict = {}
        for w, c in (terms or {}).items():
            if w.n != self.n:
                raise ValueError(f"dimension mismatch: element of B_{w.n} in operator on {self.n} sites")
            self.terms[w] = c if isinstance(c, CoeffFn) else CoeffFn(c)

    # construction helpers
    @classmethod
    def zero(cls, n):
        return cls(n)

    @classmethod
    def identity(cls, n, value=1.0):
        return cls(n, {identity(n): const(value, "id")})

    @classmethod
    def element(cls, w: SignedPermutation, coeff=None):
        return cls(w.n, {w: coeff if coeff is not None else const(1.0, "1")})

    def support(self):
        return list(self.terms)

    def __add__(self, other):
        return op_linear(self, _as_op(other, self.n), 1.0, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return op_linear(self, _as_op(other, self.n), 1.0, -1.0)

    def __rsub__(self, other):
        return op_linear(_as_op(other, self.n), self, 1.0, -1.0)

    def __neg__(self):
        return op_linear(self, WeylOperator(self.n), -1.0, 0.0)

    def __mul__(self, alpha):
        if isinstance(alpha, WeylOperator):
            return NotImplemented
        return op_linear(self, WeylOperator(self.n), alpha, 0.0)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return op_compose(self, other)

    def __repr__(self):
        tags = ", ".join(f"{c.tag}*{w.perm}{w.signs}" for w, c in self.terms.items())
        return f"WeylOperator(n={self.n}, [{tags}])"


def _as_op(x, n):
    if isinstance(x, WeylOperator):
        return x
    return WeylOperator.identity(n, x)


def _check_same(A, B):
    if A.n != B.n:
        raise ValueError(f"dimension mismatch: {A.n} vs {B.n}")


def op_linear(A: WeylOperator, B: WeylOperator, alpha, beta) -> WeylOperator:
    """``alpha A + beta B`` with like terms merged."""
    _check_same(A, B)
    terms = {w: c.scaled(alpha) for w, c in A.terms.items()}
    if np.any(np.asarray(beta) != 0):
        for w, c in B.terms.items():
            cb = c.scaled(beta)
            terms[w] = terms[w].plus(cb) if w in terms else cb
    return WeylOperator(A.n, terms)


def op_compose(A: WeylOperator, B: WeylOperator) -> WeylOperator:
    """The product ``A B``.

    ``c w1 * d w2 = c(x) d(w1^{-1} x) w1 w2``.
    """
    _check_same(A, B)
    terms: dict = {}
    for w1, c1 in A.terms.items():
        w1inv = sp_inverse(w1)
        for w2, c2 in B.terms.items():
            w = sp_compose(w1, w2)
            new = c1.times_twisted(c2, w1inv)
            terms[w] = terms[w].plus(new) if w in terms else new
    return WeylOperator(A.n, terms)


def op_apply(A: WeylOperator, f, x):
    """``(A f)(x) = sum_w c_w(x) f(w^{-1} x)``; ``x`` has shape ``(n,)`` or ``(S, n)``."""
    x = np.asarray(x, dtype=complex)
    single = x.ndim == 1
    xb = x[None, :] if single else x
    out = np.zeros(xb.shape[:-1], dtype=complex)
    for w, c in A.terms.items():
        out = out + c(xb) * np.asarray(f(sp_act(sp_inverse(w), xb)))
    return complex(out[0]) if single else out


def coefficients(A: WeylOperator, x, with_majorant: bool = False) -> dict:
    """Evaluate every coefficient at the sample points ``x`` (shape ``(S, n)``)."""
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    if with_majorant:
        return {w: c.pair(x) for w, c in A.terms.items()}
    return {w: c(x) for w, c in A.terms.items()}


# ---------------------------------------------------------------------------
# generators

GENERATOR_KINDS = ("R", "R_tilde", "K", "K_tilde", "F", "F_tilde", "Y", "Y_tilde", "r", "r_tilde", "y")


def build_generator(ctx: EllipticContext, cs: CouplingSet, kind: str, sites, hbar=None, q=None, n=None,
                    nu_which: str | None = None) -> WeylOperator:
    """Operators of the elliptic B_n algebra.

    Parameters
    ----------
    ctx, cs
        Modulus and couplings.  The K-type operators use ``cs.nu_bar`` by
        default; the parameterless ``y`` uses ``cs.nu``.
    kind : str
        One of ``GENERATOR_KINDS``.
    sites : tuple
        ``(i, j)`` for two-site kinds, ``(i,)`` for K, Y and y (0-based).
    hbar, q : complex or array of shape (S,)
        Planck-type parameter and positional parameter.  ``r``, ``r_tilde``
        and ``y`` take only ``q`` (the caller supplies ``q_i - q_j``,
        ``q_i + q_j`` or ``q_i``).
    n : int
        Number of sites.
    nu_which : {"nu", "nu_bar"}, optional
        Override the coupling vector for K, Y and y.

    Returns
    -------
    WeylOperator
    """
    if n is None:
        raise ValueError("n is required")
    if kind not in GENERATOR_KINDS:
        raise ValueError(f"unknown generator kind {kind!r}")
    sites = tuple(int(s) for s in sites)
    two_site = kind in ("R", "R_tilde", "F", "F_tilde", "r", "r_tilde")
    if two_site:
        if len(sites) != 2:
            raise ValueError(f"{kind} needs two sites")
        i, j = sites
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"bad sites {sites} for n={n}")
    else:
        if len(sites) != 1 or not 0 <= sites[0] < n:
            raise IndexError(f"bad site {sites} for n={n}")
        i = sites[0]
    q = None if q is None else np.asarray(q, dtype=complex)
    h = None if hbar is None else np.asarray(hbar, dtype=complex)
    if kind not in ("r", "r_tilde", "y") and kind not in ("F", "F_tilde", "Y", "Y_tilde") and h is None:
        raise ValueError(f"{kind} needs hbar")
    if q is None:
        raise ValueError(f"{kind} needs q")
    which = nu_which or ("nu" if kind == "y" else "nu_bar")

    e = identity(n)
    phi = lambda a, b: np.asarray(el.kronecker_phi(ctx, a, b))
    f = lambda a, b: np.asarray(el.kron_f(ctx, a, b))
    v = lambda a, b: np.asarray(el.v_pair(ctx, cs, which, a, b))
    vq = lambda a, b: np.asarray(el.v_dz(ctx, cs, which, a, b))

    if two_site:
        s = transposition(n, i, j)
        stt = sp_compose(s, sp_compose(reflection(n, i), reflection(n, j)))
        dif = lambda x: x[..., i] - x[..., j]
        add = lambda x: x[..., i] + x[..., j]
        if kind == "R":
            return WeylOperator(n, {e: CoeffFn(lambda x: phi(h, dif(x)), f"phi(h,x{i}{j})"),
                                    s: CoeffFn(lambda x: -phi(q, dif(x)), f"-phi(q,x{i}{j})")})
        if kind == "R_tilde":
            return WeylOperator(n, {e: CoeffFn(lambda x: phi(h, add(x)), f"phi(h,x{i}+x{j})"),
                                    stt: CoeffFn(lambda x: -phi(q, add(x)), f"-phi(q,x{i}+x{j})")})
        # d/dq phi(q, X) = f(X, q)
        if kind == "F":
            return WeylOperator(n, {s: CoeffFn(lambda x: -f(dif(x), q), f"-f(x{i}{j},q)")})
        if kind == "F_tilde":
            return WeylOperator(n, {stt: CoeffFn(lambda x: -f(add(x), q), f"-f(x{i}+x{j},q)")})
        if kind == "r":
            return WeylOperator(n, {s: CoeffFn(lambda x: phi(q, dif(x)), f"phi(q,x{i}{j})")})
        return WeylOperator(n, {stt: CoeffFn(lambda x: phi(q, add(x)), f"phi(q,x{i}+x{j})")})

    t = reflection(n, i)
    xi = lambda x: x[..., i]
    if kind == "K":
        return WeylOperator(n, {e: CoeffFn(lambda x: v(q, xi(x)), f"v(q,x{i})"),
                                t: CoeffFn(lambda x: -v(h, xi(x)), f"-v(h,x{i})")})
    if kind == "K_tilde":
        return WeylOperator(n, {e: CoeffFn(lambda x: v(h, xi(x)), f"v(h,x{i})"),
                                t: CoeffFn(lambda x: -v(q, xi(x)), f"-v(q,x{i})")})
    if kind == "Y":
        return WeylOperator(n, {e: CoeffFn(lambda x: vq(q, xi(x)), f"dv(q,x{i})")})
    if kind == "Y_tilde":
        return WeylOperator(n, {t: CoeffFn(lambda x: -vq(q, xi(x)), f"-dv(q,x{i})")})
    return WeylOperator(n, {t: CoeffFn(lambda x: v(q, xi(x)), f"v(q,x{i})")})


# ---------------------------------------------------------------------------
# residuals


def sample_residuals(A: WeylOperator, B: WeylOperator, x, terms=()):
    """Per-sample residual and scale arrays, each of shape ``(S,)``.

    The residual at a sample is the largest coefficient of ``A - B`` over all
    group elements; the scale the largest coefficient majorant of ``A``, ``B``
    and ``terms`` there.
    """
    _check_same(A, B)
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    S = x.shape[0]
    ca = coefficients(A, x, with_majorant=True)
    cb = coefficients(B, x, with_majorant=True)
    residual = np.zeros(S)
    scale = np.zeros(S)
    for w in set(ca) | set(cb):
        d = ca[w][0] if w in ca else 0.0
        d = d - (cb[w][0] if w in cb else 0.0)
        residual = np.maximum(residual, np.abs(np.broadcast_to(d, (S,))))
    for op_coeffs in [ca, cb] + [coefficients(T, x, with_majorant=True) for T in terms]:
        for _, mag in op_coeffs.values():
            scale = np.maximum(scale, np.broadcast_to(mag, (S,)))
    return residual, scale


def worst_sample(residual, scale):
    """Index of the sample with the largest ``residual / max(1, scale)``."""
    return int(np.argmax(np.asarray(residual) / np.maximum(1.0, np.asarray(scale))))


def op_residual(id: str, A: WeylOperator, B: WeylOperator, x, tol: float = 1e-8, terms=(), note: str = "") -> CheckRow:
    """Compare two operators coefficient by coefficient at sample points.

    Parameters
    ----------
    id : str
        Row identifier.
    A, B : WeylOperator
    x : array of shape (S, n)
        Sample configurations; parameters baked into the operators must
        broadcast against ``S``.
    terms : sequence of WeylOperator
        Individual summands; their coefficient magnitudes enter the scale.

    Returns
    -------
    CheckRow
        The residual and scale of the worst sample (see
        :func:`sample_residuals`), so that each configuration is judged
        relative to its own magnitudes.
    """
    residual, scale = sample_residuals(A, B, x, terms)
    s = worst_sample(residual, scale)
    return CheckRow(id, float(residual[s]), float(scale[s]), tol, note=note)


def per_element_residual(A: WeylOperator, B: WeylOperator, x) -> dict:
    """``{element: max |coefficient of A - B|}`` over the samples."""
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    ca = coefficients(A, x)
    cb = coefficients(B, x)
    return {w: float(np.max(np.abs(ca.get(w, 0.0) - cb.get(w, 0.0)))) for w in set(ca) | set(cb)}
