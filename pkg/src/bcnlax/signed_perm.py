"""Signed permutations: the hyperoctahedral group B_n.

Sites are numbered from 0.  An element is stored as an image array ``perm``
and a sign array ``signs`` indexed by target slot; acting on a coordinate
vector it sends ``x[i]`` to slot ``perm[i]`` with sign ``signs[perm[i]]``::

    y[perm[i]] = signs[perm[i]] * x[i]

On functions the action is ``(w f)(x) = f(w^{-1} x)``, so the transposition
``s(i, j)`` exchanges the variables ``x_i`` and ``x_j`` and the reflection
``t(i)`` flips the sign of ``x_i``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SignedPermutation:
    perm: tuple
    signs: tuple

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        signs = tuple(int(s) for s in self.signs)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"perm {perm} is not a permutation of 0..{len(perm) - 1}")
        if len(signs) != len(perm) or any(s not in (1, -1) for s in signs):
            raise ValueError("signs must be n entries in {+1, -1}")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "signs", signs)

    @property
    def n(self) -> int:
        return len(self.perm)

    @property
    def key(self):
        return (self.perm, self.signs)

    def is_identity(self) -> bool:
        return self.perm == tuple(range(self.n)) and all(s == 1 for s in self.signs)

    def __matmul__(self, other: "SignedPermutation") -> "SignedPermutation":
        return sp_compose(self, other)

    def __repr__(self):
        return f"SignedPermutation(perm={self.perm}, signs={self.signs})"


def identity(n: int) -> SignedPermutation:
    return SignedPermutation(tuple(range(n)), (1,) * n)


def transposition(n: int, i: int, j: int) -> SignedPermutation:
    """``s_ij``, exchanging sites ``i`` and ``j``."""
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"bad transposition ({i}, {j}) for n={n}")
    perm = list(range(n))
    perm[i], perm[j] = j, i
    return SignedPermutation(tuple(perm), (1,) * n)


def reflection(n: int, i: int) -> SignedPermutation:
    """``t_i``, flipping the sign of site ``i``."""
    if not 0 <= i < n:
        raise IndexError(f"bad reflection index {i} for n={n}")
    signs = [1] * n
    signs[i] = -1
    return SignedPermutation(tuple(range(n)), tuple(signs))


def _check_same(w1, w2):
    if w1.n != w2.n:
        raise ValueError(f"dimension mismatch: {w1.n} vs {w2.n}")


def sp_compose(w1: SignedPermutation, w2: SignedPermutation) -> SignedPermutation:
    """The product ``w1 w2``: act with ``w2`` first, then ``w1``."""
    _check_same(w1, w2)
    p1, p2 = w1.perm, w2.perm
    inv1 = [0] * w1.n
    for i, p in enumerate(p1):
        inv1[p] = i
    perm = tuple(p1[p2[i]] for i in range(w1.n))
    signs = tuple(w1.signs[t] * w2.signs[inv1[t]] for t in range(w1.n))
    return SignedPermutation(perm, signs)


def sp_inverse(w: SignedPermutation) -> SignedPermutation:
    inv = [0] * w.n
    for i, p in enumerate(w.perm):
        inv[p] = i
    # x[i] = signs[perm[i]] * y[perm[i]], so the inverse carries sign signs[perm[i]] at slot i
    signs = tuple(w.signs[w.perm[i]] for i in range(w.n))
    return SignedPermutation(tuple(inv), signs)


def sp_act(w: SignedPermutation, x):
    """Act on coordinate vectors; ``x`` may carry leading batch axes."""
    x = np.asarray(x)
    if x.shape[-1] != w.n:
        raise ValueError(f"dimension mismatch: vector of length {x.shape[-1]} for n={w.n}")
    y = np.empty_like(x)
    signs = np.asarray(w.signs)
    perm = np.asarray(w.perm)
    y[..., perm] = signs[perm] * x
    return y


def all_elements(n: int):
    """Every element of B_n (``2^n n!`` of them)."""
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            yield SignedPermutation(perm, signs)
