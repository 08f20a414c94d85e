"""Seeded sampling of admissible points on the elliptic curve."""
from __future__ import annotations

import itertools

import numpy as np

from .elliptic import EllipticContext, lattice_distance
from .errors import SamplerError


def pair_combinations(values):
    """Singletons, doubles and all ``a + b``, ``a - b`` of a list of points."""
    out = list(values)
    out += [2 * v for v in values]
    for a, b in itertools.combinations(values, 2):
        out.append(a + b)
        out.append(a - b)
    return out


class Sampler:
    """Draw configurations of named complex variables away from singular sets.

    Points are ``a + b tau`` with ``a, b`` uniform in ``[0.1, 0.9]``.  A draw is
    accepted when every expression returned by the constraint callback keeps at
    least ``margin`` away from the half-lattice ``(Z + tau Z) / 2``; by default
    the expressions are :func:`pair_combinations` of all drawn values, and
    callers with several classes of variables (coordinates, positions,
    spectral parameters) constrain pairs within each class only.

    Parameters
    ----------
    ctx : EllipticContext
    seed : int
    margin : float, optional
        Defaults to ``ctx.lattice_margin``.
    max_tries : int
    """

    def __init__(self, ctx: EllipticContext, seed: int, margin: float | None = None, max_tries: int = 1000):
        self.ctx = ctx
        self.rng = np.random.default_rng(seed)
        self.margin = ctx.lattice_margin if margin is None else float(margin)
        self.max_tries = int(max_tries)

    def point(self, size=None):
        a = self.rng.uniform(0.1, 0.9, size)
        b = self.rng.uniform(0.1, 0.9, size)
        return a + b * self.ctx.tau

    def admissible(self, exprs) -> bool:
        exprs = np.asarray(list(exprs), dtype=complex)
        if exprs.size == 0:
            return True
        return bool(np.all(lattice_distance(self.ctx, exprs, half=True) >= self.margin))

    def draw(self, names, extra=None, groups=None):
        """One admissible configuration as a ``{name: complex}`` dict.

        Pairwise sums and differences are constrained within each of
        ``groups`` (lists of names; default: all names form one group).
        ``extra(cfg)`` may return further expressions that must also be
        admissible (for instance three-term sums).
        """
        names = list(names)
        groups = [names] if groups is None else [list(g) for g in groups]
        for _ in range(self.max_tries):
            vals = self.point(len(names))
            cfg = dict(zip(names, (complex(v) for v in vals)))
            exprs = [2 * v for v in cfg.values()] + list(cfg.values())
            for g in groups:
                exprs += pair_combinations([cfg[k] for k in g])
            if extra is not None:
                exprs += list(extra(cfg))
            if self.admissible(exprs):
                return cfg
        raise SamplerError(f"no admissible configuration of {names} in {self.max_tries} tries")

    def draw_many(self, names, count: int, extra=None, groups=None):
        """``count`` configurations, returned as ``{name: array of shape (count,)}``."""
        cfgs = [self.draw(names, extra, groups) for _ in range(count)]
        return {k: np.array([c[k] for c in cfgs]) for k in names}

    def couplings(self, scale: float = 1.0):
        """A random complex 4-vector of couplings."""
        return tuple(complex(x) for x in scale * (self.rng.normal(size=4) + 1j * self.rng.normal(size=4)))
