"""Holomorphic polynomials in two complex variables ``(z1, z2)``.

A polynomial is stored as a mapping ``(a, b) -> coeff`` for the monomial
``coeff * z1**a * z2**b``.  Evaluation broadcasts over numpy arrays.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Mapping

import numpy as np

from .errors import ConfigError


class Poly:
    """Polynomial ``sum coeff * z1**a * z2**b`` with complex coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], complex] | None = None):
        clean = {}
        for (a, b), c in (terms or {}).items():
            a, b, c = int(a), int(b), complex(c)
            if a < 0 or b < 0:
                raise ConfigError(f"negative exponent in term {(a, b)}")
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ConfigError(f"non-finite coefficient for term {(a, b)}")
            if c != 0:
                clean[(a, b)] = clean.get((a, b), 0j) + c
        self._terms = {k: v for k, v in sorted(clean.items()) if v != 0}

    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return f"{type(self).__name__}(0)"
        body = " + ".join(f"({c:g})*z1^{a}*z2^{b}" for (a, b), c in self._terms.items())
        return f"{type(self).__name__}({body})"

    @property
    def degree(self) -> int:
        return max((a + b for a, b in self._terms), default=-1)

    @property
    def min_degree(self) -> int:
        return min((a + b for a, b in self._terms), default=-1)

    def __add__(self, other: Poly) -> Poly:
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0j) + v
        return Poly(out)

    def __neg__(self) -> Poly:
        return Poly({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            return Poly({k: v * other for k, v in self._terms.items()})
        out: dict[tuple[int, int], complex] = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                k = (a1 + a2, b1 + b2)
                out[k] = out.get(k, 0j) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def diff(self, var: int) -> Poly:
        """Partial derivative with respect to ``z1`` (``var=1``) or ``z2`` (``var=2``)."""
        out = {}
        for (a, b), c in self._terms.items():
            if var == 1 and a > 0:
                out[(a - 1, b)] = c * a
            elif var == 2 and b > 0:
                out[(a, b - 1)] = c * b
            elif var not in (1, 2):
                raise ValueError("var must be 1 or 2")
        return Poly(out)

    def __call__(self, z1, z2):
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.asarray(z2, dtype=complex)
        shape = np.broadcast(z1, z2).shape
        if not self._terms:
            return np.zeros(shape, dtype=complex)
        amax = max(a for a, _ in self._terms)
        bmax = max(b for _, b in self._terms)
        p1 = _powers(z1, amax)
        p2 = _powers(z2, bmax)
        out = np.zeros(shape, dtype=complex)
        for (a, b), c in self._terms.items():
            out = out + c * (p1[a] * p2[b])
        return out


def _powers(z, n):
    out = [np.ones_like(z)]
    for _ in range(n):
        out.append(out[-1] * z)
    return out


class FlatPolynomial(Poly):
    """A perturbation ``R`` whose monomials all have total degree >= 3.

    Such an ``R`` vanishes at the origin together with its first and second
    derivatives.
    """

    __slots__ = ()

    def __init__(self, terms=None):
        super().__init__(terms)
        for a, b in self._terms:
            if a + b < 3:
                raise ConfigError(
                    f"term z1^{a} z2^{b} has total degree {a + b} < 3; "
                    "perturbations must be flat to second order"
                )

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[int, int, complex]]) -> FlatPolynomial:
        """Build from ``(a, b, coeff)`` triples; repeated ``(a, b)`` keys are rejected."""
        out = {}
        for a, b, c in terms:
            if (a, b) in out:
                raise ConfigError(f"duplicate term z1^{a} z2^{b}")
            if a + b < 3:
                raise ConfigError(
                    f"term z1^{a} z2^{b} has total degree {a + b} < 3; "
                    "perturbations must be flat to second order"
                )
            out[(a, b)] = c
        return cls(out)

    @classmethod
    def zero(cls) -> FlatPolynomial:
        return cls({})


def taylor_split(p: Poly) -> tuple[Poly, Poly]:
    """Split ``p`` (with ``p(0) = 0``) as ``p = P1*z1 + P2*z2``.

    Each monomial ``z1^a z2^b`` goes to ``P1`` with weight ``a/(a+b)`` and to
    ``P2`` with weight ``b/(a+b)``; these are the weights the integral form
    of Taylor's theorem, ``P_j(z) = int_0^1 dp/dz_j(s z) ds``, produces.
    """
    p1, p2 = {}, {}
    for (a, b), c in p:
        n = a + b
        if n == 0:
            raise ValueError("constant term: p does not vanish at the origin")
        if a > 0:
            p1[(a - 1, b)] = c * a / n
        if b > 0:
            p2[(a, b - 1)] = c * b / n
    return Poly(p1), Poly(p2)
