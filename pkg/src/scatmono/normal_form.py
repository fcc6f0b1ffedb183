"""Constructive complex Morse lemma by the path method.

For ``H_t = z1 z2 + t R`` we look for a time-dependent field
``X_t = A d/dz1 + B d/dz2`` with ``dH_t . X_t = -R``; its flow ``Phi_t`` then
satisfies ``H_t(Phi_t(z)) = z1 z2`` for every ``t`` in ``[0, 1]``.  Writing
``R = G1 z1 + G2 z2`` and ``dR/dz_j = F_j z1 + E_j z2`` and matching the
coefficients of ``z1`` and ``z2`` turns the equation into the 2x2 system

    [[t F1, 1 + t F2], [1 + t E1, t E2]] @ (A, B) = -(G1, G2).

Where ``|E_i|, |F_i| < 1/16`` the matrix is boundedly invertible for
``t`` in ``[0, 2]``, which is what "certified" means below.

``Phi = Phi_1`` maps normalized coordinates to the original ones:
``H(Phi(z)) = z1 z2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation
from .integrator import DormandPrince, IntegratorConfig
from .phase_space import ComplexPair, PhasePoint, chart_to_real, real_to_chart
from .polynomial import FlatPolynomial, Poly, taylor_split

FACTOR_BOUND = 1.0 / 16.0
# 1 - 2*(1/16 + 1/16 + 2*(1/256 + 1/256)) with the triangle inequality as
# written is 46/64; the bound asserted for certified domains is 47/64.
DET_BOUND = 47.0 / 64.0
SINGULAR_DET = 1e-6


@dataclass(frozen=True)
class TaylorFactorization:
    """``R = G1 z1 + G2 z2`` and ``dR/dz_j = F_j z1 + E_j z2``."""

    G1: Poly
    G2: Poly
    F1: Poly
    E1: Poly
    F2: Poly
    E2: Poly

    def factors(self, z1, z2):
        """``(F1, E1, F2, E2)`` evaluated at ``(z1, z2)``."""
        return self.F1(z1, z2), self.E1(z1, z2), self.F2(z1, z2), self.E2(z1, z2)

    def max_factor(self, z1, z2):
        """Pointwise ``max(|E1|, |E2|, |F1|, |F2|)``."""
        return np.max(np.abs(np.stack(self.factors(z1, z2))), axis=0)

    @property
    def is_zero(self) -> bool:
        return not any((self.G1, self.G2, self.F1, self.E1, self.F2, self.E2))


def factor_flat(R: FlatPolynomial) -> TaylorFactorization:
    if not isinstance(R, FlatPolynomial):
        R = FlatPolynomial(R.terms)  # validates degree >= 3
    G1, G2 = taylor_split(R)
    F1, E1 = taylor_split(R.diff(1))
    F2, E2 = taylor_split(R.diff(2))
    return TaylorFactorization(G1, G2, F1, E1, F2, E2)


def _matrix_entries(t, f: TaylorFactorization, z1, z2):
    F1, E1, F2, E2 = f.factors(z1, z2)
    return t * F1, 1 + t * F2, 1 + t * E1, t * E2


def moser_matrix(t: float, z: ComplexPair, f: TaylorFactorization) -> np.ndarray:
    a, b, c, d = _matrix_entries(t, f, z.z1, z.z2)
    return np.array([[a, b], [c, d]], dtype=complex)


def moser_det(t, f: TaylorFactorization, z1, z2):
    a, b, c, d = _matrix_entries(t, f, z1, z2)
    return a * d - b * c


def torus_samples(radius: float, samples: int):
    """Points of the distinguished boundary ``|z1| = |z2| = radius``."""
    ang = 2 * np.pi * np.arange(samples) / samples
    u = radius * np.exp(1j * ang)
    z1, z2 = np.meshgrid(u, u, indexing="ij")
    return z1.ravel(), z2.ravel()


def domain_check(f: TaylorFactorization, radius: float, samples: int = 64) -> bool:
    """Whether ``|E_i|, |F_i| < 1/16`` on the polydisk of the given radius.

    A polynomial attains its maximum modulus over a polydisk on the
    distinguished boundary, so it is sampled there (and on the torus of
    half the radius as a guard against sparse sampling).
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    if f.is_zero:
        return True
    for r in (radius, 0.5 * radius):
        z1, z2 = torus_samples(r, samples)
        if np.any(f.max_factor(z1, z2) >= FACTOR_BOUND):
            return False
    return True


class MoserField:
    """The field ``X_t = A d/dz1 + B d/dz2`` of the path method."""

    def __init__(self, factorization: TaylorFactorization):
        self.factorization = factorization

    def __call__(self, t, w):
        """``(A, B)`` stacked along the last axis, for chart arrays of shape ``(..., 2)``."""
        f = self.factorization
        z1, z2 = w[..., 0], w[..., 1]
        a, b, c, d = _matrix_entries(t, f, z1, z2)
        det = a * d - b * c
        bad = np.abs(det) < SINGULAR_DET
        if np.any(bad):
            idx = int(np.flatnonzero(bad.ravel())[0])
            pt = w.reshape(-1, 2)[idx]
            raise DomainViolation(
                f"Moser matrix near-singular (|det| < {SINGULAR_DET}) at t={t:.6g}, z={pt}",
                point=pt,
                index=idx,
            )
        g1, g2 = f.G1(z1, z2), f.G2(z1, z2)
        out = np.empty_like(w)
        out[..., 0] = -(d * g1 - b * g2) / det
        out[..., 1] = -(a * g2 - c * g1) / det
        return out

    def eval(self, t: float, z: ComplexPair) -> tuple[complex, complex]:
        v = self(t, z.as_array())
        return complex(v[0]), complex(v[1])

    def residual(self, t, w):
        """``dH_t . X_t + R``, which vanishes for the exact field."""
        f = self.factorization
        z1, z2 = w[..., 0], w[..., 1]
        v = self(t, w)
        # dH_t/dz1 = z2 + t dR/dz1, with dR/dz_j reassembled from the factors
        F1, E1, F2, E2 = f.factors(z1, z2)
        d1 = z2 + t * (F1 * z1 + E1 * z2)
        d2 = z1 + t * (F2 * z1 + E2 * z2)
        R = f.G1(z1, z2) * z1 + f.G2(z1, z2) * z2
        return d1 * v[..., 0] + d2 * v[..., 1] + R


def moser_field_eval(mf: MoserField, t: float, z: ComplexPair) -> tuple[complex, complex]:
    return mf.eval(t, z)


class NormalizingMap:
    """Time-``t`` maps of the path-method flow, evaluated on demand.

    Every accepted integration state is checked against the pointwise
    certification bound ``|E_i|, |F_i| < 1/16``; leaving that region raises
    :class:`DomainViolation` with the offending point.  ``domain_radius`` is
    the polydisk on which the bound was verified up front.
    """

    def __init__(self, field: MoserField, domain_radius: float, cfg: IntegratorConfig):
        self.field = field
        self.domain_radius = float(domain_radius)
        self.cfg = cfg

    @property
    def is_identity(self) -> bool:
        return self.field.factorization.is_zero

    def _check(self, t, w):
        f = self.field.factorization
        m = f.max_factor(w[..., 0], w[..., 1])
        bad = ~(m < FACTOR_BOUND)
        if np.any(bad):
            idx = int(np.flatnonzero(bad.ravel())[0])
            pt = w.reshape(-1, 2)[idx]
            raise DomainViolation(
                f"normalizing flow left the certified region at t={t:.6g}: z={pt}",
                point=pt,
                index=idx,
            )

    def flow(self, w, t_from: float, t_to: float):
        """Transport chart points ``w`` (shape ``(..., 2)``) from time ``t_from`` to ``t_to``."""
        w = np.array(w, dtype=complex)
        if self.is_identity or t_from == t_to:
            return w
        self._check(t_from, w)
        y = w
        for _, _, _, y in DormandPrince(self.cfg).steps(
            self.field, t_from, w, t_to, check=self._check
        ):
            pass
        return y

    def forward(self, w, t: float = 1.0):
        """``Phi_t`` on chart arrays."""
        return self.flow(w, 0.0, t)

    def inverse(self, w, t: float = 1.0):
        """``Phi_t^{-1}`` on chart arrays."""
        return self.flow(w, t, 0.0)

    def __call__(self, z: ComplexPair, t: float = 1.0) -> ComplexPair:
        return ComplexPair.from_array(self.forward(z.as_array(), t))

    def apply_inverse(self, z: ComplexPair, t: float = 1.0) -> ComplexPair:
        return ComplexPair.from_array(self.inverse(z.as_array(), t))

    def forward_real(self, p: PhasePoint, t: float = 1.0) -> PhasePoint:
        return PhasePoint.from_array(chart_to_real(self.forward(real_to_chart(p.as_array()), t)))

    def inverse_real(self, p: PhasePoint, t: float = 1.0) -> PhasePoint:
        return PhasePoint.from_array(chart_to_real(self.inverse(real_to_chart(p.as_array()), t)))

    def directional(self, w, v, inverse: bool = False, rel_step: float = 1e-5):
        """Central-difference derivative of ``Phi`` (or ``Phi^{-1}``) at ``w`` along ``v``.

        ``w`` and ``v`` are chart arrays of shape ``(..., 2)``; the step is
        ``rel_step`` times the size of ``w`` (at least ``rel_step`` times
        ``1e-3``) along the unit direction of ``v``.  All evaluations go
        through one batched integration.
        """
        w = np.asarray(w, dtype=complex)
        v = np.asarray(v, dtype=complex)
        if self.is_identity:
            return v.copy()
        vn = np.linalg.norm(v, axis=-1, keepdims=True)
        safe = np.where(vn > 0, vn, 1.0)
        u = v / safe
        scale = np.maximum(np.linalg.norm(w, axis=-1, keepdims=True), 1e-3)
        h = rel_step * scale
        pts = np.stack([w + h * u, w - h * u])
        img = self.inverse(pts) if inverse else self.forward(pts)
        d = (img[0] - img[1]) / (2 * h)
        return np.where(vn > 0, d * vn, 0.0)


def normalize(
    R: FlatPolynomial, radius: float, cfg: IntegratorConfig | None = None, samples: int = 64
) -> NormalizingMap:
    f = factor_flat(R)
    if not domain_check(f, radius, samples):
        raise DomainViolation(
            f"|E_i|, |F_i| < 1/16 fails on the polydisk of radius {radius}; shrink the radius"
        )
    return NormalizingMap(MoserField(f), radius, cfg or IntegratorConfig())
