"""Canonical coordinates on R^4 and the complex chart.

Real phase space carries ``omega = dx^dp_x + dy^dp_y = -d alpha`` with
``alpha = p_x dx + p_y dy``.  The complex chart is

    z1 = x - i y,    z2 = p_x + i p_y,

in which ``q1 + i q2 = z1 z2``, ``alpha = Re(z2 dz1)`` and
``omega = Re(dz1 ^ dz2)``; the complex symplectic form of the chart is
``dz1 ^ dz2`` (:data:`COMPLEX_SYMPLECTIC_FORM`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

COMPLEX_SYMPLECTIC_FORM = "dz1 ^ dz2"


def _check_finite(name, values):
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"{name} has non-finite components: {values}")


@dataclass(frozen=True)
class PhasePoint:
    x: float
    y: float
    p_x: float
    p_y: float

    def __post_init__(self):
        _check_finite("PhasePoint", (self.x, self.y, self.p_x, self.p_y))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.p_x, self.p_y], dtype=float)

    @classmethod
    def from_array(cls, a) -> PhasePoint:
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass(frozen=True)
class TangentVector:
    dx: float
    dy: float
    dp_x: float
    dp_y: float

    def __post_init__(self):
        _check_finite("TangentVector", (self.dx, self.dy, self.dp_x, self.dp_y))

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dp_x, self.dp_y], dtype=float)

    @classmethod
    def from_array(cls, a) -> TangentVector:
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass(frozen=True)
class ComplexPair:
    z1: complex
    z2: complex

    def __post_init__(self):
        object.__setattr__(self, "z1", complex(self.z1))
        object.__setattr__(self, "z2", complex(self.z2))
        _check_finite(
            "ComplexPair", (self.z1.real, self.z1.imag, self.z2.real, self.z2.imag)
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.z1, self.z2], dtype=complex)

    @classmethod
    def from_array(cls, a) -> ComplexPair:
        return cls(complex(a[0]), complex(a[1]))

    def product(self) -> complex:
        return self.z1 * self.z2


@dataclass(frozen=True)
class EnergyMomentum:
    """A value ``(c1, c2) = (h1, h2)`` of the integral map."""

    c1: float
    c2: float

    def __post_init__(self):
        _check_finite("EnergyMomentum", (self.c1, self.c2))

    @property
    def c(self) -> complex:
        return complex(self.c1, self.c2)

    @classmethod
    def from_complex(cls, c) -> EnergyMomentum:
        c = complex(c)
        return cls(c.real, c.imag)


def to_complex(p: PhasePoint) -> ComplexPair:
    return ComplexPair(complex(p.x, -p.y), complex(p.p_x, p.p_y))


def from_complex(w: ComplexPair) -> PhasePoint:
    return PhasePoint(w.z1.real, -w.z1.imag, w.z2.real, w.z2.imag)


def real_to_chart(a):
    """Array version of :func:`to_complex`: ``(..., 4)`` reals to ``(..., 2)`` complex."""
    a = np.asarray(a, dtype=float)
    out = np.empty(a.shape[:-1] + (2,), dtype=complex)
    out[..., 0] = a[..., 0] - 1j * a[..., 1]
    out[..., 1] = a[..., 2] + 1j * a[..., 3]
    return out


def chart_to_real(w):
    """Array version of :func:`from_complex`."""
    w = np.asarray(w, dtype=complex)
    out = np.empty(w.shape[:-1] + (4,), dtype=float)
    out[..., 0] = w[..., 0].real
    out[..., 1] = -w[..., 0].imag
    out[..., 2] = w[..., 1].real
    out[..., 3] = w[..., 1].imag
    return out


def tangent_to_chart(v: TangentVector) -> tuple[complex, complex]:
    """Components ``(dz1(v), dz2(v))`` of a real tangent vector."""
    return complex(v.dx, -v.dy), complex(v.dp_x, v.dp_y)


def chart_to_tangent(v1: complex, v2: complex) -> TangentVector:
    return TangentVector(v1.real, -v1.imag, v2.real, v2.imag)


def q1(p: PhasePoint) -> float:
    return p.x * p.p_x + p.y * p.p_y


def q2(p: PhasePoint) -> float:
    return p.x * p.p_y - p.y * p.p_x


def alpha_eval(p: PhasePoint, v: TangentVector) -> float:
    """The primitive 1-form ``p_x dx + p_y dy`` at ``p`` applied to ``v``."""
    return p.p_x * v.dx + p.p_y * v.dy


def omega_eval(p: PhasePoint, v: TangentVector, w: TangentVector) -> float:
    """``omega(v, w)``; constant in ``p``, which is accepted for symmetry with alpha."""
    return (v.dx * w.dp_x - v.dp_x * w.dx) + (v.dy * w.dp_y - v.dp_y * w.dy)


# Matrix of omega in the basis (dx, dy, dp_x, dp_y): omega(v, w) = v @ OMEGA @ w.
OMEGA = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ]
)


def omega_chart(u1, u2, v1, v2):
    """``omega(u, v)`` for tangents given by their chart components; broadcasts."""
    return np.real(u1 * v2 - u2 * v1)


def alpha_chart(z2, v1):
    """``alpha`` at a point with chart coordinate ``z2`` applied to a tangent with ``dz1 = v1``."""
    return np.real(z2 * v1)
