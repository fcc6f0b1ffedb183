"""Flows of the standard and perturbed focus-focus systems.

The perturbed system is given by a holomorphic Hamiltonian
``H(z1, z2) = z1*z2 + R(z1, z2)`` in the complex chart, with real integrals
``h1 = Re H`` and ``h2 = Im H``.  For holomorphic ``H`` the real Hamiltonian
vector fields (convention ``X_h -| omega = dh``) are

    X_h1:  z1' =  dH/dz2,     z2' = -dH/dz1
    X_h2:  z1' = -i dH/dz2,   z2' =  i dH/dz1

so ``X_h1`` is the real part of the complex Hamiltonian field of ``H`` and
the two fields commute.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import RangeError
from .integrator import IntegratorConfig, solve
from .phase_space import (
    ComplexPair,
    EnergyMomentum,
    PhasePoint,
    TangentVector,
    chart_to_real,
    chart_to_tangent,
    real_to_chart,
    to_complex,
)
from .polynomial import FlatPolynomial

Which = Literal["h1", "h2"]

# exp(709.78) overflows a double
MAX_REAL_TIME = 700.0


def _guard(t_real: float) -> None:
    if not math.isfinite(t_real) or abs(t_real) > MAX_REAL_TIME:
        raise RangeError(f"|Re time| = {abs(t_real):.6g} exceeds {MAX_REAL_TIME}")


def standard_flow_q1(t: float, p: PhasePoint) -> PhasePoint:
    _guard(t)
    e, ei = math.exp(t), math.exp(-t)
    return PhasePoint(e * p.x, e * p.y, ei * p.p_x, ei * p.p_y)


def standard_flow_q2(s: float, p: PhasePoint) -> PhasePoint:
    """Rotate ``(x, y)`` and ``(p_x, p_y)`` by angle ``s``; in the chart ``(e^{-is} z1, e^{is} z2)``."""
    c, sn = math.cos(s), math.sin(s)
    return PhasePoint(
        c * p.x - sn * p.y,
        sn * p.x + c * p.y,
        c * p.p_x - sn * p.p_y,
        sn * p.p_x + c * p.p_y,
    )


def complex_flow(tau: complex, w: ComplexPair) -> ComplexPair:
    """Complex-time flow ``(e^tau z1, e^-tau z2)`` of ``X_H`` for ``H = z1 z2``."""
    tau = complex(tau)
    _guard(tau.real)
    e = np.exp(tau)
    return ComplexPair(e * w.z1, w.z2 / e)


@dataclass(frozen=True)
class PerturbedSystem:
    """Integrable system ``h_i = q_i + r_i`` with ``r1 + i r2 = R`` in the chart."""

    perturbation: FlatPolynomial = field(default_factory=FlatPolynomial.zero)

    def __post_init__(self):
        if not isinstance(self.perturbation, FlatPolynomial):
            object.__setattr__(self, "perturbation", FlatPolynomial(self.perturbation.terms))
        object.__setattr__(self, "_dR1", self.perturbation.diff(1))
        object.__setattr__(self, "_dR2", self.perturbation.diff(2))

    @property
    def is_standard(self) -> bool:
        return not self.perturbation

    # complex-chart evaluations; all broadcast over arrays
    def H(self, z1, z2):
        return z1 * z2 + self.perturbation(z1, z2)

    def dH(self, z1, z2):
        """``(dH/dz1, dH/dz2)``."""
        return z2 + self._dR1(z1, z2), z1 + self._dR2(z1, z2)

    def chart_field(self, which: Which, w):
        """Vector field of ``h1`` or ``h2`` on chart arrays of shape ``(..., 2)``."""
        w = np.asarray(w, dtype=complex)
        d1, d2 = self.dH(w[..., 0], w[..., 1])
        out = np.empty_like(w)
        if which == "h1":
            out[..., 0] = d2
            out[..., 1] = -d1
        elif which == "h2":
            out[..., 0] = -1j * d2
            out[..., 1] = 1j * d1
        else:
            raise ValueError(f"which must be 'h1' or 'h2', got {which!r}")
        return out

    def h1(self, p: PhasePoint) -> float:
        w = to_complex(p)
        return float(np.real(self.H(w.z1, w.z2)))

    def h2(self, p: PhasePoint) -> float:
        w = to_complex(p)
        return float(np.imag(self.H(w.z1, w.z2)))

    def integral_map(self, p: PhasePoint) -> EnergyMomentum:
        w = to_complex(p)
        return EnergyMomentum.from_complex(complex(self.H(w.z1, w.z2)))

    def integrals_array(self, pts):
        """``(h1, h2)`` for real points of shape ``(..., 4)``."""
        w = real_to_chart(pts)
        v = self.H(w[..., 0], w[..., 1])
        return np.real(v), np.imag(v)


@dataclass(frozen=True)
class Trajectory:
    times: tuple[float, ...]
    points: tuple[PhasePoint, ...]
    field_tag: str

    def __post_init__(self):
        if len(self.times) != len(self.points):
            raise ValueError("times and points differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("trajectory times must be strictly increasing")

    def as_array(self) -> np.ndarray:
        return np.array([p.as_array() for p in self.points])

    @property
    def end(self) -> PhasePoint:
        return self.points[-1]

    def arc_length(self) -> float:
        a = self.as_array()
        return float(np.sum(np.linalg.norm(np.diff(a, axis=0), axis=1)))


def hamiltonian_vector_field(sys: PerturbedSystem, which: Which, p: PhasePoint) -> TangentVector:
    """``X_h`` at ``p``; gradients of ``R`` are exact (term-wise derivatives in the chart)."""
    v = sys.chart_field(which, to_complex(p).as_array())
    return chart_to_tangent(complex(v[0]), complex(v[1]))


def integrate(
    sys: PerturbedSystem,
    which: Which,
    p0: PhasePoint,
    t_span: tuple[float, float],
    cfg: IntegratorConfig | None = None,
) -> Trajectory:
    """Integrate the flow of ``h1`` or ``h2`` from ``p0`` over ``t_span = (t0, t1)``, ``t0 < t1``."""
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError(f"t_span must be increasing, got {t_span}")
    cfg = cfg or IntegratorConfig()

    def rhs(_t, w):
        return sys.chart_field(which, w)

    ts, ws = solve(rhs, (t0, t1), to_complex(p0).as_array(), cfg)
    pts = chart_to_real(ws)
    return Trajectory(
        times=tuple(float(t) for t in ts),
        points=tuple(PhasePoint.from_array(a) for a in pts),
        field_tag=which,
    )
