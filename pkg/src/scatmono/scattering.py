"""Connection form, cross sections, transit times and scattering phases.

On a regular fiber ``z1 z2 = c`` of the standard system the connection
``theta = -Im dz1/z1`` satisfies ``theta(X_q2) = 1``.  The scattering phase
of a fiber is ``-1`` times the integral of ``theta`` along the path that

1. starts on the stable section ``xi_0(c) = (c/eps, eps)`` (where ``arg z2 = 0``),
2. follows the ``X_h1`` flow until ``|z1| = eps``,
3. closes along the ``X_q2`` orbit on that circle up to ``arg z1 = 0``,

which is the imaginary part of the complex transit time between the
normalized sections.  For a perturbed system the same recipe runs in the
original coordinates with ``theta`` pulled back by ``Phi^{-1}``, so along
the path ``theta`` integrates to minus the change of ``arg z1(Phi^{-1}(p))``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import PerturbedSystem, complex_flow
from .errors import (
    ConfigError,
    NumericalError,
    PoleError,
    SectionNotReached,
    UnwrapAmbiguity,
)
from .integrator import DormandPrince, IntegratorConfig, rk_step, solve
from .normal_form import NormalizingMap
from .phase_space import ComplexPair, EnergyMomentum

POLE_TOL = 1e-12
EVENT_TOL = 1e-10
MIN_SAMPLES = 16
MIN_RADIUS = 1e-3
# Longest real transit time searched for before giving up.
MAX_TRANSIT = 50.0


def _principal_arg(c: complex) -> float:
    """``Arg c`` in ``(-pi, pi]``."""
    a = math.atan2(c.imag, c.real)
    return math.pi if a == -math.pi else a


def _nonzero(c) -> complex:
    c = complex(c.c if isinstance(c, EnergyMomentum) else c)
    if c == 0:
        raise ValueError("c = 0 is the singular fiber; no transit there")
    return c


# sections -----------------------------------------------------------------


def xi_section(c, s: float, eps: float) -> ComplexPair:
    """Stable section point ``(c e^{is}/eps, e^{-is} eps)``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    e = cmath.exp(-1j * s) * eps
    return ComplexPair(complex(c) / e, e)


def eta_section(c, s: float, eps: float) -> ComplexPair:
    """Unstable section point ``(e^{is} eps, c e^{-is}/eps)``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    e = cmath.exp(1j * s) * eps
    return ComplexPair(e, complex(c) / e)


@dataclass(frozen=True)
class CrossSectionPair:
    epsilon: float

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError("epsilon must be positive")

    def stable(self, c, s: float = 0.0) -> ComplexPair:
        return xi_section(c, s, self.epsilon)

    def unstable(self, c, s: float = 0.0) -> ComplexPair:
        return eta_section(c, s, self.epsilon)


def section_transversality(c, eps: float) -> complex:
    """``det[d xi_0/dc, fiber tangent]`` at ``xi_0(c)``.

    The fiber through ``z`` is spanned (over C) by ``(z1, -z2)``; a nonzero
    determinant means the section curve crosses the fiber transversally.
    """
    z = xi_section(c, 0.0, eps)
    d = (1.0 / eps, 0.0)
    return d[0] * (-z.z2) - d[1] * z.z1


# transit times and phases of the standard system ---------------------------


def transit_time_standard(c, eps: float) -> complex:
    """Complex time ``tau`` with ``phi^H_tau(xi_s(c)) = eta_s(c)`` for ``H = z1 z2``."""
    c = _nonzero(c)
    if not eps > 0:
        raise ValueError("eps must be positive")
    return -complex(math.log(abs(c) / eps**2), _principal_arg(c))


def mu(c) -> float:
    """``-Arg c``, principal value in ``(-pi, pi]`` (so ``mu(-1) = -pi``)."""
    c = _nonzero(c)
    return -_principal_arg(c)


def connection_eval(w: ComplexPair, v) -> float:
    """``theta(w)(v) = -Im(v1 / z1)`` for a chart tangent ``v = (v1, v2)``."""
    if abs(w.z1) < POLE_TOL:
        raise PoleError(f"|z1| = {abs(w.z1):.3g} is within {POLE_TOL} of the pole")
    return -(complex(v[0]) / w.z1).imag


class ConnectionForm:
    """Evaluator for ``theta = -Im dz1/z1``."""

    def __call__(self, w: ComplexPair, v) -> float:
        return connection_eval(w, v)

    @staticmethod
    def real(x: float, y: float, dx: float, dy: float) -> float:
        """Same form in real coordinates: ``-(y dx - x dy)/(x^2 + y^2)``."""
        r2 = x * x + y * y
        if r2 < POLE_TOL**2:
            raise PoleError("evaluation at the pole x = y = 0")
        return -(y * dx - x * dy) / r2


def scattering_phase_standard(c) -> float:
    c = _nonzero(c)
    return -_principal_arg(c)


def scattering_phase_standard_numeric(
    c, T: float = 20.0, cfg: IntegratorConfig | None = None, arc_nodes: int = 64
) -> float:
    """The standard phase by quadrature of ``theta``.

    Integrates the ``q1`` flow through ``(c, 1)`` over ``[-T, T]`` together
    with the running integral of ``theta``, then adds the closing ``q2`` arc
    at ``t = T`` (trapezoid rule along the orbit).
    """
    c = _nonzero(c)
    cfg = cfg or IntegratorConfig()

    def rhs(_t, y):
        dz1, dz2 = y[0], -y[1]
        return np.array([dz1, dz2, -(dz1 / y[0]).imag], dtype=complex)

    y0 = np.array([c, 1.0, 0.0], dtype=complex)
    _, back = solve(rhs, (0.0, -T), y0, cfg, dense=False)
    _, fwd = solve(rhs, (0.0, T), y0, cfg, dense=False)
    along = (fwd[2] - back[2]).real
    z1 = complex(fwd[0])
    sweep = _principal_arg(z1)
    s = np.linspace(0.0, sweep, arc_nodes + 1)
    vals = [connection_eval(ComplexPair(z1 * cmath.exp(-1j * si), 1.0), (-1j * z1 * cmath.exp(-1j * si), 0.0)) for si in s]
    arc = float(np.trapezoid(vals, s)) if hasattr(np, "trapezoid") else float(np.trapz(vals, s))
    return -(along + arc)


# perturbed scattering -----------------------------------------------------


@dataclass(frozen=True)
class ScatteringRecord:
    c: EnergyMomentum
    transit_tau: complex
    phase: float
    entry_point: ComplexPair
    exit_point: ComplexPair


def _reindex(err: NumericalError, ids):
    if err.index is not None and 0 <= err.index < len(ids):
        err.index = int(ids[err.index])
    return err


def scattering_phases(
    sys: PerturbedSystem,
    nm: NormalizingMap,
    cs,
    eps: float,
    cfg: IntegratorConfig | None = None,
) -> list[ScatteringRecord]:
    """Scattering records for a batch of fiber values ``cs`` (complex numbers).

    All samples are advanced together on one step sequence.  A sample whose
    ``Phi^{-1}``-image crosses ``|z1| = eps`` is located by bisection and
    then dropped from the batch.  Numerical errors carry the index of the
    failing sample.
    """
    cfg = cfg or IntegratorConfig()
    if not eps > 0:
        raise ValueError("eps must be positive")
    cs = np.array([complex(c.c if isinstance(c, EnergyMomentum) else c) for c in cs])
    if np.any(cs == 0):
        raise ValueError("c = 0 is the singular fiber; no transit there")
    n = len(cs)
    xi = np.stack([cs / eps, np.full(n, eps, dtype=complex)], axis=-1)
    try:
        entry = nm.forward(xi)
        w0 = nm.inverse(entry)
    except NumericalError as e:
        raise _reindex(e, np.arange(n))
    g0 = np.abs(w0[:, 0]) - eps
    # |z1| grows along the forward flow near the fiber's hyperbolic part
    direction = np.where(g0 < 0, 1.0, -1.0)
    direction[np.abs(g0) <= 1e-12] = 0.0

    elapsed = np.zeros(n)
    darg = np.zeros(n)
    exit_pt = entry.copy()
    exit_w1 = w0[:, 0].copy()

    def rhs(_t, y):
        return sys.chart_field("h1", y)

    for sgn in (1.0, -1.0):
        ids = np.flatnonzero(direction == sgn)
        if ids.size:
            _transit(nm, rhs, sgn, ids, entry, w0, eps, cfg, elapsed, darg, exit_pt, exit_w1)

    out = []
    for j in range(n):
        phase = darg[j] - _principal_arg(complex(exit_w1[j]))
        out.append(
            ScatteringRecord(
                c=EnergyMomentum.from_complex(cs[j]),
                transit_tau=complex(elapsed[j], phase),
                phase=float(phase),
                entry_point=ComplexPair.from_array(entry[j]),
                exit_point=ComplexPair.from_array(exit_pt[j]),
            )
        )
    return out


def _transit(nm, rhs, sgn, ids, entry, w0, eps, cfg, elapsed, darg, exit_pt, exit_w1):
    """Advance the samples ``ids`` in time direction ``sgn`` until they cross."""
    active = ids.copy()
    y = entry[active].copy()
    w1 = w0[active, 0].copy()
    t = 0.0
    t_end = sgn * MAX_TRANSIT
    used = 0
    while active.size:
        # restarted whenever the batch shrinks
        crossed_any = False
        for t_prev, y_prev, t, y in DormandPrince(cfg).steps(rhs, t, y, t_end):
            used += 1
            if used > cfg.max_steps:
                raise SectionNotReached(
                    "max_steps exhausted before the section was reached", index=int(active[0])
                )
            try:
                w_new = nm.inverse(y)
            except NumericalError as e:
                raise _reindex(e, active)
            g = np.abs(w_new[:, 0]) - eps
            crossed = g * sgn >= 0
            if np.any(crossed):
                k = np.flatnonzero(crossed)
                h_star, y_star, w1_star = _bisect(nm, rhs, t_prev, y_prev[k], t - t_prev, eps, sgn, active[k])
                gid = active[k]
                elapsed[gid] = t_prev + h_star
                darg[gid] += np.angle(w1_star / w1[k])
                exit_pt[gid] = y_star
                exit_w1[gid] = w1_star
                keep = ~crossed
                darg[active[keep]] += np.angle(w_new[keep, 0] / w1[keep])
                active, y, w1 = active[keep], y[keep], w_new[keep, 0]
                crossed_any = True
                break
            darg[active] += np.angle(w_new[:, 0] / w1)
            w1 = w_new[:, 0]
        if not crossed_any and active.size:
            raise SectionNotReached(
                f"{active.size} trajectories did not reach |z1| = {eps} within |t| <= {MAX_TRANSIT}",
                index=int(active[0]),
            )


def _bisect(nm, rhs, t0, y0, h_full, eps, sgn, gids):
    """Per-sample step size ``h`` in ``[0, h_full]`` at which ``|z1(Phi^{-1})| = eps``."""
    m = y0.shape[0]
    lo = np.zeros(m)
    hi = np.full(m, h_full)
    while np.max(np.abs(hi - lo)) > EVENT_TOL:
        mid = 0.5 * (lo + hi)
        y_mid, _, _ = rk_step(rhs, t0, y0, mid[:, None])
        try:
            w = nm.inverse(y_mid)
        except NumericalError as e:
            raise _reindex(e, gids)
        past = (np.abs(w[:, 0]) - eps) * sgn >= 0
        hi = np.where(past, mid, hi)
        lo = np.where(past, lo, mid)
    h = 0.5 * (lo + hi)
    y_star, _, _ = rk_step(rhs, t0, y0, h[:, None])
    try:
        w = nm.inverse(y_star)
    except NumericalError as e:
        raise _reindex(e, gids)
    return h, y_star, w[:, 0]


def scattering_phase(
    sys: PerturbedSystem,
    nm: NormalizingMap,
    c,
    eps: float,
    cfg: IntegratorConfig | None = None,
) -> ScatteringRecord:
    """Scattering record of the fiber over ``c`` (an :class:`EnergyMomentum` or complex)."""
    return scattering_phases(sys, nm, [c], eps, cfg)[0]


# monodromy ----------------------------------------------------------------


@dataclass(frozen=True)
class MonodromyResult:
    radius: float
    samples: int
    phases: list
    winding: int
    max_unwrap_jump: float
    raw_phases: list = field(default_factory=list)
    angles: list = field(default_factory=list)


def unwrap_phases(raw) -> tuple[np.ndarray, float]:
    """Add multiples of ``2 pi`` so consecutive jumps are below ``pi``.

    Returns the unwrapped sequence and the largest remaining jump.
    """
    raw = np.asarray(raw, dtype=float)
    d = np.diff(raw)
    d = d - 2 * np.pi * np.round(d / (2 * np.pi))
    jumps = np.abs(d)
    big = np.flatnonzero(jumps >= np.pi)
    if big.size:
        raise UnwrapAmbiguity(
            f"consecutive phase jump of {jumps[big[0]]:.3g} rad at sample {big[0] + 1}",
            index=int(big[0] + 1),
        )
    out = np.concatenate([[raw[0]], raw[0] + np.cumsum(d)])
    return out, float(jumps.max()) if jumps.size else 0.0


def winding_number(phases) -> int:
    """Degree of a closed sampled phase loop from its unwrapped samples."""
    total = phases[-1] - phases[0]
    k = int(round(total / (2 * np.pi)))
    if abs(k * 2 * np.pi - total) > 0.1:
        raise UnwrapAmbiguity(
            f"phase change {total:.6g} is not within 0.1 of a multiple of 2*pi"
        )
    return k


def validity_annulus(eps: float) -> tuple[float, float]:
    return MIN_RADIUS, math.e**2 * eps**2


def monodromy_scan(
    sys: PerturbedSystem,
    nm: NormalizingMap,
    r: float,
    n: int,
    eps: float,
    cfg: IntegratorConfig | None = None,
    clockwise: bool = False,
) -> MonodromyResult:
    """Winding number of the scattering phase along ``|c| = r``.

    The loop is sampled at ``c_k = r e^{+-2 pi i k/n}``, ``k = 0..n``.
    """
    if n < MIN_SAMPLES:
        raise UnwrapAmbiguity(
            f"n = {n} samples cannot certify the unwrapping; need n >= {MIN_SAMPLES}"
        )
    lo, hi = validity_annulus(eps)
    if not lo <= r <= hi:
        raise ConfigError(f"r = {r} outside the validity annulus [{lo}, {hi:.6g}] for eps = {eps}")
    sign = -1.0 if clockwise else 1.0
    angles = sign * 2 * np.pi * np.arange(n + 1) / n
    cs = r * np.exp(1j * angles)
    recs = scattering_phases(sys, nm, cs, eps, cfg)
    raw = np.array([rec.phase for rec in recs])
    phases, jump = unwrap_phases(raw)
    return MonodromyResult(
        radius=float(r),
        samples=int(n),
        phases=[float(p) for p in phases],
        winding=winding_number(phases),
        max_unwrap_jump=jump,
        raw_phases=[float(p) for p in raw],
        angles=[float(a) for a in angles],
    )


# hyperbolic oscillator ----------------------------------------------------


def _oscillator_rhs(_t, y):
    x1, x2, e1, e2 = y
    return np.array([e2, -e1, -x2, x1])


def _oscillator_start(h: float, l: float) -> np.ndarray:
    a2 = l + math.hypot(l, h)
    if a2 > 0:
        a = math.sqrt(a2)
        return np.array([a, 0.0, h / a, 0.0])
    return np.array([0.0, 0.0, math.sqrt(-2 * l), 0.0])


def _mean_direction(y0, t0, t1, cfg, nodes=33):
    """Average unit ``(xi1, xi2)`` velocity over ``[t0, t1]`` (same sign as ``t1 - t0``)."""
    _, y = solve(_oscillator_rhs, (0.0, t0), y0, cfg, dense=False) if t0 else (0.0, y0)
    ts = np.linspace(t0, t1, nodes)
    acc = np.zeros(2)
    for a, b in zip(ts[:-1], ts[1:]):
        v = _oscillator_rhs(0, y)[:2]
        acc += v / np.linalg.norm(v)
        _, y = solve(_oscillator_rhs, (a, b), y, cfg, dense=False)
    v = _oscillator_rhs(0, y)[:2]
    acc += v / np.linalg.norm(v)
    if not np.all(np.isfinite(acc)):
        raise NumericalError("non-finite oscillator state")
    return acc / np.linalg.norm(acc)


def _deflection_at(y0, T, cfg):
    out = _mean_direction(y0, 0.95 * T, T, cfg)
    # outward ray of the incoming asymptote
    inc = -_mean_direction(y0, -0.95 * T, -T, cfg)
    cross = out[0] * inc[1] - out[1] * inc[0]
    return math.atan2(cross, float(np.dot(inc, out)))


def oscillator_deflection(h: float, l: float, T: float = 20.0, cfg: IntegratorConfig | None = None) -> float:
    """Angle between incoming and outgoing asymptotes of the ``u``-flow at ``u = h, v = l``.

    Raises :class:`NumericalError` if the estimate moved by more than
    ``1e-6`` (relative) between ``0.9 T`` and ``T``.
    """
    if h == 0 and l == 0:
        raise ValueError("(h, l) = (0, 0) is the singular value")
    if not T > 0:
        raise ValueError("T must be positive")
    cfg = cfg or IntegratorConfig()
    y0 = _oscillator_start(h, l)
    a = _deflection_at(y0, T, cfg)
    b = _deflection_at(y0, 0.9 * T, cfg)
    if abs(a - b) > 1e-6 * max(1.0, abs(a)):
        raise NumericalError(f"asymptote directions not stabilized at T = {T}")
    return a


# singular fiber -----------------------------------------------------------


def singular_fiber_probe(
    sys: PerturbedSystem,
    nm: NormalizingMap,
    s: float,
    eps: float,
    T: float,
    cfg: IntegratorConfig | None = None,
    branch: str = "stable",
) -> float:
    """Distance to the origin after flowing a singular-fiber section point.

    ``branch="stable"`` maps ``xi_s(0)`` through ``Phi`` and flows forward
    for time ``T``; ``"unstable"`` does the same for ``eta_s(0)`` backwards.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if branch == "stable":
        z, sgn = xi_section(0.0, s, eps), 1.0
    elif branch == "unstable":
        z, sgn = eta_section(0.0, s, eps), -1.0
    else:
        raise ValueError("branch must be 'stable' or 'unstable'")
    p = nm.forward(z.as_array())

    def rhs(_t, y):
        return sys.chart_field("h1", y)

    _, y = solve(rhs, (0.0, sgn * T), p, cfg or IntegratorConfig(), dense=False)
    return float(np.linalg.norm(y))


__all__ = [
    "ConnectionForm",
    "CrossSectionPair",
    "MonodromyResult",
    "ScatteringRecord",
    "complex_flow",
    "connection_eval",
    "eta_section",
    "monodromy_scan",
    "mu",
    "oscillator_deflection",
    "scattering_phase",
    "scattering_phase_standard",
    "scattering_phase_standard_numeric",
    "scattering_phases",
    "section_transversality",
    "singular_fiber_probe",
    "transit_time_standard",
    "unwrap_phases",
    "winding_number",
    "xi_section",
]
