"""Dormand-Prince 5(4) integrator with PI step-size control.

States are numpy arrays of any shape and of real or complex dtype, so a
whole batch of initial conditions can be advanced together on a single
step sequence.  The error norm is the maximum over the batch, so every
member meets the tolerance.  Using one step sequence for the batch also
makes the discrete flow a smooth function of the initial data, which is
what the finite-difference Jacobians elsewhere in the package rely on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BlowUpError, StepLimitError

# Butcher tableau (Dormand & Prince 1980).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_HAT = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B - _B_HAT

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0
_ALPHA = 0.17  # PI controller exponents (Hairer, Norsett & Wanner, II.4)
_BETA = 0.04


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    initial_step: float = 1e-2
    max_steps: int = 100_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "initial_step"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"IntegratorConfig.{name} must be positive, got {v}")
        if int(self.max_steps) < 1:
            raise ValueError("IntegratorConfig.max_steps must be >= 1")


def rk_step(fun: Callable, t: float, y: np.ndarray, h, k1=None):
    """One Dormand-Prince step of size ``h`` from ``(t, y)``.

    ``h`` may be a scalar or an array broadcastable against ``y`` (one step
    size per batch member, used when bisecting for section crossings; in
    that case ``fun`` receives the scalar ``t`` only and must be autonomous).

    Returns ``(y_new, err, k_last)`` where ``err`` is the embedded error
    estimate and ``k_last`` is the derivative at ``y_new`` (FSAL).
    """
    ks = [fun(t, y) if k1 is None else k1]
    for i in range(1, 7):
        dy = sum(a * k for a, k in zip(_A[i], ks) if a != 0.0)
        ks.append(fun(t + _C[i] * h if np.ndim(h) == 0 else t, y + h * dy))
    y_new = y + h * sum(b * k for b, k in zip(_B, ks) if b != 0.0)
    err = h * sum(e * k for e, k in zip(_E, ks))
    # the 7th stage was evaluated at y + h*sum(A[6]*k) == y_new
    return y_new, err, ks[-1]


def _error_norm(err, y, y_new, cfg):
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.max(np.abs(err) / scale)) if err.size else 0.0


class DormandPrince:
    """Adaptive stepper; :meth:`steps` yields accepted steps one by one."""

    def __init__(self, cfg: IntegratorConfig | None = None):
        self.cfg = cfg or IntegratorConfig()
        self.n_steps = 0
        self.n_rejected = 0

    def steps(self, fun, t0, y0, t_end, check=None):
        """Generate ``(t_prev, y_prev, t, y)`` for each accepted step from ``t0`` to ``t_end``.

        ``check(t, y)`` is called on every accepted state and may raise to
        abort the integration.
        """
        cfg = self.cfg
        y = np.array(y0, copy=True)
        t = float(t0)
        t_end = float(t_end)
        span = t_end - t
        if span == 0.0:
            return
        direction = 1.0 if span > 0 else -1.0
        h = min(cfg.initial_step, abs(span))
        err_prev = 1e-4
        k1 = fun(t, y)
        attempts = 0
        while direction * (t_end - t) > 0:
            if attempts >= cfg.max_steps:
                raise StepLimitError(
                    f"max_steps={cfg.max_steps} exhausted at t={t:.6g} before t_end={t_end:.6g}"
                )
            attempts += 1
            last = abs(t_end - t) <= h * (1 + 1e-12)
            step = (t_end - t) if last else direction * h
            y_new, err, k_new = rk_step(fun, t, y, step, k1)
            finite = np.all(np.isfinite(y_new)) and np.all(np.isfinite(err))
            if not finite:
                h *= 0.1
                self.n_rejected += 1
                if h < 1e-14 * max(1.0, abs(t)):
                    raise BlowUpError(f"state became non-finite near t={t:.6g}")
                continue
            en = _error_norm(err, y, y_new, cfg)
            if en <= 1.0:
                t_prev, y_prev = t, y
                t = t_end if last else t + step
                y = y_new
                k1 = k_new
                self.n_steps += 1
                if check is not None:
                    check(t, y)
                yield t_prev, y_prev, t, y
                fac = _SAFETY * max(en, 1e-10) ** (-_ALPHA) * err_prev**_BETA
                h = abs(step) * min(_FAC_MAX, max(_FAC_MIN, fac))
                err_prev = max(en, 1e-4)
            else:
                self.n_rejected += 1
                fac = _SAFETY * en ** (-_ALPHA)
                h = abs(step) * min(1.0, max(_FAC_MIN, fac))
                if h < 1e-14 * max(1.0, abs(t)):
                    raise BlowUpError(f"step size underflow near t={t:.6g}")


def solve(fun, t_span, y0, cfg: IntegratorConfig | None = None, check=None, dense=True):
    """Integrate ``y' = fun(t, y)`` over ``t_span``.

    Returns ``(ts, ys)`` with every accepted step when ``dense`` is true,
    otherwise only the end point ``(t_end, y_end)``.
    """
    t0, t1 = t_span
    y0 = np.asarray(y0)
    stepper = DormandPrince(cfg)
    ts, ys = [float(t0)], [np.array(y0, copy=True)]
    y_last = ys[0]
    for _, _, t, y in stepper.steps(fun, t0, y0, t1, check=check):
        y_last = y
        if dense:
            ts.append(t)
            ys.append(y)
    if not dense:
        return float(t1), y_last
    return np.array(ts), np.array(ys)
