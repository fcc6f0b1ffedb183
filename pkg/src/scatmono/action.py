"""The action ``I``: loop integrals of ``alpha`` over the periodic orbits.

In normalized coordinates the orbit of ``X_q2`` through ``z`` is
``gamma_z(s) = (e^{-is} z1, e^{is} z2)``, of period ``2 pi``.  Its image
under ``Phi`` is a closed loop on the fiber of the original system through
``w = Phi(z)``, and

    I(w) = K(Phi^{-1}(w)),    K(z) = 1/(2 pi) * int_{gamma_z} Phi^* alpha.

``K`` also has a disk form: with ``kappa_z(zeta) = (conj(zeta) z1, zeta z2)``,
whose boundary circle traces ``gamma_z``, Stokes' theorem and
``d alpha = -omega`` give ``K(z) = -1/(2 pi) * int_D kappa_z^* Phi^* omega``.
"""
from __future__ import annotations

import numpy as np

from .dynamics import PerturbedSystem
from .integrator import IntegratorConfig
from .normal_form import NormalizingMap
from .phase_space import PhasePoint, alpha_chart, omega_chart, real_to_chart

DEFAULT_NODES = 256


def _orbit(z, nodes):
    """Nodes ``gamma_z(s_k)`` and tangents ``X_q2`` there; shapes ``(nodes, ..., 2)``."""
    s = 2 * np.pi * np.arange(nodes) / nodes
    rot = np.exp(-1j * s).reshape((nodes,) + (1,) * (np.ndim(z) - 1))
    pts = np.empty((nodes,) + np.shape(z), dtype=complex)
    pts[..., 0] = rot * z[..., 0]
    pts[..., 1] = np.conj(rot) * z[..., 1]
    tan = np.empty_like(pts)
    tan[..., 0] = -1j * pts[..., 0]
    tan[..., 1] = 1j * pts[..., 1]
    return pts, tan


def loop_action_standard(z: PhasePoint, nodes: int = DEFAULT_NODES) -> float:
    """``1/(2 pi) * int alpha`` over the ``X_q2`` orbit through ``z`` (trapezoid rule)."""
    pts, tan = _orbit(real_to_chart(z.as_array()), nodes)
    return float(np.mean(alpha_chart(pts[..., 1], tan[..., 0])))


def _with_cfg(nm: NormalizingMap, cfg):
    if cfg is None or cfg == nm.cfg:
        return nm
    return NormalizingMap(nm.field, nm.domain_radius, cfg)


def K_loop(nm: NormalizingMap, z, nodes: int = DEFAULT_NODES):
    """Loop form of ``K`` at normalized chart points ``z`` (shape ``(..., 2)``)."""
    z = np.asarray(z, dtype=complex)
    pts, tan = _orbit(z, nodes)
    img = nm.forward(pts)
    dimg = nm.directional(pts, tan)
    return np.mean(alpha_chart(img[..., 1], dimg[..., 0]), axis=0)


def K_disk(nm: NormalizingMap, z, grid: int = 64):
    """Disk (Stokes) form of ``K`` at one normalized chart point ``z``.

    Gauss-Legendre in the radius (``grid`` nodes) times the trapezoid rule
    in the angle (``4 * grid`` nodes).
    """
    z = np.asarray(z, dtype=complex)
    r, wr = np.polynomial.legendre.leggauss(grid)
    r, wr = 0.5 * (r + 1), 0.5 * wr
    nphi = 4 * grid
    phi = 2 * np.pi * np.arange(nphi) / nphi
    R, P = np.meshgrid(r, phi, indexing="ij")
    e = np.exp(-1j * P)
    pts = np.stack([R * e * z[0], R * np.conj(e) * z[1]], axis=-1)
    d_r = np.stack([e * z[0], np.conj(e) * z[1]], axis=-1)
    d_phi = np.stack([-1j * R * e * z[0], 1j * R * np.conj(e) * z[1]], axis=-1)
    jac = nm.directional(np.stack([pts, pts]), np.stack([d_r, d_phi]))
    u, v = jac[0], jac[1]
    integrand = omega_chart(u[..., 0], u[..., 1], v[..., 0], v[..., 1])
    total = np.sum(wr[:, None] * integrand) * (2 * np.pi / nphi)
    return float(-total / (2 * np.pi))


def loop_action(
    sys: PerturbedSystem,
    nm: NormalizingMap,
    w: PhasePoint,
    cfg: IntegratorConfig | None = None,
    nodes: int = DEFAULT_NODES,
) -> float:
    """``I(w)`` for a point ``w`` in the original coordinates."""
    nm = _with_cfg(nm, cfg)
    z = nm.inverse(real_to_chart(w.as_array()))
    return float(K_loop(nm, z, nodes))


def disk_action(sys: PerturbedSystem, nm: NormalizingMap, z: PhasePoint, grid: int = 64) -> float:
    """``K(z)`` for a point ``z`` in normalized coordinates, by the disk integral."""
    return K_disk(nm, real_to_chart(z.as_array()), grid)


def sphere_directions(samples: int, seed: int = 0) -> np.ndarray:
    """``samples`` unit vectors in R^4, uniformly distributed, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((samples, 4))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def flatness_profile(
    sys: PerturbedSystem,
    nm: NormalizingMap,
    radii,
    samples: int,
    seed: int = 0,
    nodes: int = DEFAULT_NODES,
) -> list[float]:
    """``sup |I(w) - h2(w)| / rho^2`` over ``samples`` points with ``|w| = rho``, per radius.

    The same directions are used at every radius.
    """
    radii = [float(r) for r in radii]
    if not radii or samples < 1 or any(not r > 0 for r in radii):
        raise ValueError("flatness_profile needs positive radii and samples >= 1")
    dirs = sphere_directions(samples, seed)
    out = []
    for rho in radii:
        pts = rho * dirs
        z = nm.inverse(real_to_chart(pts))
        I = K_loop(nm, z, nodes)
        _, h2 = sys.integrals_array(pts)
        out.append(float(np.max(np.abs(I - h2)) / rho**2))
    return out
