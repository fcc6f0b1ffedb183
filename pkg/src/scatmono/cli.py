"""Command-line driver.

Each subcommand reads a config file, runs one computation and writes
``<command>.csv`` plus ``<command>.json`` into ``--out``.  Exit status is
0 on success, 2 for configuration errors and 3 for numerical failures.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .action import K_disk, K_loop, flatness_profile
from .config import RunConfig, load_config
from .dynamics import PerturbedSystem
from .errors import ConfigError, NumericalError
from .normal_form import factor_flat, moser_det, normalize
from .phase_space import chart_to_real, real_to_chart
from .scattering import monodromy_scan, mu, oscillator_deflection, scattering_phases

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


# output helpers -----------------------------------------------------------


def fmt(x) -> str:
    """17 significant digits for floats; everything else via ``str``."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return "null"
        return format(x, ".17g")
    raise TypeError(type(x))


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    return fmt(v)


def to_json(obj: dict) -> str:
    """A flat JSON object (values are scalars or lists of scalars), keys in insertion order."""
    body = ",\n".join(f'  "{k}": {_json_value(v)}' for k, v in obj.items())
    return "{\n" + body + "\n}\n"


def to_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Outputs:
    def __init__(self, out_dir, name):
        self.dir = Path(out_dir)
        self.name = name

    def csv(self, header, rows, suffix=""):
        atomic_write(self.dir / f"{self.name}{suffix}.csv", to_csv(header, rows))

    def json(self, obj):
        atomic_write(self.dir / f"{self.name}.json", to_json(obj))

    def svg(self, text):
        atomic_write(self.dir / f"{self.name}.svg", text)


def _system(cfg: RunConfig):
    R = cfg.perturbation
    return PerturbedSystem(R), normalize(R, cfg.radius, cfg.integrator)


# subcommands --------------------------------------------------------------


def cmd_monodromy(cfg: RunConfig, out: Outputs, rng=None, svg=False) -> dict:
    sys_, nm = _system(cfg)
    res = monodromy_scan(sys_, nm, cfg.r, cfg.n, cfg.eps, cfg.integrator, clockwise=cfg.clockwise)
    rows = []
    for k, (phi, raw, unw) in enumerate(zip(res.angles, res.raw_phases, res.phases)):
        c = cfg.r * complex(math.cos(phi), math.sin(phi))
        rows.append((k, phi, c.real, c.imag, raw, unw))
    out.csv(("k", "phi_k", "c1", "c2", "phase_raw", "phase_unwrapped"), rows)
    return {
        "status": "ok",
        "radius": res.radius,
        "samples": res.samples,
        "eps": float(cfg.eps),
        "winding": res.winding,
        "max_unwrap_jump": res.max_unwrap_jump,
    }


def _grid_points(radius, g):
    a = radius / math.sqrt(2)
    ax = np.linspace(-a, a, g)
    X = np.stack(np.meshgrid(ax, ax, ax, ax, indexing="ij"), axis=-1)
    return X.reshape(-1, 4)


def _polydisk_samples(rng, radius, n):
    r = radius * np.sqrt(rng.random((n, 2)))
    th = 2 * np.pi * rng.random((n, 2))
    return r * np.exp(1j * th)


def cmd_normalize(cfg: RunConfig, out: Outputs, rng, svg=False) -> dict:
    sys_, nm = _system(cfg)
    pts = _grid_points(cfg.grid_radius, cfg.grid)
    z = real_to_chart(pts)
    img = nm.forward(z)
    res = np.abs(sys_.H(img[:, 0], img[:, 1]) - z[:, 0] * z[:, 1])
    out.csv(("x", "y", "p_x", "p_y", "residual"), [(*p, r) for p, r in zip(pts, res)])
    zs = _polydisk_samples(rng, cfg.radius, cfg.det_samples)
    ts = rng.random(cfg.det_samples)
    det = np.abs(moser_det(ts, factor_flat(cfg.perturbation), zs[:, 0], zs[:, 1]))
    return {
        "status": "ok",
        "radius": float(cfg.radius),
        "grid": cfg.grid,
        "grid_radius": float(cfg.grid_radius),
        "max_residual": float(res.max()),
        "det_samples": cfg.det_samples,
        "min_abs_det": float(det.min()),
    }


def cmd_action(cfg: RunConfig, out: Outputs, rng, svg=False) -> dict:
    sys_, nm = _system(cfg)
    # loop/disk comparison on normalized points well inside the certified polydisk
    zs = _polydisk_samples(rng, 0.5 * cfg.radius, cfg.points)
    loop = K_loop(nm, zs)
    disk = np.array([K_disk(nm, z, cfg.disk_grid) for z in zs])
    pts = chart_to_real(zs)
    diff = np.abs(loop - disk)
    out.csv(
        ("x", "y", "p_x", "p_y", "K_loop", "K_disk", "abs_diff"),
        [(*p, a, b, d) for p, a, b, d in zip(pts, loop, disk, diff)],
    )
    seed = int(rng.integers(2**31))
    prof = flatness_profile(sys_, nm, cfg.flatness_radii, cfg.flatness_samples, seed=seed)
    out.csv(("radius", "sup_normalized"), list(zip(cfg.flatness_radii, prof)), suffix="_flatness")
    return {
        "status": "ok",
        "points": cfg.points,
        "max_loop_disk_diff": float(diff.max()),
        "flatness_radii": [float(r) for r in cfg.flatness_radii],
        "flatness": prof,
        "flatness_decreasing": all(b < a for a, b in zip(prof, prof[1:])),
    }


def _angular_gap(a, b):
    return abs(math.remainder(a - b, 2 * math.pi))


def polar_svg(angles, phases, title="") -> str:
    """Polar plot: sample k sits at angle ``phase_k`` and radius growing with the loop angle."""
    size, cx, cy, R = 400, 200, 200, 170
    span = max(abs(angles[-1] - angles[0]), 1e-300)
    coords = []
    for a, p in zip(angles, phases):
        rad = R * (0.25 + 0.75 * abs(a - angles[0]) / span)
        coords.append((cx + rad * math.cos(p), cy - rad * math.sin(p)))
    path = " ".join(f"{x:.3f},{y:.3f}" for x, y in coords)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<circle cx="{cx}" cy="{cy}" r="{R}" fill="none" stroke="#bbb"/>',
        f'<line x1="{cx - R}" y1="{cy}" x2="{cx + R}" y2="{cy}" stroke="#ddd"/>',
        f'<line x1="{cx}" y1="{cy - R}" x2="{cx}" y2="{cy + R}" stroke="#ddd"/>',
        f'<polyline points="{path}" fill="none" stroke="#1f5fa8" stroke-width="1.5"/>',
    ]
    parts += [f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2" fill="#1f5fa8"/>' for x, y in coords]
    if title:
        parts.append(f'<text x="10" y="20" font-family="sans-serif" font-size="13">{title}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_scatter(cfg: RunConfig, out: Outputs, rng=None, svg=False) -> dict:
    sys_, nm = _system(cfg)
    if cfg.c_values:
        cs = list(cfg.c_values)
    else:
        cs = [cfg.r * complex(math.cos(a), math.sin(a)) for a in 2 * math.pi * np.arange(cfg.n) / cfg.n]
    recs = scattering_phases(sys_, nm, cs, cfg.eps, cfg.integrator)
    rows, gaps = [], []
    for k, (c, rec) in enumerate(zip(cs, recs)):
        ref = mu(c)
        gaps.append(_angular_gap(rec.phase, ref))
        rows.append((k, c.real, c.imag, rec.transit_tau.real, rec.transit_tau.imag, rec.phase, ref))
    out.csv(("k", "c1", "c2", "tau_re", "tau_im", "phase", "mu"), rows)
    if svg:
        angles = [math.atan2(c.imag, c.real) % (2 * math.pi) for c in cs]
        out.svg(polar_svg(angles, [r.phase for r in recs], "scattering phase around the loop"))
    return {
        "status": "ok",
        "count": len(cs),
        "eps": float(cfg.eps),
        "phases": [r.phase for r in recs],
        "max_gap_to_mu": max(gaps),
    }


def cmd_oscillator(cfg: RunConfig, out: Outputs, rng=None, svg=False) -> dict:
    if cfg.pairs == "diagonal":
        if len(cfg.h_values) != len(cfg.l_values):
            raise ConfigError("pairs = diagonal needs as many h as l values")
        pairs = list(zip(cfg.h_values, cfg.l_values))
    else:
        pairs = [(h, l) for h in cfg.h_values for l in cfg.l_values]
    rows, errs = [], []
    for h, l in pairs:
        if h == 0 and l == 0:
            raise ConfigError("(h, l) = (0, 0) is the singular value")
        d = oscillator_deflection(h, l, cfg.T, cfg.integrator)
        ref = math.atan2(h, l)
        errs.append(abs(d - ref))
        rows.append((h, l, d, ref, abs(d - ref)))
    out.csv(("h", "l", "deflection", "atan2_h_l", "abs_error"), rows)
    return {"status": "ok", "T": float(cfg.T), "count": len(rows), "max_error": max(errs)}


COMMANDS = {
    "monodromy": cmd_monodromy,
    "normalize": cmd_normalize,
    "action": cmd_action,
    "scatter": cmd_scatter,
    "oscillator": cmd_oscillator,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scatmono", description="Scattering monodromy of focus-focus systems.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="run configuration file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=0, help="seed for random samples")
        if name == "scatter":
            sp.add_argument("--svg", action="store_true", help="also write a polar SVG plot")
    return p


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    out = Outputs(args.out, args.command)
    try:
        cfg = load_config(args.config)
        summary = COMMANDS[args.command](
            cfg, out, np.random.default_rng(args.seed), getattr(args, "svg", False)
        )
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        out.json(
            {
                "status": "error",
                "error": str(e),
                "error_type": type(e).__name__,
                "failing_index": e.index,
            }
        )
        return EXIT_NUMERICAL
    out.json(summary)
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
