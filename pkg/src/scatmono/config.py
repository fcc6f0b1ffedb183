"""Run configuration: a flat ``key = value`` format with ``[section]`` headers.

Lists are written as repeated keys, one value per line::

    [system]
    term = 2 2 0.05 0.0     # a b re(coeff) im(coeff)
    radius = 0.3

    [integrator]
    rel_tol = 1e-10

``#`` and ``;`` start comments.  Unknown sections or keys are errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .integrator import IntegratorConfig
from .polynomial import FlatPolynomial

# section -> key -> (attribute, parser, repeated)
_SCHEMA = {
    "system": {
        "term": ("terms", "term", True),
        "radius": ("radius", "pos", False),
    },
    "integrator": {
        "rel_tol": ("rel_tol", "pos", False),
        "abs_tol": ("abs_tol", "pos", False),
        "initial_step": ("initial_step", "pos", False),
        "max_steps": ("max_steps", "posint", False),
    },
    "scan": {
        "eps": ("eps", "pos", False),
        "r": ("r", "pos", False),
        "n": ("n", "posint", False),
        "clockwise": ("clockwise", "bool", False),
    },
    "normalize": {
        "grid": ("grid", "posint", False),
        "radius": ("grid_radius", "pos", False),
        "det_samples": ("det_samples", "posint", False),
    },
    "action": {
        "points": ("points", "posint", False),
        "disk_grid": ("disk_grid", "posint", False),
        "flatness_radius": ("flatness_radii", "pos", True),
        "flatness_samples": ("flatness_samples", "posint", False),
    },
    "scatter": {
        "c": ("c_values", "complex", True),
    },
    "oscillator": {
        "h": ("h_values", "float", True),
        "l": ("l_values", "float", True),
        "T": ("T", "pos", False),
        "pairs": ("pairs", "pairs", False),
    },
}


@dataclass
class RunConfig:
    terms: list = field(default_factory=list)
    radius: float = 0.3
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    initial_step: float = 1e-2
    max_steps: int = 100_000
    eps: float = 0.5
    r: float = 0.25
    n: int = 256
    clockwise: bool = False
    grid: int = 9
    grid_radius: float = 0.2
    det_samples: int = 10_000
    points: int = 10
    disk_grid: int = 64
    flatness_radii: list = field(default_factory=lambda: [0.2, 0.1, 0.05])
    flatness_samples: int = 32
    c_values: list = field(default_factory=list)
    h_values: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    l_values: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    T: float = 20.0
    pairs: str = "grid"

    @property
    def perturbation(self) -> FlatPolynomial:
        return FlatPolynomial.from_terms(
            (a, b, complex(re, im)) for a, b, re, im in self.terms
        )

    @property
    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(self.rel_tol, self.abs_tol, self.initial_step, self.max_steps)


def _num(text: str, where: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{where}: {text!r} is not a number") from None
    if not math.isfinite(v):
        raise ConfigError(f"{where}: value must be finite")
    return v


def _int(text: str, where: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{where}: {text!r} is not an integer") from None


def _parse_value(kind: str, text: str, where: str):
    parts = text.split()
    if kind == "term":
        if len(parts) != 4:
            raise ConfigError(f"{where}: expected 'a b re im', got {text!r}")
        a, b = _int(parts[0], where), _int(parts[1], where)
        if a < 0 or b < 0:
            raise ConfigError(f"{where}: exponents must be non-negative in term {text!r}")
        if a + b < 3:
            raise ConfigError(
                f"{where}: term z1^{a} z2^{b} has total degree {a + b} < 3 "
                "(perturbations must be flat to second order)"
            )
        return (a, b, _num(parts[2], where), _num(parts[3], where))
    if kind == "complex":
        if len(parts) != 2:
            raise ConfigError(f"{where}: expected 're im', got {text!r}")
        return complex(_num(parts[0], where), _num(parts[1], where))
    if len(parts) != 1:
        raise ConfigError(f"{where}: expected one value, got {text!r}")
    if kind == "float":
        return _num(text, where)
    if kind == "pos":
        v = _num(text, where)
        if not v > 0:
            raise ConfigError(f"{where}: must be positive, got {text}")
        return v
    if kind == "posint":
        v = _int(text, where)
        if v < 1:
            raise ConfigError(f"{where}: must be a positive integer, got {text}")
        return v
    if kind == "bool":
        low = text.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConfigError(f"{where}: expected true/false, got {text!r}")
    if kind == "pairs":
        if text not in ("grid", "diagonal"):
            raise ConfigError(f"{where}: pairs must be 'grid' or 'diagonal'")
        return text
    raise AssertionError(kind)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    cfg = RunConfig()
    seen_lists: set[str] = set()
    seen_scalars: set[str] = set()
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{where}: malformed section header {line!r}")
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"{where}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        if section is None:
            raise ConfigError(f"{where}: key outside of any section")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _SCHEMA[section]:
            raise ConfigError(f"{where}: unknown key {key!r} in [{section}]")
        attr, kind, repeated = _SCHEMA[section][key]
        v = _parse_value(kind, value, f"{where} [{section}] {key}")
        if repeated:
            if attr not in seen_lists:
                setattr(cfg, attr, [])
                seen_lists.add(attr)
            getattr(cfg, attr).append(v)
        else:
            if attr in seen_scalars:
                raise ConfigError(f"{where}: [{section}] {key} given twice")
            seen_scalars.add(attr)
            setattr(cfg, attr, v)
    # cross-field checks
    keys = [(a, b) for a, b, _, _ in cfg.terms]
    dup = {k for k in keys if keys.count(k) > 1}
    if dup:
        a, b = sorted(dup)[0]
        raise ConfigError(f"{source}: duplicate term z1^{a} z2^{b}")
    try:
        cfg.integrator
    except ValueError as e:
        raise ConfigError(f"{source}: {e}") from None
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    return parse_config(text, str(path))
