"""Experiment configuration: a flat ``key = value`` text file with a typed schema.

Blank lines and ``#`` comments are ignored; lists are comma separated.
Unknown keys, duplicate keys and malformed values raise ``ConfigError``.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError

GAUGES = ("rxi", "lorenz", "unitary")


def _int_list(s: str) -> tuple:
    return tuple(int(x) for x in s.split(",") if x.strip())


def _float_list(s: str) -> tuple:
    return tuple(float(x) for x in s.split(",") if x.strip())


def _bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_str(s: str):
    return None if s.strip().lower() in ("", "none") else s.strip()


@dataclass(frozen=True)
class ExperimentConfig:
    dims: tuple = (4, 4)
    group: str = "U1"
    rep: str | None = None
    seed: int = 0
    spread: float = 0.5
    coupling: float = 1.0
    input: str | None = None          # archive to use instead of a random bundle
    gauge: str = "rxi"
    xi: float = 1.0
    v: float = 1.0
    e: float = 1.0
    g: float = 1.0
    solver_tol: float | None = None   # default: 1e-10 (U1) / 1e-8 (SU2 Newton)
    max_iter: int = 50
    jacobian: str = "analytic"
    beta: float = 1.0
    mu2: float = -1.0
    lam: float = 1.0
    n_configs: int = 10
    xis: tuple = (1.0, 10.0, 100.0, 1000.0)
    single_mode: bool = False
    site: int = 0
    eps: float = 1e-3
    out: str = "out"

    def __post_init__(self):
        if self.group not in ("U1", "SU2"):
            raise ConfigError(f"group must be U1 or SU2, got {self.group!r}")
        if self.rep is not None and self.rep not in ("U1-complex", "SU2-doublet", "SU2-real4"):
            raise ConfigError(f"unknown rep {self.rep!r}")
        if not self.dims or any(d < 1 for d in self.dims):
            raise ConfigError(f"dims must be positive integers, got {self.dims}")
        if self.gauge not in GAUGES:
            raise ConfigError(f"gauge must be one of {GAUGES}, got {self.gauge!r}")
        if self.jacobian not in ("analytic", "fd"):
            raise ConfigError("jacobian must be analytic or fd")
        for name in ("xi", "v"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.e == 0 or self.g == 0 or self.coupling == 0:
            raise ConfigError("couplings must be non-zero")
        if self.solver_tol is not None and not self.solver_tol > 0:
            raise ConfigError("solver_tol must be positive")
        if self.n_configs < 1 or self.max_iter < 1:
            raise ConfigError("n_configs and max_iter must be at least 1")
        if not self.xis or any(x <= 0 for x in self.xis):
            raise ConfigError("xis must be a non-empty list of positive values")
        if self.spread < 0 or self.eps <= 0:
            raise ConfigError("spread must be non-negative and eps positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

    @property
    def tol(self) -> float:
        if self.solver_tol is not None:
            return self.solver_tol
        return 1e-10 if self.group == "U1" else 1e-8


_PARSERS = {
    "dims": _int_list, "group": str.strip, "rep": _opt_str, "seed": int, "spread": float,
    "coupling": float, "input": _opt_str, "gauge": lambda s: s.strip().lower(), "xi": float,
    "v": float, "e": float, "g": float, "solver_tol": float, "max_iter": int,
    "jacobian": str.strip, "beta": float, "mu2": float, "lam": float, "n_configs": int,
    "xis": _float_list, "single_mode": _bool, "site": int, "eps": float, "out": str.strip,
}
assert set(_PARSERS) == {f.name for f in fields(ExperimentConfig)}


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
