"""Run configuration: INI-style files with section headers, or a metadata sidecar."""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import DomainError

MODES = ("eig-sweep", "ep-locate", "spectrum", "cpa", "dynamics-check")
FORMATS = ("csv", "json")
RANGE_MODES = ("eig-sweep", "ep-locate")
MIRROR_RTOL = 1e-6


class ConfigError(DomainError):
    def __init__(self, message: str, residual: float | None = None):
        self.residual = residual
        super().__init__(message)


@dataclass
class RunConfig:
    mode: str
    p: float
    q: float
    kappa_2: float
    alpha: float
    beta: float
    kappa_int: float
    g_2: tuple | None = None
    g2_range: tuple | None = None
    g2_points: int | None = None
    omega_c: float = 0.0
    delta_1_sign: int = 1
    omega_range: tuple | None = None
    n_points: int = 2001
    path: str = "result"
    format: str = "csv"

    @property
    def mirrors(self):
        return (self.alpha, self.beta, self.kappa_int)

    def resolved_g2_points(self) -> int:
        if self.g2_points is not None:
            return self.g2_points
        return 2000 if self.mode == "ep-locate" else 201

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("g_2", "g2_range", "omega_range"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        for key in ("g_2", "g2_range", "omega_range"):
            if d.get(key) is not None:
                d[key] = tuple(float(v) for v in d[key])
        try:
            cfg = cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        validate(cfg)
        return cfg


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"not a number list: {text!r}") from None


def _get(parser, section, key, conv, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ConfigError(f"missing [{section}] {key}")
        return default
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from None


def parse_config_text(text: str) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    for section in ("run", "ratio", "mirror"):
        if not parser.has_section(section):
            raise ConfigError(f"missing section [{section}]")
    cfg = RunConfig(
        mode=_get(parser, "run", "mode", str.strip, required=True),
        p=_get(parser, "ratio", "p", float, required=True),
        q=_get(parser, "ratio", "q", float, required=True),
        kappa_2=_get(parser, "ratio", "kappa_2", float, required=True),
        g_2=_get(parser, "ratio", "g_2", _floats),
        g2_range=_get(parser, "ratio", "g2_range", _floats),
        g2_points=_get(parser, "ratio", "g2_points", int),
        omega_c=_get(parser, "ratio", "omega_c", float, 0.0),
        delta_1_sign=_get(parser, "ratio", "delta_1_sign", int, 1),
        alpha=_get(parser, "mirror", "alpha", float, required=True),
        beta=_get(parser, "mirror", "beta", float, required=True),
        kappa_int=_get(parser, "mirror", "kappa_int", float, required=True),
        omega_range=_get(parser, "probe", "omega_range", _floats),
        n_points=_get(parser, "probe", "n_points", int, 2001),
        path=_get(parser, "output", "path", str.strip, "result"),
        format=_get(parser, "output", "format", str.strip, "csv"),
    )
    validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    """Read an INI config, or the ``.meta.json`` sidecar written by a run."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if path.suffix == ".json":
        try:
            meta = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad sidecar {path}: {exc}") from None
        return RunConfig.from_dict(meta.get("config", meta))
    return parse_config_text(text)


def validate(cfg: RunConfig) -> None:
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {cfg.mode!r}")
    if cfg.format not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {cfg.format!r}")
    for name in ("p", "q", "kappa_2"):
        v = getattr(cfg, name)
        if not (math.isfinite(v) and v > 0):
            raise ConfigError(f"{name} must be positive, got {v!r}")
    for name in ("alpha", "beta", "kappa_int"):
        v = getattr(cfg, name)
        if not (math.isfinite(v) and v >= 0):
            raise ConfigError(f"{name} must be non-negative, got {v!r}")
    if cfg.delta_1_sign not in (1, -1):
        raise ConfigError(f"delta_1_sign must be +1 or -1, got {cfg.delta_1_sign!r}")

    has_g, has_range = cfg.g_2 is not None, cfg.g2_range is not None
    if has_g == has_range:
        raise ConfigError("exactly one of g_2 / g2_range must be given")
    if cfg.mode in RANGE_MODES and not has_range:
        raise ConfigError(f"mode {cfg.mode} needs g2_range")
    if cfg.mode in ("cpa", "dynamics-check") and not (has_g and len(cfg.g_2) == 1):
        raise ConfigError(f"mode {cfg.mode} needs a single g_2 value")
    if has_g and (not cfg.g_2 or any(not (math.isfinite(g) and g >= 0) for g in cfg.g_2)):
        raise ConfigError(f"g_2 values must be non-negative, got {cfg.g_2!r}")
    if has_range:
        if len(cfg.g2_range) != 2 or not cfg.g2_range[1] > cfg.g2_range[0]:
            raise ConfigError(f"g2_range must be 'low, high' with low < high, got {cfg.g2_range!r}")
        if cfg.resolved_g2_points() < 2:
            raise ConfigError("g2_points must be at least 2")
    if cfg.omega_range is not None and (len(cfg.omega_range) != 2 or not cfg.omega_range[1] > cfg.omega_range[0]):
        raise ConfigError(f"omega_range must be 'low, high' with low < high, got {cfg.omega_range!r}")
    if cfg.n_points < 2:
        raise ConfigError("n_points must be at least 2")
    if not cfg.path or Path(cfg.path).is_absolute():
        raise ConfigError(f"output path must be a relative file stem, got {cfg.path!r}")

    kappa_e = (cfg.p + 1.0) * cfg.kappa_2
    residual = cfg.alpha + cfg.beta - cfg.kappa_int - kappa_e
    if abs(residual) > MIRROR_RTOL * kappa_e:
        raise ConfigError(
            f"alpha + beta - kappa_int must equal (p + 1) kappa_2 = {kappa_e!r}; residual {residual!r}",
            residual,
        )
