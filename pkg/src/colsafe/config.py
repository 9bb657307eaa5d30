"""Experiment configuration: a strict INI file.

Unknown sections or keys are hard errors with the offending line
number, not warnings: a silently ignored typo in delta or the
Lipschitz constant would invalidate every safety claim downstream.
serialize_config(parse_config(text)) round-trips losslessly.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, fields
from typing import Optional

from .benchmarks import _FACTORIES
from .kernel import FAMILIES


class ConfigError(Exception):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass
class ExperimentConfig:
    problem: str = "synthetic2d"
    method: str = "colsafe"
    budget: int = 200
    seed: int = 0
    repeats: int = 1
    out: str = "runs/out"
    record_timing: bool = True

    kernel_family: str = "epanechnikov"
    kernel_bandwidth: float = 0.08
    kernel_length_scale: float = 0.1

    sigma: float = 0.01
    delta: float = 0.05
    lipschitz: Optional[float] = None        # None: use the problem's L

    gp_length_scale: float = 0.1
    gp_signal_std: float = 1.0
    gp_noise_std: float = 0.01
    gp_interval_scale: float = 2.0

    conc_deltas: tuple = (0.01, 0.05, 0.1)
    conc_ns: tuple = (100, 1000)
    conc_trials: int = 10000
    conc_sigma: float = 1.0
    conc_noises: tuple = ("gaussian", "rademacher")
    conc_etas: tuple = (-1.0, -0.5, 0.5, 1.0)
    conc_mg_n: int = 50
    conc_mg_trials: int = 100000
    conc_bound_scale: float = 1.0


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_opt_float(s: str) -> Optional[float]:
    return None if s.strip().lower() == "auto" else float(s)


def _parse_floats(s: str) -> tuple:
    return tuple(float(x) for x in s.split(",") if x.strip())


def _parse_ints(s: str) -> tuple:
    return tuple(int(x) for x in s.split(",") if x.strip())


def _parse_strs(s: str) -> tuple:
    return tuple(x.strip() for x in s.split(",") if x.strip())


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


# (section, key) -> (field name, parser)
_SCHEMA = {
    ("experiment", "problem"): ("problem", str),
    ("experiment", "method"): ("method", str),
    ("experiment", "budget"): ("budget", int),
    ("experiment", "seed"): ("seed", int),
    ("experiment", "repeats"): ("repeats", int),
    ("experiment", "out"): ("out", str),
    ("experiment", "record_timing"): ("record_timing", _parse_bool),
    ("kernel", "family"): ("kernel_family", str),
    ("kernel", "bandwidth"): ("kernel_bandwidth", float),
    ("kernel", "length_scale"): ("kernel_length_scale", float),
    ("estimator", "sigma"): ("sigma", float),
    ("estimator", "delta"): ("delta", float),
    ("estimator", "lipschitz"): ("lipschitz", _parse_opt_float),
    ("gp", "length_scale"): ("gp_length_scale", float),
    ("gp", "signal_std"): ("gp_signal_std", float),
    ("gp", "noise_std"): ("gp_noise_std", float),
    ("gp", "interval_scale"): ("gp_interval_scale", float),
    ("concentration", "deltas"): ("conc_deltas", _parse_floats),
    ("concentration", "ns"): ("conc_ns", _parse_ints),
    ("concentration", "trials"): ("conc_trials", int),
    ("concentration", "sigma"): ("conc_sigma", float),
    ("concentration", "noises"): ("conc_noises", _parse_strs),
    ("concentration", "etas"): ("conc_etas", _parse_floats),
    ("concentration", "mg_n"): ("conc_mg_n", int),
    ("concentration", "mg_trials"): ("conc_mg_trials", int),
    ("concentration", "bound_scale"): ("conc_bound_scale", float),
}

_SECTIONS = ("experiment", "kernel", "estimator", "gp", "concentration")


def _find_line(text: str, section: str, key: Optional[str]) -> Optional[int]:
    """Best-effort line anchor for an error message."""
    lines = text.splitlines()
    sec_pat = re.compile(r"^\s*\[" + re.escape(section) + r"\]")
    in_section = False
    for ln, raw in enumerate(lines, start=1):
        if re.match(r"^\s*\[", raw):
            if sec_pat.match(raw):
                if key is None:
                    return ln
                in_section = True
            else:
                in_section = False
            continue
        if in_section and key is not None \
                and re.match(r"^\s*" + re.escape(key) + r"\s*[=:]", raw):
            return ln
    return None


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).replace("\n", " "), line) from exc
    cfg = ExperimentConfig()
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]",
                              _find_line(text, section, None))
        for key, raw in parser.items(section):
            entry = _SCHEMA.get((section, key))
            if entry is None:
                raise ConfigError(f"unknown key {key!r} in section [{section}]",
                                  _find_line(text, section, key))
            name, conv = entry
            try:
                value = conv(raw)
            except ValueError as exc:
                raise ConfigError(
                    f"bad value for {section}.{key}: {exc}",
                    _find_line(text, section, key)) from exc
            setattr(cfg, name, value)
    _validate(cfg)
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(cfg: ExperimentConfig) -> str:
    by_section: dict = {s: [] for s in _SECTIONS}
    name_to_loc = {name: (sec, key) for (sec, key), (name, _) in _SCHEMA.items()}
    for f in fields(cfg):
        sec, key = name_to_loc[f.name]
        by_section[sec].append((key, getattr(cfg, f.name)))
    chunks = []
    for sec in _SECTIONS:
        chunks.append(f"[{sec}]")
        for key, value in by_section[sec]:
            chunks.append(f"{key} = {_fmt(value)}")
        chunks.append("")
    return "\n".join(chunks)


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.problem not in _FACTORIES:
        raise ConfigError(f"unknown problem {cfg.problem!r}")
    if cfg.method not in ("colsafe", "gp-safeopt"):
        raise ConfigError(f"unknown method {cfg.method!r}")
    if cfg.budget < 1:
        raise ConfigError("budget must be >= 1")
    if cfg.repeats < 1:
        raise ConfigError("repeats must be >= 1")
    if cfg.seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    if cfg.kernel_family not in FAMILIES:
        raise ConfigError(f"unknown kernel family {cfg.kernel_family!r}")
    if not cfg.kernel_bandwidth > 0:
        raise ConfigError("kernel bandwidth must be positive")
    if not cfg.kernel_length_scale > 0:
        raise ConfigError("kernel length_scale must be positive")
    if not cfg.sigma > 0:
        raise ConfigError("sigma must be positive")
    if not 0 < cfg.delta < 1:
        raise ConfigError("delta must lie in (0, 1)")
    if cfg.lipschitz is not None and not cfg.lipschitz > 0:
        raise ConfigError("lipschitz must be positive (or 'auto')")
    for nm in ("gp_length_scale", "gp_signal_std", "gp_noise_std",
               "gp_interval_scale"):
        if not getattr(cfg, nm) > 0:
            raise ConfigError(f"{nm.replace('gp_', 'gp.')} must be positive")
    for d in cfg.conc_deltas:
        if not 0 < d < 1:
            raise ConfigError("concentration deltas must lie in (0, 1)")
    for n in cfg.conc_ns:
        if n < 1:
            raise ConfigError("concentration ns must be >= 1")
    if cfg.conc_trials < 1 or cfg.conc_mg_trials < 1 or cfg.conc_mg_n < 1:
        raise ConfigError("concentration trial counts must be >= 1")
    if not cfg.conc_sigma > 0:
        raise ConfigError("concentration sigma must be positive")
    for nz in cfg.conc_noises:
        if nz not in ("gaussian", "rademacher"):
            raise ConfigError(f"unknown noise family {nz!r}")
    if not cfg.conc_bound_scale > 0:
        raise ConfigError("bound_scale must be positive")
