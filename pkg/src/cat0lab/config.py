"""Experiment configuration: key = value text files plus flag overrides."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    out: str = "reports"
    ball: int = 12
    witness_ball: int = 6
    horizon: int = 20
    radii: tuple[float, ...] = ()
    eps0: float = 1.0
    tol: float = 1e-6
    seed: int = 0
    threads: int = 1
    figures: bool = True
    i_max: int = 8
    family: str = "z2_lattice"
    pq_list: tuple[tuple[int, int], ...] = ((1, 1), (2, 1))
    word_length_max: int = 6
    identity_sanity: bool = False
    n_sq: Fraction = Fraction(1, 2)
    m_sq: Fraction = Fraction(1, 2)
    chain_horizon: int = 50

    def echo(self) -> dict:
        return {
            "experiment": self.experiment, "out": self.out, "ball": self.ball,
            "witness_ball": self.witness_ball, "horizon": self.horizon,
            "radii": list(self.radii), "eps0": self.eps0, "tol": self.tol,
            "seed": self.seed, "threads": self.threads, "figures": self.figures,
            "i_max": self.i_max, "family": self.family,
            "pq_list": [list(pq) for pq in self.pq_list],
            "word_length_max": self.word_length_max,
            "identity_sanity": self.identity_sanity,
            "N_sq": str(self.n_sq), "M_sq": str(self.m_sq),
            "chain_horizon": self.chain_horizon,
        }


_DEFAULTS = {
    "bowers_ruane": dict(horizon=200, ball=12, witness_ball=6),
    "doubling_family": dict(horizon=20, radii=(4.0, 8.0, 16.0, 32.0, 64.0)),
    "rigid_family": dict(ball=16, chain_horizon=50),
    "coxeter_family": dict(horizon=20, radii=(4.0, 8.0, 16.0, 32.0, 64.0)),
    "spectrum_scan": dict(word_length_max=6),
}

_INT_KEYS = {"ball", "witness_ball", "horizon", "seed", "threads", "i_max",
             "word_length_max", "chain_horizon"}
_FLOAT_KEYS = {"eps0", "tol"}
_BOOL_KEYS = {"figures", "identity_sanity"}
_FRACTION_KEYS = {"n_sq", "m_sq"}


def parse_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.lower().replace("-", "_")] = value
    return out


def _parse_pq(value: str) -> tuple[tuple[int, int], ...]:
    pairs = []
    for tok in value.replace(";", " ").split():
        if "," not in tok:
            raise ConfigError(f"pq pair {tok!r} must look like p,q")
        p, q = (int(x) for x in tok.split(","))
        pairs.append((p, q))
    return tuple(pairs)


def _coerce(key: str, value):
    if isinstance(value, str):
        value = value.strip()
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _BOOL_KEYS:
        if isinstance(value, bool):
            return value
        return value.lower() in ("1", "true", "yes", "on")
    if key in _FRACTION_KEYS:
        return Fraction(value)
    if key == "radii":
        if isinstance(value, (tuple, list)):
            return tuple(float(v) for v in value)
        return tuple(float(v) for v in value.split())
    if key == "pq_list":
        if isinstance(value, (tuple, list)):
            return tuple(tuple(pq) for pq in value)
        return _parse_pq(value)
    return value


def build_config(experiment: str, file_values: dict | None = None, **overrides) -> ExperimentConfig:
    """Defaults for the experiment, then the config file, then explicit flags."""
    if experiment not in _DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    cfg = ExperimentConfig(experiment=experiment)
    cfg = replace(cfg, **{k: _coerce(k, v) for k, v in _DEFAULTS[experiment].items()})
    for source in (file_values or {}), {k: v for k, v in overrides.items() if v is not None}:
        clean = {}
        for key, value in source.items():
            key = key.lower().replace("-", "_")
            if key == "experiment":
                continue
            if not hasattr(cfg, key):
                raise ConfigError(f"unknown config key {key!r}")
            clean[key] = _coerce(key, value)
        cfg = replace(cfg, **clean)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    if cfg.horizon <= 0 or cfg.ball <= 0 or cfg.chain_horizon <= 0:
        raise ConfigError("horizons and ball radii must be positive")
    if cfg.radii and any(r <= 0 for r in cfg.radii):
        raise ConfigError("test radii must be positive")
    if cfg.eps0 <= 0 or cfg.tol <= 0:
        raise ConfigError("eps0 and tol must be positive")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if cfg.experiment == "spectrum_scan":
        for p, q in cfg.pq_list:
            if q < 1 or p < q:
                raise ConfigError(f"spectrum scan needs p >= q >= 1, got ({p},{q})")
    if cfg.experiment == "rigid_family" and cfg.family not in (
            "z2_lattice", "z2_free_z2", "zn_cyclic", "zn1_zn2"):
        raise ConfigError(f"unsupported rigid family {cfg.family!r}")
