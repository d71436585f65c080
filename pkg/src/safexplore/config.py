"""Environment configuration and its versioned key-value file format.

The file is plain text, one ``key = value`` pair per line, ``#`` comments
allowed. A ``config_version`` line is required when loading from a file.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

CONFIG_VERSION = 1


class ConfigError(ValueError):
    """Malformed configuration value or file."""


@dataclass(frozen=True)
class EnvConfig:
    """Simulator parameters; defaults are the nominal evaluation setup."""

    h: int = 50
    w: int = 50
    n_t: int = 45
    r_range: tuple[float, float] = (1.0, 3.0)
    l: float = 5.0
    rho_star: float = 0.98
    n_s_star: int = 2500
    k: int = 7
    beta: float = 0.5
    r_exp: float = 100.0
    r_sigma: float = -5.0
    seed: int = 0

    def __post_init__(self):
        if self.h < 8 or self.w < 8:
            raise ConfigError(f"map size {self.h}x{self.w} below the 8x8 minimum")
        if self.n_t < 0:
            raise ConfigError(f"n_t must be nonnegative, got {self.n_t}")
        r_min, r_max = self.r_range
        if r_min <= 0 or r_min > r_max:
            raise ConfigError(f"invalid r_range [{r_min}, {r_max}]")
        if self.l <= 0:
            raise ConfigError(f"sensor range l must be positive, got {self.l}")
        if not 0 < self.rho_star <= 1:
            raise ConfigError(f"rho_star must be in (0, 1], got {self.rho_star}")
        if self.n_s_star < 1:
            raise ConfigError(f"n_s_star must be at least 1, got {self.n_s_star}")
        if self.k < 1 or self.k % 2 == 0:
            raise ConfigError(f"k must be a positive odd integer, got {self.k}")
        if self.beta < 0:
            raise ConfigError(f"beta must be nonnegative, got {self.beta}")

    def with_overrides(self, overrides: dict) -> "EnvConfig":
        if not overrides:
            return self
        known = {f.name for f in fields(self)}
        parsed = {}
        for key, value in overrides.items():
            if key not in known:
                raise ConfigError(f"unknown config key: {key!r}")
            parsed[key] = _coerce(key, value)
        return replace(self, **parsed)

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "w": self.w,
            "n_t": self.n_t,
            "r_range": [self.r_range[0], self.r_range[1]],
            "l": self.l,
            "rho_star": self.rho_star,
            "n_s_star": self.n_s_star,
            "k": self.k,
            "beta": self.beta,
            "r_exp": self.r_exp,
            "r_sigma": self.r_sigma,
            "seed": self.seed,
        }

    @classmethod
    def from_file(cls, path) -> "EnvConfig":
        entries = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in entries:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            entries[key] = value
        version = entries.pop("config_version", None)
        if version is None:
            raise ConfigError(f"{path}: missing config_version")
        if version.strip() != str(CONFIG_VERSION):
            raise ConfigError(f"{path}: unsupported config_version {version!r}")
        return cls().with_overrides(entries)

    def to_file(self, path) -> None:
        lines = [f"config_version = {CONFIG_VERSION}"]
        for key, value in self.to_dict().items():
            if key == "r_range":
                lines.append(f"r_range = {value[0]}, {value[1]}")
            else:
                lines.append(f"{key} = {value}")
        Path(path).write_text("\n".join(lines) + "\n")


_INT_KEYS = {"h", "w", "n_t", "n_s_star", "k", "seed"}
_FLOAT_KEYS = {"l", "rho_star", "beta", "r_exp", "r_sigma"}


def _coerce(key: str, value):
    try:
        if key in _INT_KEYS:
            if isinstance(value, bool) or isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if key in _FLOAT_KEYS:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if key == "r_range":
            if isinstance(value, str):
                parts = [p for p in value.replace(",", " ").split() if p]
            else:
                parts = list(value)
            if len(parts) != 2:
                raise ValueError
            return (float(parts[0]), float(parts[1]))
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for config key {key!r}: {value!r}") from None
    raise ConfigError(f"unknown config key: {key!r}")
