"""Run configuration: flat ``key = value`` config files plus CLI overrides.

Config files use one dotted key per line, ``#`` comments, and blank lines;
every key mirrors a CLI flag and is listed in `CONFIG_KEYS`. Values given
on the command line win over the file.
"""

from dataclasses import dataclass, replace
from pathlib import Path

from .learn import DEFAULT_C_GRID
from .pipeline import FilterConfig


class ConfigError(ValueError):
    pass


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_c_grid(text):
    try:
        values = tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"bad C grid {text!r}") from None
    if not values or any(v <= 0 for v in values):
        raise ConfigError(f"C grid must be positive numbers, got {text!r}")
    return values


# dotted config key -> (RunConfig attribute, parser)
CONFIG_KEYS = {
    "seed": ("seed", int),
    "weighting.scheme": ("scheme", str),
    "weighting.stats_scope": ("stats_scope", str),
    "aggregation.method": ("aggregate", str),
    "extraction.tags": ("tags", str),
    "representation.l2_normalize": ("l2_normalize", _parse_bool),
    "filters.min_site_traffic": ("min_site_traffic", int),
    "filters.min_user_site_freq": ("min_user_site_freq", int),
    "filters.min_content_words": ("min_content_words", int),
    "filters.min_sites_per_user": ("min_sites_per_user", int),
    "learn.c_grid": ("c_grid", _parse_c_grid),
    "learn.cv_folds": ("cv_folds", int),
    "learn.epsilon": ("epsilon", float),
    "learn.max_epochs": ("max_epochs", int),
    "learn.tol": ("tol", float),
    "learn.standardize": ("standardize", _parse_bool),
    "fetch.timeout": ("fetch_timeout", float),
    "fetch.max_workers": ("fetch_workers", int),
}


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    scheme: str = "ad"
    aggregate: str = "la"
    tags: str = "hpai"
    stats_scope: str = "train"
    l2_normalize: bool = False
    standardize: bool = False
    min_site_traffic: int = 100
    min_user_site_freq: int = 5
    min_content_words: int = 10
    min_sites_per_user: int = 20
    c_grid: tuple = DEFAULT_C_GRID
    cv_folds: int = 5
    epsilon: float = 0.1
    max_epochs: int = 120  # per-cell budget; raw-tf schemes never converge tighter
    tol: float = 1e-3
    fetch_timeout: float = 10.0
    fetch_workers: int = 8

    @property
    def filters(self):
        return FilterConfig(
            min_site_traffic=self.min_site_traffic,
            min_user_site_freq=self.min_user_site_freq,
            min_content_words=self.min_content_words,
            min_sites_per_user=self.min_sites_per_user,
        )


def parse_config_file(path):
    """Read a config file into {attribute: parsed value}."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            known = ", ".join(sorted(CONFIG_KEYS))
            raise ConfigError(f"{path}: line {lineno}: unknown key {key!r} (known: {known})")
        attr, parser = CONFIG_KEYS[key]
        try:
            values[attr] = parser(value.strip())
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{path}: line {lineno}: {exc}") from None
    return values


def resolve_config(config_path=None, **overrides):
    """RunConfig from defaults, then the file, then non-None overrides."""
    cfg = RunConfig()
    if config_path:
        cfg = replace(cfg, **parse_config_file(config_path))
    cleaned = {k: v for k, v in overrides.items() if v is not None}
    if cleaned:
        cfg = replace(cfg, **cleaned)
    return cfg
