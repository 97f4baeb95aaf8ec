"""Provide the experiment configuration and its loaders.

## Precedence

Settings are resolved from three layers, later layers winning:

1. built-in defaults (`constants`);
2. a config file given with ``--config``;
3. flags given explicitly on the command line.

## File formats

Config files are either flat text

```text
# population and sizes
population = gamma:0.0625:16
n = 4,8,16,32
cdf-interval = -3:3
```

or, for ``.yaml``/``.yml`` files, a YAML mapping with the same keys. Keys are
the flag names without leading dashes; ``-`` and ``_`` are interchangeable.

`ExperimentConfig.to_flat_text` writes the flat form back out, and parsing
that text yields an equal configuration.
"""

from __future__ import annotations

import hashlib
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from oyaml import safe_load
from yaml import YAMLError

from .constants import (
    DEFAULT_CDF_INTERVAL,
    DEFAULT_DRAWS,
    DEFAULT_LOGNORMAL_SAMPLE_SIZE,
    DEFAULT_MESH,
    DEFAULT_ORDERS,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_POPULATION,
    DEFAULT_Q_INTERVAL,
    DEFAULT_SAMPLE_SIZES,
    DEFAULT_SEED,
    DEFAULT_WEIGHT_ITERATIONS,
    FIGURE_DRAWS,
    YAML_EXTENSIONS,
    WeightKind,
)
from .core.distributions import (
    GammaPopulation,
    LogNormalPopulation,
    Population,
    SampleMeanModel,
)
from .exceptions import ConfigurationError, FileSystemError
from .validation import (
    parse_int,
    parse_int_list,
    parse_interval,
    parse_orders,
    parse_population,
    parse_weight,
    validate_file_path,
)

CONFIG_KEYS: tuple[str, ...] = (
    "population",
    "n",
    "order",
    "cdf_interval",
    "q_interval",
    "mesh",
    "weight",
    "weight_file",
    "iterations",
    "draws",
    "seed",
    "out",
)


def normalize_key(key: str) -> str:
    """Return a config key with dashes folded to underscores."""
    return key.strip().lower().lstrip("-").replace("-", "_")


def _format_number(value: float | int) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _format_population(population: Population) -> str:
    if isinstance(population, GammaPopulation):
        first, second = population.shape, population.scale
        family = "gamma"
    else:
        first, second = population.mu, population.sigma
        family = "lognormal"
    return f"{family}:{_format_number(float(first))}:{_format_number(float(second))}"


@dataclass(frozen=True)
class ExperimentConfig:
    """Define the effective settings of one experiment run."""

    population: Population = field(
        default_factory=lambda: parse_population(DEFAULT_POPULATION)
    )
    sample_sizes: tuple[int, ...] = DEFAULT_SAMPLE_SIZES
    orders: tuple[int, ...] = DEFAULT_ORDERS
    cdf_interval: tuple[float, float] = DEFAULT_CDF_INTERVAL
    q_interval: tuple[float, float] = DEFAULT_Q_INTERVAL
    mesh: int = DEFAULT_MESH
    weight: WeightKind = WeightKind.NONE
    weight_file: Path | None = None
    iterations: int = DEFAULT_WEIGHT_ITERATIONS
    draws: int = DEFAULT_DRAWS
    seed: int = DEFAULT_SEED
    out: Path = Path(DEFAULT_OUTPUT_DIR)

    @classmethod
    def from_mapping(
        cls, values: Mapping[str, Any], *, base: ExperimentConfig | None = None
    ) -> ExperimentConfig:
        """Return ``base`` (or the defaults) updated with ``values``.

        Raises:
            `ConfigurationError`: On unknown keys or invalid values.

        """
        settings = dict((base or cls()).__dict__)
        for raw_key, raw_value in values.items():
            key = normalize_key(str(raw_key))
            if key not in CONFIG_KEYS:
                raise ConfigurationError(
                    f"Unknown config key: {raw_key!r}. "
                    f"Known keys: {', '.join(CONFIG_KEYS)}",
                    config_key=str(raw_key),
                    config_value=raw_value,
                )
            if raw_value is None:
                continue
            settings.update(_parse_setting(key, raw_value))
        config = cls(**settings)
        if base is None:
            config = config.with_population_defaults(_explicit_keys(values))
        config.check()
        return config

    @classmethod
    def from_sources(
        cls,
        *,
        config_file: str | Path | None = None,
        overrides: Mapping[str, Any] | None = None,
    ) -> ExperimentConfig:
        """Return defaults, then the config file, then ``overrides`` applied."""
        config = cls()
        explicit: set[str] = set()
        if config_file is not None:
            raw = load_config_file(config_file)
            explicit |= _explicit_keys(raw)
            config = cls.from_mapping(raw, base=config)
        if overrides:
            explicit |= _explicit_keys(overrides)
            config = cls.from_mapping(overrides, base=config)
        return config.with_population_defaults(explicit)

    @classmethod
    def from_flat_text(
        cls, text: str, *, filename: str | None = None
    ) -> ExperimentConfig:
        """Return a configuration parsed from flat ``key = value`` text."""
        return cls.from_mapping(parse_flat_text(text, filename=filename))

    def with_population_defaults(self, explicit: set[str]) -> ExperimentConfig:
        """Return the config with lognormal defaults for keys not set explicitly.

        A lognormal population describes the simulated distribution figure: it
        defaults to one sample size of 5 and 10**7 Monte Carlo draws.
        """
        if not isinstance(self.population, LogNormalPopulation):
            return self
        changes: dict[str, Any] = {}
        if "n" not in explicit:
            changes["sample_sizes"] = (DEFAULT_LOGNORMAL_SAMPLE_SIZE,)
        if "draws" not in explicit:
            changes["draws"] = FIGURE_DRAWS
        return replace(self, **changes) if changes else self

    def check(self) -> None:
        """Validate cross-field constraints.

        Raises:
            `ConfigurationError`: If the quantile interval leaves (0, 1) or a
                file weight has no file.

        """
        lower, upper = self.q_interval
        if not (0.0 < lower < upper < 1.0):
            raise ConfigurationError(
                "q_interval must lie strictly inside (0, 1)",
                config_key="q_interval",
                config_value=self.q_interval,
            )
        if self.weight is WeightKind.FILE and self.weight_file is None:
            raise ConfigurationError(
                "weight = file needs weight_file", config_key="weight_file"
            )

    def to_mapping(self) -> dict[str, str]:
        """Return every setting as a string, in `CONFIG_KEYS` order."""
        return {
            "population": _format_population(self.population),
            "n": ",".join(str(n) for n in self.sample_sizes),
            "order": ",".join(str(order) for order in self.orders),
            "cdf_interval": ":".join(_format_number(v) for v in self.cdf_interval),
            "q_interval": ":".join(_format_number(v) for v in self.q_interval),
            "mesh": str(self.mesh),
            "weight": self.weight.value,
            "weight_file": str(self.weight_file) if self.weight_file else "",
            "iterations": str(self.iterations),
            "draws": str(self.draws),
            "seed": str(self.seed),
            "out": str(self.out),
        }

    def to_flat_text(self) -> str:
        """Return the configuration as flat ``key = value`` lines."""
        return "".join(f"{key} = {value}\n" for key, value in self.to_mapping().items())

    def digest(self) -> str:
        """Return the SHA-256 of `to_flat_text`."""
        return hashlib.sha256(self.to_flat_text().encode("utf-8")).hexdigest()

    def model(self, sample_size: int) -> SampleMeanModel:
        """Return the sample-mean model for one configured sample size."""
        return SampleMeanModel(self.population, sample_size)


def _explicit_keys(values: Mapping[str, Any]) -> set[str]:
    return {
        normalize_key(str(key)) for key, value in values.items() if value is not None
    }


def _parse_setting(key: str, value: Any) -> dict[str, Any]:
    """Return the dataclass fields one config key sets."""
    if key == "population":
        return {"population": parse_population(value, key=key)}
    if key == "n":
        return {"sample_sizes": parse_int_list(value, key=key)}
    if key == "order":
        return {"orders": parse_orders(value, key=key)}
    if key in {"cdf_interval", "q_interval"}:
        return {key: parse_interval(value, key=key)}
    if key == "mesh":
        return {"mesh": parse_int(value, key=key, minimum=2)}
    if key == "weight":
        return {"weight": parse_weight(value, key=key)}
    if key == "weight_file":
        text = str(value).strip()
        return {"weight_file": Path(text) if text else None}
    if key == "iterations":
        return {"iterations": parse_int(value, key=key, minimum=1)}
    if key == "draws":
        return {"draws": parse_int(value, key=key, minimum=1)}
    if key == "seed":
        return {"seed": parse_int(value, key=key, minimum=0)}
    return {"out": Path(str(value).strip())}


def parse_flat_text(text: str, *, filename: str | None = None) -> dict[str, str]:
    """Return the ``key = value`` pairs of a flat config text.

    Blank lines and ``#`` comments are ignored.

    Raises:
        `ConfigurationError`: On lines without ``=`` or repeated keys.

    """
    values: dict[str, str] = {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"Line {number} is not a key = value pair: {raw_line!r}",
                filename=filename,
            )
        key, value = (part.strip() for part in line.split("=", 1))
        normalized = normalize_key(key)
        if normalized in values:
            raise ConfigurationError(
                f"Line {number} repeats key {key!r}",
                config_key=key,
                filename=filename,
            )
        values[normalized] = value
    return values


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Return the raw settings stored in a flat or YAML config file.

    Raises:
        `FileSystemError`: If the file cannot be read.
        `ConfigurationError`: If its content is malformed.

    """
    config_path = validate_file_path(path)
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileSystemError(
            f"Cannot read config file: {exc}", path=config_path, operation="read"
        ) from exc

    if config_path.suffix.lower() not in YAML_EXTENSIONS:
        return dict(parse_flat_text(text, filename=str(config_path)))

    try:
        data = safe_load(text)
    except YAMLError as exc:
        raise ConfigurationError(
            f"Invalid YAML: {exc}", filename=str(config_path)
        ) from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(
            "YAML config must be a mapping of keys to values",
            filename=str(config_path),
        )
    return dict(data)


__all__ = [
    "CONFIG_KEYS",
    "ExperimentConfig",
    "load_config_file",
    "normalize_key",
    "parse_flat_text",
]
