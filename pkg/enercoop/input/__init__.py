"""
This module contains the definitions for reading run configurations.

A configuration file is flat `key=value` text: one key per line, `#` starting a comment, blank lines ignored. Keys mirror
the fields of `enercoop.model.NetworkConfig` (`lambda` standing for `lambda_`), of `enercoop.sweep.SweepSpec` and the
solver options.
"""
from __future__ import annotations

import typing
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from enercoop.errors import InvalidConfigurationError
from enercoop.model import NetworkConfig, Objective, Scenario
from enercoop.solvers import BarrierOptions, QuadraticOptions, SolverKind, SolverSettings
from enercoop.utils.logger import LOGGER

NETWORK_KEYS: frozenset[str] = frozenset(item.name for item in fields(NetworkConfig))
SWEEP_KEYS: frozenset[str] = frozenset({"start", "stop", "step", "objectives", "scenarios"})
OPTION_KEYS: frozenset[str] = frozenset({"solver", "tau0", "mu", "tau_max", "eps", "max_inner", "shrink", "rho_step", "tie_tolerance", "workers"})

_INTEGERS = frozenset({"max_inner", "workers"})
_ALIASES = {"lambda": "lambda_"}


def _parse_value(key: str, raw: str) -> typing.Any:
    match key:
        case "objectives":
            return tuple(Objective(item.strip()) for item in raw.split(",") if item.strip() != "")
        case "scenarios":
            return tuple(Scenario(item.strip().upper()) for item in raw.split(",") if item.strip() != "")
        case "solver":
            return SolverKind(raw)
        case _ if key in _INTEGERS:
            return int(raw)
        case _:
            return float(raw)


@dataclass(frozen=True)
class RunConfig:
    """The values read from a configuration file, grouped by what they configure"""

    network: dict[str, float] = field(default_factory=dict)
    """Overrides of the `NetworkConfig` defaults"""
    sweep: dict[str, typing.Any] = field(default_factory=dict)
    """Overrides of the sweep range, objectives and scenarios"""
    options: dict[str, typing.Any] = field(default_factory=dict)
    """Solver and screening options"""

    @staticmethod
    def parse(filepath: str | Path) -> RunConfig:
        """
        Parse a configuration file.

        Raises
        ------
        * `InvalidConfigurationError` for malformed lines, unknown or repeated keys and unparseable values
        """
        network, sweep, options = {}, {}, {}
        with open(filepath, encoding="utf-8") as _file:
            for number, line in enumerate(_file, start=1):
                content = line.split("#", 1)[0].strip()
                if content == "":
                    continue
                key, separator, raw = content.partition("=")
                key, raw = _ALIASES.get(key.strip(), key.strip()), raw.strip()
                if separator == "" or key == "" or raw == "":
                    raise InvalidConfigurationError(f"{filepath}:{number}: expected 'key=value', got '{content}'")

                if key in NETWORK_KEYS:
                    target = network
                elif key in SWEEP_KEYS:
                    target = sweep
                elif key in OPTION_KEYS:
                    target = options
                else:
                    raise InvalidConfigurationError(f"{filepath}:{number}: unknown key '{key}'")
                if key in target:
                    raise InvalidConfigurationError(f"{filepath}:{number}: key '{key}' is repeated")

                try:
                    target[key] = _parse_value(key, raw)
                except ValueError as error:
                    raise InvalidConfigurationError(f"{filepath}:{number}: invalid value '{raw}' for '{key}'") from error

        LOGGER.verbose("read %d settings from %s", len(network) + len(sweep) + len(options), filepath)
        return RunConfig(network=network, sweep=sweep, options=options)

    def network_config(self: typing.Self, base: NetworkConfig | None = None, **overrides: float | None) -> NetworkConfig:
        """The network configuration: `base` (the defaults), then the file, then the non-`None` overrides"""
        base = base or NetworkConfig.default()
        return replace(base, **{**self.network, **{key: value for key, value in overrides.items() if value is not None}})

    def option(self: typing.Self, key: str, override: typing.Any = None, default: typing.Any = None) -> typing.Any:
        """A solver or screening option: the override when given, else the file value, else the default"""
        if override is not None:
            return override
        return self.options.get(key, default)

    def solver_settings(self: typing.Self, kind: SolverKind | None = None) -> SolverSettings:
        """The solver settings, with the kind overridden when given"""
        barrier = {key: self.options[key] for key in ("tau0", "mu", "tau_max", "eps", "max_inner", "shrink") if key in self.options}
        quadratic = {key: self.options[key] for key in ("eps", "shrink") if key in self.options}
        return SolverSettings(
            kind=self.option("solver", kind, SolverKind.NB),
            barrier=BarrierOptions(**barrier),
            quadratic=QuadraticOptions(**quadratic),
        )


def read_config(path: str | Path) -> RunConfig:
    """Read a configuration file, see `RunConfig.parse`"""
    return RunConfig.parse(path)
