from configparser import ConfigParser
from dataclasses import dataclass
from dataclasses import fields
from dataclasses import replace
from os.path import isfile

import logging

from .exc import ArgumentError
from .moduli import RegionSpec


log = logging.getLogger(__name__)

# Section read from setup.cfg (or any ini file passed with --config)
CONFIG_SECTION = "fundamental_ratio"


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of a run; the certificate header stores a copy."""

    q_min: float = 0.156
    q_max: float = 1.0
    p_min: float = 0.5
    p_max: float = 1.0
    excision_radius: float = 0.0022
    levels: int = 6
    eps: float = 1e-9
    safety: float = 0.9
    tol: float = 1e-10
    min_step: float = 1e-6
    start_offset: float = 1e-9
    jobs: int = 1
    strict: bool = False

    def region(self):
        return RegionSpec(
            q_min=self.q_min,
            q_max=self.q_max,
            p_min=self.p_min,
            p_max=self.p_max,
            excision_radius=self.excision_radius,
        )

    def settings(self):
        from .sweep import SweepSettings

        return SweepSettings(
            levels=self.levels,
            eps=self.eps,
            safety=self.safety,
            tol=self.tol,
            min_step=self.min_step,
            start_offset=self.start_offset,
            strict=self.strict,
        )

    def override(self, **values):
        """Return a copy with every non-None value applied."""
        known = {f.name for f in fields(self)}
        changes = {}
        for key, value in values.items():
            if value is None:
                continue
            if key not in known:
                raise ArgumentError(f"Unknown configuration key '{key}'")
            changes[key] = value
        return replace(self, **changes)


def _coerce(name, kind, raw):
    try:
        if kind is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return kind(raw)
    except ValueError as err:
        raise ArgumentError(
            f"Invalid value '{raw}' for configuration key '{name}'"
        ) from err


def load_config(path="setup.cfg", section=CONFIG_SECTION):
    """Read a :class:`RunConfig` from an ini file.

    A missing file or section yields the defaults.
    """
    config = RunConfig()
    if not isfile(path):
        return config

    parser = ConfigParser()
    parser.read(path)
    if not parser.has_section(section):
        return config

    types = {f.name: type(getattr(config, f.name)) for f in fields(config)}
    values = {}
    for key, raw in parser.items(section):
        if key not in types:
            raise ArgumentError(
                f"Unknown configuration key '{key}' in [{section}] of {path}"
            )
        values[key] = _coerce(key, types[key], raw)

    log.debug("Loaded [%s] from '%s': %s", section, path, values)
    return config.override(**values)
