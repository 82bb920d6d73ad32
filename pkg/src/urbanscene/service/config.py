"""Service configuration: defaults, INI file, environment overrides.

The config file is INI-style with a single ``[urbanscene]`` section whose
keys are the :class:`Config` field names::

    [urbanscene]
    geocoder_url = https://nominatim.openstreetmap.org
    heights_mode = file
    heights_path = /data/heights.geojson
    listen = 0.0.0.0:8000

Any key can also be set through ``URBANSCENE_<KEY>`` environment variables
(for example ``URBANSCENE_DEM_URL``), which take precedence over the file.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass

SECTION = "urbanscene"
ENV_PREFIX = "URBANSCENE_"


@dataclass(frozen=True)
class Config:
    geocoder_url: str = "https://nominatim.openstreetmap.org"
    dem_url: str = "https://portal.opentopography.org"
    overpass_url: str = "https://overpass-api.de/api/interpreter"
    heights_mode: str = "none"  # none | file | http
    heights_path: str = ""
    heights_url: str = ""

    spacing: float = 10.0
    road_offset: float = 1.0
    power_offset: float = 2.0
    default_height: float = 8.0
    resolution: str = "auto"
    pixel_budget: int = 4_000_000
    fallback_half_width: float = 1000.0

    cache_ttl: float = 24 * 3600.0
    max_pipelines: int = 2
    geocoder_interval: float = 1.0
    upstream_concurrency: int = 1
    max_retries: int = 2
    backoff: float = 0.5
    timeout: float = 60.0

    listen: str = "127.0.0.1:8000"

    def __post_init__(self):
        for name in ("spacing", "default_height", "pixel_budget", "fallback_half_width", "cache_ttl",
                     "max_pipelines", "upstream_concurrency", "timeout"):
            if not getattr(self, name) > 0:
                raise ValueError(f"config {name} must be positive")
        for name in ("geocoder_interval", "max_retries", "backoff", "road_offset", "power_offset"):
            if getattr(self, name) < 0:
                raise ValueError(f"config {name} must not be negative")
        if self.resolution != "auto" and not float(self.resolution) > 0:
            raise ValueError("config resolution must be 'auto' or a positive number")
        if self.heights_mode not in ("none", "file", "http"):
            raise ValueError(f"unknown heights_mode {self.heights_mode!r}")

    @property
    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen.rpartition(":")
        return host or "127.0.0.1", int(port)


def _coerce(field: dataclasses.Field, raw: str):
    if field.type in ("int", int):
        return int(raw)
    if field.type in ("float", float):
        return float(raw)
    return raw


def load_config(path=None, env=None, **overrides) -> Config:
    """Build a config from defaults, an optional INI file and the environment."""
    env = os.environ if env is None else env
    fields = {f.name: f for f in dataclasses.fields(Config)}
    values = {}
    if path:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        if parser.has_section(SECTION):
            for key, raw in parser.items(SECTION):
                if key not in fields:
                    raise ValueError(f"{path}: unknown config key {key!r}")
                values[key] = _coerce(fields[key], raw)
    for name, field in fields.items():
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _coerce(field, raw)
    values.update(overrides)
    return Config(**values)
