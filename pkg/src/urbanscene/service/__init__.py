"""HTTP service, offline pipeline and configuration."""

from .config import Config, load_config
from .pipeline import SceneOptions, SceneService, build_scene, parse_place_slug, prepare_terrain

__all__ = ["Config", "load_config", "SceneOptions", "SceneService", "build_scene", "parse_place_slug", "prepare_terrain"]
