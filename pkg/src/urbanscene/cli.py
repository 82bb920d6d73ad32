"""Command line entry point: offline scene generation and the HTTP server."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import UrbanSceneError
from .geomath import WEB_MERCATOR, WGS84
from .raster import load_dem
from .service.pipeline import SceneOptions, build_scene, prepare_terrain
from .sources import load_ways, parse_height_geojson


def _positive(value):
    v = float(value)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {value}")
    return v


def _resolution(value):
    return value if value == "auto" else _positive(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="urbanscene", description="Generate 3D urban scene figures.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="build a figure from local files")
    gen.add_argument("--dem", required=True, help="GeoTIFF or ESRI ASCII grid")
    gen.add_argument("--dem-crs", type=int, choices=(WGS84, WEB_MERCATOR), default=WGS84,
                     help="CRS of an ASCII grid (GeoTIFFs are read as EPSG:4326)")
    gen.add_argument("--roads", help="Overpass JSON or GeoJSON road lines")
    gen.add_argument("--power", help="Overpass JSON or GeoJSON power lines")
    gen.add_argument("--buildings", help="Overpass JSON or GeoJSON building footprints")
    gen.add_argument("--heights", help="GeoJSON polygons with a 'height' property")
    gen.add_argument("--out", required=True, help="output figure JSON path")
    gen.add_argument("--spacing", type=_positive, default=10.0, help="drape sample spacing in meters")
    gen.add_argument("--road-offset", type=float, default=1.0)
    gen.add_argument("--power-offset", type=float, default=2.0)
    gen.add_argument("--default-height", type=_positive, default=8.0)
    gen.add_argument("--resolution", type=_resolution, default="auto", help="Mercator pixel size in meters or 'auto'")
    gen.add_argument("--pixel-budget", type=int, default=4_000_000)
    gen.add_argument("--title", default="")

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--config", help="INI config file")
    srv.add_argument("--listen", help="host:port, overrides the config")
    return parser


def cli_generate(args) -> int:
    options = SceneOptions(
        spacing=args.spacing,
        road_offset=args.road_offset,
        power_offset=args.power_offset,
        default_height=args.default_height,
        resolution=args.resolution,
        pixel_budget=args.pixel_budget,
        title=args.title,
    )
    stage, path = "dem", args.dem
    try:
        dem = load_dem(args.dem, crs=args.dem_crs)
        layers = {}
        for layer, path in (("road", args.roads), ("power", args.power), ("building", args.buildings)):
            stage = layer
            layers[layer] = load_ways(path, layer) if path else []
        stage, path = "heights", args.heights
        heights = []
        if path:
            with open(path, "rb") as fh:
                heights = parse_height_geojson(fh.read())
        stage, path = "pipeline", None
        grid = prepare_terrain(dem, options)
        result = build_scene(grid, layers["road"], layers["power"], layers["building"], heights, options)
        stage, path = "output", args.out
        with open(args.out, "wb") as fh:
            fh.write(result.to_json())
    except (OSError, UrbanSceneError, ValueError) as exc:
        where = f"{stage} ({path})" if path else stage
        print(f"urbanscene: error in {where}: {exc}", file=sys.stderr)
        return 1
    print(result.stats.summary())
    return 0


def cli_serve(args) -> int:
    import uvicorn

    from .service.app import create_app
    from .service.config import load_config

    overrides = {"listen": args.listen} if args.listen else {}
    config = load_config(args.config, os.environ, **overrides)
    host, port = config.host_port
    uvicorn.run(create_app(config), host=host, port=port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "generate":
        return cli_generate(args)
    return cli_serve(args)


if __name__ == "__main__":
    sys.exit(main())
