"""Figure documents: styled mesh and line traces serialized to JSON.

The JSON layout is the ``{"data": [...], "layout": {...}}`` figure format
understood by Plotly (``mesh3d`` and ``scatter3d`` traces), so clients can
rebuild the scene with ``plotly.graph_objects.Figure(doc)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .drape import Path3D
from .errors import EmptySceneError, ParseError, SerializationError
from .terrain import TriMesh

TERRAIN_COLOR = "#8a7f6d"
ROAD_COLOR = "#ffffff"
POWER_COLOR = "#ff0000"
BUILDING_COLOR = "#add8e6"

ROAD_WIDTH = 2
POWER_WIDTH = 3


@dataclass
class MeshTrace:
    name: str
    color: str
    xs: list
    ys: list
    zs: list
    i: list
    j: list
    k: list
    opacity: float = 1.0

    def to_dict(self) -> dict:
        return {
            "type": "mesh3d",
            "name": self.name,
            "x": list(self.xs),
            "y": list(self.ys),
            "z": list(self.zs),
            "i": list(self.i),
            "j": list(self.j),
            "k": list(self.k),
            "color": self.color,
            "opacity": self.opacity,
            "flatshading": True,
            "showlegend": True,
        }


@dataclass
class LineTrace:
    """Polyline trace; ``None`` entries break the line between segments."""

    name: str
    color: str
    xs: list
    ys: list
    zs: list
    width: float = 2

    def to_dict(self) -> dict:
        return {
            "type": "scatter3d",
            "mode": "lines",
            "name": self.name,
            "x": list(self.xs),
            "y": list(self.ys),
            "z": list(self.zs),
            "line": {"color": self.color, "width": self.width},
            "connectgaps": False,
            "showlegend": True,
        }


@dataclass
class FigureDoc:
    traces: list = field(default_factory=list)
    layout: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"data": [t.to_dict() for t in self.traces], "layout": self.layout}


def mesh_trace(mesh: TriMesh, name: str, color: str) -> MeshTrace:
    tris = mesh.tris
    return MeshTrace(
        name, color,
        mesh.xs.tolist(), mesh.ys.tolist(), mesh.zs.tolist(),
        tris[:, 0].tolist(), tris[:, 1].tolist(), tris[:, 2].tolist(),
    )


def line_trace(path: Path3D, name: str, color: str, width: float = 2) -> LineTrace:
    xs, ys, zs = [], [], []
    for n, seg in enumerate(path.segments):
        if n:
            xs.append(None)
            ys.append(None)
            zs.append(None)
        seg = np.asarray(seg, dtype=float)
        xs.extend(seg[:, 0].tolist())
        ys.extend(seg[:, 1].tolist())
        zs.extend(seg[:, 2].tolist())
    return LineTrace(name, color, xs, ys, zs, width)


def default_layout(title: str = "") -> dict:
    axis = {"visible": False, "showgrid": False, "zeroline": False, "showbackground": False}
    layout = {
        "scene": {
            "aspectmode": "data",
            "xaxis": dict(axis, title={"text": "x (EPSG:3857 m)"}),
            "yaxis": dict(axis, title={"text": "y (EPSG:3857 m)"}),
            "zaxis": dict(axis, title={"text": "elevation (m)"}),
        },
        "showlegend": False,
        "margin": {"l": 0, "r": 0, "t": 40 if title else 0, "b": 0},
    }
    if title:
        layout["title"] = {"text": title}
    return layout


def assemble_figure(
    terrain: TriMesh,
    roads: Path3D | None = None,
    power: Path3D | None = None,
    buildings=(),
    title: str = "",
) -> FigureDoc:
    """Stack terrain, road lines, power lines and building meshes, in that order.

    Empty line layers produce no trace.
    """
    if terrain is None or terrain.n_vertices == 0 or terrain.n_triangles == 0:
        raise EmptySceneError("cannot assemble a figure without terrain triangles")
    traces = [mesh_trace(terrain, "terrain", TERRAIN_COLOR)]
    if roads is not None and len(roads):
        traces.append(line_trace(roads, "roads", ROAD_COLOR, ROAD_WIDTH))
    if power is not None and len(power):
        traces.append(line_trace(power, "power lines", POWER_COLOR, POWER_WIDTH))
    for n, mesh in enumerate(buildings):
        traces.append(mesh_trace(mesh, f"building {n}", BUILDING_COLOR))
    return FigureDoc(traces, default_layout(title))


def _check_finite(trace) -> None:
    for axis, values in (("x", trace.xs), ("y", trace.ys), ("z", trace.zs)):
        for v in values:
            if v is not None and not math.isfinite(v):
                raise SerializationError(f"trace {trace.name!r}: non-finite {axis} coordinate {v!r}")


def serialize_figure(fig: FigureDoc) -> str:
    """Compact, deterministic JSON text for a figure.

    Floats are written with shortest round-trip precision, so parsing and
    re-serializing gives byte-identical output.
    """
    for trace in fig.traces:
        _check_finite(trace)
    try:
        return json.dumps(fig.to_dict(), separators=(",", ":"), ensure_ascii=False, allow_nan=False)
    except ValueError as exc:
        raise SerializationError(str(exc)) from None


def validate_figure_dict(doc) -> None:
    """Structural check of a parsed figure document; raises ParseError."""
    if not isinstance(doc, dict) or not isinstance(doc.get("data"), list) or not isinstance(doc.get("layout"), dict):
        raise ParseError('figure must be {"data": [...], "layout": {...}}')
    for n, tr in enumerate(doc["data"]):
        kind = tr.get("type")
        xs, ys, zs = tr.get("x"), tr.get("y"), tr.get("z")
        if not (isinstance(xs, list) and isinstance(ys, list) and isinstance(zs, list)):
            raise ParseError(f"trace {n}: missing coordinate arrays")
        if not len(xs) == len(ys) == len(zs):
            raise ParseError(f"trace {n}: coordinate arrays differ in length")
        if kind == "mesh3d":
            i, j, k = tr.get("i"), tr.get("j"), tr.get("k")
            if not (isinstance(i, list) and len(i) == len(j or ()) == len(k or ())):
                raise ParseError(f"trace {n}: index arrays differ in length")
            for idx in (*i, *j, *k):
                if not isinstance(idx, int) or not 0 <= idx < len(xs):
                    raise ParseError(f"trace {n}: triangle index {idx!r} out of range")
        elif kind == "scatter3d":
            if tr.get("mode") != "lines":
                raise ParseError(f"trace {n}: scatter3d mode must be 'lines'")
            for a, b, c in zip(xs, ys, zs):
                if (a is None) != (b is None) or (a is None) != (c is None):
                    raise ParseError(f"trace {n}: break markers not aligned across x, y, z")
        else:
            raise ParseError(f"trace {n}: unsupported trace type {kind!r}")


def parse_figure(text) -> FigureDoc:
    """Inverse of :func:`serialize_figure`."""
    try:
        doc = json.loads(text)
    except ValueError:
        raise ParseError("figure is not valid JSON") from None
    validate_figure_dict(doc)
    traces = []
    for tr in doc["data"]:
        if tr["type"] == "mesh3d":
            traces.append(MeshTrace(
                tr.get("name", ""), tr.get("color", ""), tr["x"], tr["y"], tr["z"],
                tr["i"], tr["j"], tr["k"], tr.get("opacity", 1.0),
            ))
        else:
            line = tr.get("line", {})
            traces.append(LineTrace(
                tr.get("name", ""), line.get("color", ""), tr["x"], tr["y"], tr["z"], line.get("width", 2),
            ))
    return FigureDoc(traces, doc["layout"])
