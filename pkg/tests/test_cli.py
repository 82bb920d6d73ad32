import json
import subprocess
import sys

import pytest
from fastapi.testclient import TestClient

from urbanscene.cli import main
from urbanscene.service import load_config
from urbanscene.service.app import create_app


def corpus_args(alna_dir, out, *extra):
    return [
        "generate",
        "--dem", str(alna_dir / "dem.tif"),
        "--roads", str(alna_dir / "roads.json"),
        "--power", str(alna_dir / "power.json"),
        "--buildings", str(alna_dir / "buildings.json"),
        "--heights", str(alna_dir / "heights.geojson"),
        "--out", str(out),
        *extra,
    ]


def test_generate_writes_figure(alna_dir, tmp_path, capsys):
    out = tmp_path / "scene.json"
    assert main(corpus_args(alna_dir, out)) == 0
    summary = capsys.readouterr().out.strip()
    assert summary.startswith("vertices=") and "triangles=" in summary and "traces=" in summary
    doc = json.loads(out.read_bytes())
    assert doc["data"][0]["name"] == "terrain"


def test_cli_matches_service_body(alna_dir, tmp_path, upstream):
    out = tmp_path / "cli.json"
    assert main(corpus_args(alna_dir, out, "--title", "Alna, Oslo, Norway")) == 0
    cfg = load_config(env={}, **upstream.config_overrides())
    body = TestClient(create_app(cfg)).get("/k/Alna-Oslo-Norway").content
    assert out.read_bytes() == body


def test_missing_file_names_path(alna_dir, tmp_path, capsys):
    missing = tmp_path / "nope" / "roads.json"
    args = corpus_args(alna_dir, tmp_path / "o.json")
    args[args.index("--roads") + 1] = str(missing)
    assert main(args) != 0
    err = capsys.readouterr().err
    assert str(missing) in err and "road" in err
    assert not (tmp_path / "o.json").exists()


def test_bad_dem_names_stage(tmp_path, capsys):
    dem = tmp_path / "broken.asc"
    dem.write_text("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n")
    assert main(["generate", "--dem", str(dem), "--out", str(tmp_path / "o.json")]) == 1
    err = capsys.readouterr().err
    assert "dem" in err and str(dem) in err and "line" in err


def road_points(path):
    road = next(t for t in json.loads(path.read_bytes())["data"] if t["name"] == "roads")
    return sum(v is not None for v in road["x"])


def test_finer_spacing_adds_road_points(alna_dir, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(corpus_args(alna_dir, a)) == 0
    assert main(corpus_args(alna_dir, b, "--spacing", "5")) == 0
    assert road_points(b) > road_points(a)


def test_repeat_runs_are_byte_identical(alna_dir, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(corpus_args(alna_dir, a))
    main(corpus_args(alna_dir, b))
    assert a.read_bytes() == b.read_bytes()


def test_ascii_mercator_dem_without_vectors(tmp_path, capsys):
    dem = tmp_path / "dem.asc"
    rows = "\n".join(" ".join(str(10 * r + c) for c in range(5)) for r in range(4))
    dem.write_text(f"ncols 5\nnrows 4\nxllcorner 1200000\nyllcorner 8380000\ncellsize 30\n{rows}\n")
    out = tmp_path / "o.json"
    assert main(["generate", "--dem", str(dem), "--dem-crs", "3857", "--out", str(out)]) == 0
    doc = json.loads(out.read_bytes())
    assert len(doc["data"]) == 1
    assert len(doc["data"][0]["x"]) == 20 and len(doc["data"][0]["i"]) == 24
    assert "vertices=20 triangles=24" in capsys.readouterr().out


def test_invalid_spacing_rejected_by_parser(alna_dir, tmp_path):
    with pytest.raises(SystemExit):
        main(corpus_args(alna_dir, tmp_path / "o.json", "--spacing", "0"))


def test_module_entry_point(tmp_path):
    result = subprocess.run([sys.executable, "-m", "urbanscene", "--help"], capture_output=True, text=True)
    assert result.returncode == 0
    assert "generate" in result.stdout and "serve" in result.stdout
