"""
A full scene without the network
================================

The CLI and the HTTP service share one pipeline. Here it runs on local
fixture files and the resulting figure is opened with Plotly, exactly as
a client of the web API would do.
"""

# %%
import json
import tempfile
from pathlib import Path

from urbanscene.cli import main

DATA = Path(__file__).resolve().parents[1] / "tests" / "data" / "alna"
out = Path(tempfile.mkdtemp()) / "alna.json"

main([
    "generate",
    "--dem", str(DATA / "dem.tif"),
    "--roads", str(DATA / "roads.json"),
    "--power", str(DATA / "power.json"),
    "--buildings", str(DATA / "buildings.json"),
    "--heights", str(DATA / "heights.geojson"),
    "--title", "Alna, Oslo, Norway",
    "--out", str(out),
])

# %%
figure_dict = json.loads(out.read_text())
for trace in figure_dict["data"][:4]:
    print(trace["type"], trace["name"], len(trace["x"]))

# %%
try:
    import plotly.graph_objects as go
except ImportError:
    print("install plotly to view the figure")
else:
    fig = go.Figure(figure_dict)
    html = out.with_suffix(".html")
    fig.write_html(html)
    print("wrote", html)
