"""
Calling the web API
===================

Start the service first, for example::

    urbanscene serve --listen 127.0.0.1:8000

The api_key segment is passed through to the DEM provider, so use a real
OpenTopography key. Place names go into the path with hyphens between
the parts.
"""

# %%
import os

import requests

api_key = os.environ.get("OPENTOPOGRAPHY_KEY", "your-key")
target_place = "Alna-Oslo-Norway"

BASE_URL = os.environ.get("URBANSCENE_BASE_URL", "http://127.0.0.1:8000")
api_request_url = f"{BASE_URL}/{api_key}/{target_place}"

try:
    response = requests.get(api_request_url, timeout=600)
    response.raise_for_status()
    figure_dict = response.json()
except requests.exceptions.RequestException as e:
    print(f"request failed: {e}")
    raise SystemExit(1)

# %%
import plotly.graph_objects as go

fig = go.Figure(figure_dict)
fig.show()
