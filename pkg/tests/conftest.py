import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"
ALNA = DATA / "alna"


class MockUpstream:
    """Local HTTP server standing in for the geocoder, DEM, Overpass and height services.

    Responses come from the Alna fixture corpus. ``failures`` maps a service
    name ("geocoder", "dem", "overpass", "heights") to an HTTP status to
    return instead; ``empty_geocode`` makes the geocoder return no features.
    """

    def __init__(self, data_dir=ALNA):
        self.data_dir = Path(data_dir)
        self.calls = []
        self.failures = {}
        self.empty_geocode = False
        self._lock = threading.Lock()
        self.server = ThreadingHTTPServer(("127.0.0.1", 0), self._handler())
        self.thread = threading.Thread(target=self.server.serve_forever, kwargs={"poll_interval": 0.02}, daemon=True)

    @property
    def base(self):
        host, port = self.server.server_address
        return f"http://{host}:{port}"

    def count(self, service=None):
        with self._lock:
            return sum(1 for c in self.calls if service is None or c["service"] == service)

    def reset(self):
        with self._lock:
            self.calls.clear()

    def config_overrides(self):
        return {
            "geocoder_url": f"{self.base}/geo",
            "dem_url": f"{self.base}/dem",
            "overpass_url": f"{self.base}/overpass/api/interpreter",
            "heights_mode": "http",
            "heights_url": f"{self.base}/heights",
            "geocoder_interval": 0.0,
            "backoff": 0.0,
            "timeout": 10.0,
        }

    def _record(self, **call):
        with self._lock:
            self.calls.append(call)

    def _handler(self):
        mock = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _send(self, status, body, ctype="application/json"):
                if isinstance(body, str):
                    body = body.encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def _fail(self, service):
                status = mock.failures.get(service)
                if status:
                    self._send(status, json.dumps({"error": f"mock {service} failure"}))
                    return True
                return False

            def do_GET(self):
                url = urlsplit(self.path)
                query = {k: v[0] for k, v in parse_qs(url.query).items()}
                if url.path == "/geo/search":
                    mock._record(service="geocoder", query=query, headers=dict(self.headers))
                    if self._fail("geocoder"):
                        return
                    if mock.empty_geocode:
                        self._send(200, json.dumps({"type": "FeatureCollection", "features": []}))
                    else:
                        self._send(200, (mock.data_dir / "geocode.json").read_bytes())
                elif url.path == "/dem/API/globaldem":
                    mock._record(service="dem", query=query)
                    if self._fail("dem"):
                        return
                    self._send(200, (mock.data_dir / "dem.tif").read_bytes(), "image/tiff")
                elif url.path == "/heights":
                    mock._record(service="heights", query=query)
                    if self._fail("heights"):
                        return
                    self._send(200, (mock.data_dir / "heights.geojson").read_bytes())
                else:
                    self._send(404, "{}")

            def do_POST(self):
                url = urlsplit(self.path)
                length = int(self.headers.get("Content-Length", 0))
                form = {k: v[0] for k, v in parse_qs(self.rfile.read(length).decode()).items()}
                if url.path != "/overpass/api/interpreter":
                    self._send(404, "{}")
                    return
                q = form.get("data", "")
                mock._record(service="overpass", query=q)
                if self._fail("overpass"):
                    return
                if '"power"' in q:
                    name = "power.json"
                elif '"building"' in q:
                    name = "buildings.json"
                else:
                    name = "roads.json"
                self._send(200, (mock.data_dir / name).read_bytes())

        return Handler

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def upstream():
    with MockUpstream() as mock:
        yield mock


@pytest.fixture
def alna_dir():
    return ALNA


@pytest.fixture
def rng():
    return np.random.default_rng(20251127)
