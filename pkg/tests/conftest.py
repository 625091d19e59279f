import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from urllib.parse import parse_qs, urlparse

import pytest

from satotate import bundled


@pytest.fixture(scope="session")
def delta_table():
    return bundled.bundled_table("1.12.a.a", 10**4)


@pytest.fixture(scope="session")
def f54_table():
    return bundled.bundled_table("5.4.a.a", 10**4)


@pytest.fixture(scope="session")
def f66_table():
    return bundled.bundled_table("6.6.a.a", 10**4)


class _QExpansionHandler(BaseHTTPRequestHandler):
    def do_GET(self):
        parsed = urlparse(self.path)
        parts = parsed.path.strip("/").split("/")
        if len(parts) != 2 or parts[0] != "q_expansion":
            self.send_error(404)
            return
        label = parts[1]
        n = int(parse_qs(parsed.query).get("n", ["10"])[0])
        self.server.hits.append((label, n))
        try:
            table = bundled.bundled_table(label, n)
        except Exception:
            self.send_error(404)
            return
        body = ("[" + ", ".join(str(c) for c in table.raw) + "]").encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture()
def coeff_server():
    """Local HTTP server implementing the q-expansion URL template."""
    server = HTTPServer(("127.0.0.1", 0), _QExpansionHandler)
    server.hits = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server, f"http://127.0.0.1:{server.server_port}"
    finally:
        server.shutdown()
        thread.join(timeout=5)
