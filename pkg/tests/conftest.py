"""Shared test helpers: a local HTTP stub server for remote-client tests."""

import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, HTTPServer


@contextmanager
def stub_server(replies):
    """Serve canned (status, payload) replies on a local port.

    Yields (base_url, requests) where requests collects one dict per POST:
    path, parsed JSON body (or raw bytes), and the Authorization header.
    The last reply repeats once the list is exhausted; payloads that are
    strings are sent verbatim, anything else is JSON-encoded.
    """
    queue = list(replies)
    requests = []

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length)
            try:
                body = json.loads(raw.decode("utf-8"))
            except ValueError:
                body = raw
            requests.append(
                {
                    "path": self.path,
                    "body": body,
                    "raw": raw,
                    "authorization": self.headers.get("Authorization"),
                }
            )
            status, payload = queue.pop(0) if len(queue) > 1 else queue[0]
            data = payload.encode("utf-8") if isinstance(payload, str) else json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_port}", requests
    finally:
        server.shutdown()
        thread.join()
        server.server_close()
