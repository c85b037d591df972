import csv
import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from urllib.parse import parse_qs, urlparse

import pytest

from sentimen.preprocess import PreprocessConfig

# small labeled corpus in the canonical CSV shape; texts only use words the
# bundled dictionaries know so pipeline output is predictable
POSITIVE_TEXTS = [
    "Program makan gratis ini sangat bagus untuk anak sekolah",
    "makanannya enak dan bergizi",
    "terima kasih programnya mantap",
    "anak anak senang dapat makanan sehat",
    "bagus banget programnya lanjutkan",
    "sangat membantu keluarga miskin",
    "menu makan siang enak sekali",
    "programnya berhasil anak jadi sehat",
]
NEGATIVE_TEXTS = [
    "program gagal total anggaran habis",
    "makanannya basi dan tidak layak",
    "korupsi anggaran makan gratis memalukan",
    "anggaran negara habis untuk program bohong",
    "kualitas makanan buruk sekali mengecewakan",
    "tolong hentikan program jelek ini",
    "menu tidak sehat anak jadi sakit",
    "pelaksanaan kacau dan mengecewakan warga",
]


@pytest.fixture(scope="session")
def pp_cfg() -> PreprocessConfig:
    return PreprocessConfig.default()


def write_corpus_csv(path, rows):
    """rows: iterable of (id, source, text, label_name)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "source", "text", "label"])
        writer.writerows(rows)
    return path


@pytest.fixture
def toy_corpus_csv(tmp_path):
    rows = []
    for i, text in enumerate(POSITIVE_TEXTS):
        rows.append((f"p{i}", "chan1", text, "positive"))
    for i, text in enumerate(NEGATIVE_TEXTS):
        rows.append((f"n{i}", "chan2", text, "negative"))
    return write_corpus_csv(tmp_path / "corpus.csv", rows)


class _CommentsHandler(BaseHTTPRequestHandler):
    """Stands in for the comment-threads endpoint; behavior set per-server."""

    def log_message(self, *args):  # keep pytest output clean
        pass

    def do_GET(self):
        query = parse_qs(urlparse(self.path).query)
        server = self.server
        server.requests.append(query)
        if server.fail_status is not None:
            self.send_response(server.fail_status)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(json.dumps(server.fail_body or {}).encode())
            return
        token = query.get("pageToken", [None])[0]
        page_no = int(token.split("-")[1]) if token else 0
        items = [
            {"snippet": {"topLevelComment": {
                "id": f"c{page_no}-{j}",
                "snippet": {"textOriginal": f"komentar {page_no} {j}"}}}}
            for j in range(server.page_size)
        ]
        body = {"items": items}
        if page_no + 1 < server.n_pages:
            body["nextPageToken"] = f"page-{page_no + 1}"
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(json.dumps(body).encode())


class MockCommentsServer:
    def __init__(self, n_pages=2, page_size=3, fail_status=None, fail_body=None):
        self.httpd = HTTPServer(("127.0.0.1", 0), _CommentsHandler)
        self.httpd.n_pages = n_pages
        self.httpd.page_size = page_size
        self.httpd.fail_status = fail_status
        self.httpd.fail_body = fail_body
        self.httpd.requests = []
        self.thread = threading.Thread(target=self.httpd.serve_forever,
                                       daemon=True)
        self.thread.start()

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address
        return f"http://{host}:{port}/commentThreads"

    @property
    def requests(self):
        return self.httpd.requests

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def comments_server():
    servers = []

    def make(**kwargs):
        server = MockCommentsServer(**kwargs)
        servers.append(server)
        return server

    yield make
    for server in servers:
        server.close()
