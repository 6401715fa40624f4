"""Record the package-index responses the corpus needs into corpus/_index.

Run once with network access; the tests then replay the cache offline.

The mirror this was recorded through serves the project endpoint but not the
per-release one, so release responses are rebuilt from the core-metadata
file (``<wheel>.metadata``) of that release. Both kinds of body are trimmed
to the fields the resolver reads.

Usage: python3 scripts/record_index.py [--python 3.10]
"""

import argparse
import email.parser
import json
import sys
import urllib.parse
from pathlib import Path

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent
sys.path.insert(0, str(ROOT / "src"))

from pysbom.index import IndexClient, urllib_transport  # noqa: E402
from pysbom.project import build_project_model  # noqa: E402
from pysbom.resolver import ResolutionPolicy, resolve_project  # noqa: E402

INDEX = "https://pypi.org"
NO_LOCK_FIXTURES = [
    "hatch-hatchling", "hatch-pdm", "hatch-setuptools",
    "pip-hatchling", "pip-pdm", "pip-setuptools",
]


def _trim_project(body: dict) -> dict:
    releases = {}
    for version, files in body.get("releases", {}).items():
        if not files:
            releases[version] = []
            continue
        stamps = sorted(f["upload_time_iso_8601"] for f in files if f.get("upload_time_iso_8601"))
        rp = next((f["requires_python"] for f in files if f.get("requires_python")), None)
        releases[version] = [{
            "upload_time_iso_8601": stamps[0] if stamps else None,
            "yanked": all(f.get("yanked", False) for f in files),
            "requires_python": rp,
        }]
    info = body.get("info", {})
    keep = ("name", "version", "requires_dist", "requires_python")
    return {"info": {k: info.get(k) for k in keep}, "releases": releases}


class RecordingTransport:
    def __init__(self):
        self.projects = {}

    def project(self, name):
        if name not in self.projects:
            status, raw = urllib_transport(f"{INDEX}/pypi/{name}/json")
            self.projects[name] = (status, json.loads(raw) if status == 200 else None)
        return self.projects[name]

    def __call__(self, url):
        path = urllib.parse.urlparse(url).path.strip("/").split("/")
        if len(path) == 3:
            status, body = self.project(path[1])
            return status, json.dumps(_trim_project(body)).encode() if body else b""
        name, version = path[1], path[2]
        status, body = self.project(name)
        if body is None:
            return status, b""
        files = body["releases"].get(version)
        if files is None:
            return 404, b""
        info = body["info"]
        if info.get("version") == version:
            requires = info.get("requires_dist")
        else:
            requires = self._from_metadata(name, files)
            if requires is None:
                print(f"  no core metadata for {name} {version}", file=sys.stderr)
                return 404, b""
        out = {"info": {"name": info["name"], "version": version, "requires_dist": requires}}
        return 200, json.dumps(out).encode()

    def _from_metadata(self, name, files):
        ranked = sorted(files, key=lambda f: (f.get("packagetype") != "bdist_wheel", f["filename"]))
        for f in ranked:
            if not f.get("core-metadata") and not f.get("data-dist-info-metadata"):
                continue
            link = urllib.parse.urljoin(f"{INDEX}/pypi/{name}/json", f["url"]) + ".metadata"
            status, raw = urllib_transport(link)
            if status != 200:
                continue
            msg = email.parser.BytesParser().parsebytes(raw, headersonly=True)
            return msg.get_all("Requires-Dist") or []
        return None


def write_asof_fixture(client):
    """Two real urllib3 releases, with their upload times, for as-of tests."""
    header_src = json.loads((client._path("urllib3")).read_text())
    body = header_src["body"]
    keep = {v: body["releases"][v] for v in ("2.2.0", "2.2.1")}
    trimmed = {"info": {"name": "urllib3", "version": "2.2.1", "requires_dist": [], "requires_python": ">=3.8"},
               "releases": keep}
    target = IndexClient(INDEX, ROOT / "tests" / "data" / "asof_index")
    from pysbom.index import parse_timestamp
    target.store("urllib3", f"{INDEX}/pypi/urllib3/json", 200, trimmed,
                 parse_timestamp(header_src["header"]["fetched_at"]))
    for v, files in keep.items():
        print(f"as-of fixture: urllib3 {v} uploaded {files[0]['upload_time_iso_8601']}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--python", default="3.10")
    args = parser.parse_args()
    client = IndexClient(INDEX, ROOT / "corpus" / "_index", transport=RecordingTransport())
    policy = ResolutionPolicy(include_optional=True, include_dev=True, python_version=args.python)
    for fixture in NO_LOCK_FIXTURES:
        model = build_project_model(ROOT / "corpus" / fixture)
        result = resolve_project(model, policy, client)
        print(f"{fixture}: {len(result.components)} components, {len(result.edges)} edges")
        for d in result.diagnostics:
            if d.severity.value != "info":
                print(f"  {d.code} {d.subject}: {d.message}")
    write_asof_fixture(client)


if __name__ == "__main__":
    main()
