# Scan one fixture project end to end, offline.
# Run: python demos/02_scan_a_project.py [fixture]

import json
import sys
from pathlib import Path

from pysbom import IndexClient, ResolutionPolicy, scan_project
from pysbom.corpus import INDEX_DIR

corpus = Path(__file__).resolve().parent.parent / "corpus"
fixture = sys.argv[1] if len(sys.argv) > 1 else "pipenv-pdm"

# the recorded index makes the run reproducible without network
client = IndexClient("https://pypi.org", corpus / INDEX_DIR, offline=True)
policy = ResolutionPolicy(include_optional=True, include_dev=True, python_version="3.10")
result = scan_project(corpus / fixture, policy, client)

# what was read
files = result.model.files
print("front-end:", result.model.frontend_hint)
print("pyproject:", files.pyproject is not None, " lockfiles:", [d for d, _ in files.lockfiles])

# one row per component
doc = json.loads(result.sbom())
for c in doc["components"]:
    props = {p["name"].split(":")[1]: p["value"] for p in c["properties"]}
    print(f"{c['name']:<20} {c.get('version', '-'):<12} {c['scope']:<9} {props['resolution']:<9} {props['reach']}")

# every gap is a coded diagnostic rather than a silent drop
for d in result.diagnostics:
    if d.severity.value != "info":
        print(d.code, d.subject, d.message)
