"""Write corpus/<fixture>/expected.json from the committed fixture files.

This is the oracle for the corpus tests. It deliberately does not import the
package under test: lockfiles are read with the TOML/JSON parsers directly
and dependency names are extracted with a plain regular expression.

The direct set is the fixed dependency set every fixture was generated
with; transitive names and edges are enumerated from the lockfile.
"""

import json
import re
import sys
from pathlib import Path

try:
    import tomllib
except ImportError:
    import tomli as tomllib

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
BLACK_COMMIT = "baf7c1594db44bdc93811cfccdca3ee3b679fd4e"

DIRECT = {
    "numpy": "*",
    "docopt": "==0.6.2",
    "matplotlib": ">=3.5,<4.0",
    "urllib3": "*",
    "seaborn": "==0.13.2",
    "black": f"ref:{BLACK_COMMIT}",
}
REMOTE = ["black"]
OPTIONAL = ["black", "seaborn"]


def norm(name):
    return re.sub(r"[-_.]+", "-", name).lower()


def lead_name(requirement):
    return norm(re.match(r"\s*([A-Za-z0-9][A-Za-z0-9._-]*)", requirement).group(1))


def poetry(path):
    data = tomllib.loads(path.read_text())
    names = {norm(p["name"]) for p in data["package"]}
    edges = set()
    for p in data["package"]:
        for dep in p.get("dependencies", {}):
            if norm(dep) in names and norm(dep) != norm(p["name"]):
                edges.add((norm(p["name"]), norm(dep)))
    return names, edges


def pdm(path):
    data = tomllib.loads(path.read_text())
    names = {norm(p["name"]) for p in data["package"]}
    edges = set()
    for p in data["package"]:
        for dep in p.get("dependencies", []):
            child = lead_name(dep)
            if child in names and child != norm(p["name"]):
                edges.add((norm(p["name"]), child))
    return names, edges


def pipfile(path):
    data = json.loads(path.read_text())
    names = {norm(n) for section in ("default", "develop") for n in data.get(section, {})}
    return names, set()


LOCKS = {"poetry.lock": poetry, "pdm.lock": pdm, "Pipfile.lock": pipfile}


def main():
    fixtures = sorted(p for p in CORPUS.iterdir() if p.is_dir() and not p.name.startswith("_"))
    for fixture in fixtures:
        frontend, backend = fixture.name.split("-", 1)
        names, edges, lockfile = set(), set(), None
        for filename, reader in LOCKS.items():
            if (fixture / filename).exists():
                lockfile = filename
                names, edges = reader(fixture / filename)
        expected = {
            "frontend": frontend,
            "backend": backend,
            "direct": DIRECT,
            "remote": REMOTE,
            "optional": OPTIONAL,
            "lockfile": lockfile,
            "transitive_available": lockfile is not None,
            "transitive": sorted(names - set(DIRECT)),
            "edges": sorted([list(e) for e in edges]),
        }
        (fixture / "expected.json").write_text(json.dumps(expected, indent=2) + "\n")
        print(f"{fixture.name}: lock={lockfile} transitive={len(expected['transitive'])} edges={len(edges)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
