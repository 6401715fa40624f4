import json
import random
from datetime import datetime, timezone

import pytest

from pysbom.cyclonedx import BomMetadata, DuplicateRefError, UnsupportedFormat, emit, emit_diagnostics
from pysbom.diagnostics import info, warning
from pysbom.model import (
    DEVELOPMENT,
    DependencyGroup,
    Reach,
    Resolution,
    ResolutionKind,
    ResolvedComponent,
    Scope,
    SourceKind,
    SourceRef,
    normalize_name,
)
from pysbom.versions import parse_version

META = BomMetadata("demo", "1.0", "0.1.0")


def comp(name, version=None, kind=ResolutionKind.LOCKED, **kw):
    v = parse_version(version) if version else None
    if v is None:
        kind = ResolutionKind.UNKNOWN
    return ResolvedComponent(normalize_name(name), v, resolution=Resolution(kind), **kw)


COMPONENTS = [
    comp("numpy", "1.26.4", hashes=(("sha256", "a" * 64),), origin=("poetry.lock", 10)),
    comp("six", "1.16.0", reach=Reach.TRANSITIVE),
    comp("seaborn", "0.13.2", scope=Scope.OPTIONAL, group=DependencyGroup.optional("plot")),
    comp("pytest", "8.0", scope=Scope.EXCLUDED_DEV, group=DEVELOPMENT),
    comp("black", source=SourceRef(SourceKind.VCS, "https://github.com/psf/black", "git", "abc")),
    comp("foo", source=SourceRef(SourceKind.DIRECT_URL, "https://example.com/foo.tar.gz")),
    comp("urllib3", "2.2.1", kind=ResolutionKind.RESOLVED),
]
EDGES = [(None, "numpy"), (None, "seaborn"), ("seaborn", "numpy"), ("numpy", "six"), (None, "black"), (None, "foo"),
         (None, "pytest"), (None, "urllib3")]


def test_schema_valid(bom_validator):
    doc = json.loads(emit(COMPONENTS, EDGES, META, diagnostics=[warning("T6", "guessed", "x")]))
    errors = [e.message for e in bom_validator.iter_errors(doc)]
    assert errors == []


def test_empty_document_is_valid(bom_validator):
    doc = json.loads(emit([], [], BomMetadata("empty")))
    assert doc["components"] == []
    assert doc["dependencies"] == [{"ref": "root:empty", "dependsOn": []}]
    assert list(bom_validator.iter_errors(doc)) == []


def test_document_content():
    doc = json.loads(emit(COMPONENTS, EDGES, META))
    by_name = {c["name"]: c for c in doc["components"]}
    assert doc["specVersion"] == "1.5"
    assert "timestamp" not in doc["metadata"]
    assert by_name["numpy"]["hashes"] == [{"alg": "SHA-256", "content": "a" * 64}]
    assert by_name["seaborn"]["scope"] == "optional"
    assert by_name["pytest"]["scope"] == "excluded"
    assert "version" not in by_name["black"]
    assert by_name["black"]["externalReferences"] == [{"type": "vcs", "url": "git+https://github.com/psf/black@abc"}]
    assert by_name["foo"]["externalReferences"][0]["type"] == "distribution"
    props = {p["name"]: p["value"] for p in by_name["numpy"]["properties"]}
    assert props["pysbom:origin"] == "poetry.lock:10"
    assert props["pysbom:resolution"] == "locked"
    deps = {d["ref"]: d["dependsOn"] for d in doc["dependencies"]}
    assert deps[by_name["numpy"]["bom-ref"]] == [by_name["six"]["bom-ref"]]
    assert len(deps["root:demo@1.0"]) == 6


def test_deterministic_and_order_independent():
    first = emit(COMPONENTS, EDGES, META)
    rng = random.Random(7)
    for _ in range(5):
        comps, edges = COMPONENTS[:], EDGES[:]
        rng.shuffle(comps)
        rng.shuffle(edges)
        assert emit(comps, edges, META) == first


def test_serial_tracks_content():
    a = json.loads(emit(COMPONENTS, EDGES, META))["serialNumber"]
    b = json.loads(emit(COMPONENTS[:-1], EDGES[:-1], META))["serialNumber"]
    assert a != b and a.startswith("urn:uuid:")


def test_non_deterministic_mode():
    stamp = datetime(2024, 1, 1, tzinfo=timezone.utc)
    a = json.loads(emit(COMPONENTS, EDGES, BomMetadata("demo", timestamp=stamp), deterministic=False))
    b = json.loads(emit(COMPONENTS, EDGES, BomMetadata("demo", timestamp=stamp), deterministic=False))
    assert a["metadata"]["timestamp"] == "2024-01-01T00:00:00Z"
    assert a["serialNumber"] != b["serialNumber"]


def test_duplicate_component_rejected():
    with pytest.raises(DuplicateRefError):
        emit([comp("six", "1.0"), comp("Six", "1.0")], [], META)


def test_versionless_refs_are_unique():
    a = comp("a", source=SourceRef(SourceKind.VCS, "https://x.org/a", "git"))
    b = comp("b")
    doc = json.loads(emit([a, b], [], META))
    refs = [c["bom-ref"] for c in doc["components"]]
    assert len(set(refs)) == 2


def test_edge_to_unknown_component():
    with pytest.raises(ValueError):
        emit([comp("six", "1.0")], [(None, "missing")], META)


def test_guessed_component_surfaces_t6():
    c = comp("lib", "1.5", kind=ResolutionKind.GUESSED)
    doc = json.loads(emit([c], [(None, "lib")], META, diagnostics=[warning("T6", "version 1.5 guessed", "lib")]))
    assert {"name": "pysbom:diagnostic:T6", "value": "lib: version 1.5 guessed"} in doc["metadata"]["properties"]
    props = {p["name"]: p["value"] for p in doc["components"][0]["properties"]}
    assert props["pysbom:resolution"] == "guessed"


def test_xml_not_supported():
    with pytest.raises(UnsupportedFormat):
        emit(COMPONENTS, EDGES, META, fmt="xml")


def test_diagnostics_report_sorted():
    diags = [warning("T6", "b", "z"), info("E2", "no lock"), warning("T6", "a", "a", ("r.txt", 3))]
    report = json.loads(emit_diagnostics(diags))["diagnostics"]
    assert [(d["code"], d["subject"]) for d in report] == [("E2", None), ("T6", "a"), ("T6", "z")]
    assert report[1]["origin"] == {"file": "r.txt", "line": 3}
    text = emit_diagnostics(diags, "text").decode().splitlines()
    assert text[1] == "T6 warning a a (r.txt:3)"
    with pytest.raises(UnsupportedFormat):
        emit_diagnostics(diags, "yaml")
