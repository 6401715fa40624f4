import json
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
DATA = Path(__file__).resolve().parent / "data"
SCHEMA_DIR = DATA / "schema"

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def make_validator():
    from jsonschema import Draft7Validator
    from referencing import Registry, Resource

    def load(name):
        return json.loads((SCHEMA_DIR / name).read_text(encoding="utf-8"))

    registry = Registry().with_resources(
        [
            ("http://cyclonedx.org/schema/spdx.SNAPSHOT.schema.json", Resource.from_contents(load("spdx.SNAPSHOT.schema.json"))),
            ("http://cyclonedx.org/schema/jsf-0.82.SNAPSHOT.schema.json", Resource.from_contents(load("jsf-0.82.SNAPSHOT.schema.json"))),
        ]
    )
    return Draft7Validator(load("bom-1.5.SNAPSHOT.schema.json"), registry=registry)


@pytest.fixture(scope="session")
def bom_validator():
    return make_validator()


@pytest.fixture(scope="session")
def corpus_runs():
    from pysbom.corpus import run_corpus

    return {r.fixture.id: r for r in run_corpus(CORPUS)}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
