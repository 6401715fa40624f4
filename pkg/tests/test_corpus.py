import json
import random
import shutil

import pytest

from conftest import CORPUS

from pysbom.corpus import (
    COMPAT,
    CorpusError,
    ExpectationSet,
    ScoreRow,
    Tri,
    diff_sbom,
    load_corpus,
    score_matrix,
)

BLACK = "baf7c1594db44bdc93811cfccdca3ee3b679fd4e"
DIRECT = {"numpy": "*", "docopt": "==0.6.2", "matplotlib": ">=3.5,<4.0", "urllib3": "*", "seaborn": "==0.13.2",
          "black": f"ref:{BLACK}"}


def expectation(**kw):
    data = {"direct": DIRECT, "transitive_available": False, "remote": ["black"], "optional": ["seaborn", "black"]}
    data.update(kw)
    return ExpectationSet.from_json(data)


def sbom(*components):
    return {"components": [dict(c) for c in components]}


FULL = [
    {"name": "numpy", "version": "1.26.4", "purl": "pkg:pypi/numpy@1.26.4"},
    {"name": "docopt", "version": "0.6.2", "purl": "pkg:pypi/docopt@0.6.2"},
    {"name": "matplotlib", "version": "3.8.0", "purl": "pkg:pypi/matplotlib@3.8.0"},
    {"name": "urllib3", "purl": "pkg:pypi/urllib3"},
    {"name": "seaborn", "version": "0.13.2", "purl": "pkg:pypi/seaborn@0.13.2"},
    {"name": "black", "purl": f"pkg:pypi/black?ref={BLACK}&vcs_url=git%2Bhttps%3A%2F%2Fgithub.com%2Fpsf%2Fblack"},
]


def test_load_corpus_has_every_pair():
    fixtures = load_corpus(CORPUS)
    assert [(f.frontend, f.backend) for f in fixtures] == list(COMPAT)


def test_missing_corpus_dir(tmp_path):
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "nope")


def test_missing_fixture(tmp_path):
    shutil.copytree(CORPUS / "poetry-poetry", tmp_path / "poetry-poetry")
    with pytest.raises(CorpusError, match="hatch/hatchling"):
        load_corpus(tmp_path)


def test_expectation_must_list_required_names():
    with pytest.raises(CorpusError, match="black"):
        ExpectationSet.from_json({"direct": {k: v for k, v in DIRECT.items() if k != "black"},
                                  "transitive_available": False})
    with pytest.raises(CorpusError):
        ExpectationSet.from_json({"direct": DIRECT})


def test_full_score():
    row = diff_sbom(sbom(*FULL), expectation())
    assert (row.finds_direct, row.finds_remote, row.finds_optional) == (Tri.YES, Tri.YES, Tri.YES)
    assert row.finds_transitive is Tri.NO
    assert row.version_mismatches == []


def test_partial_and_missing():
    missing_black = [c for c in FULL if c["name"] != "black"]
    row = diff_sbom(sbom(*missing_black), expectation())
    assert row.finds_direct is Tri.PARTIAL
    assert row.finds_remote is Tri.NO
    assert row.finds_optional is Tri.PARTIAL
    plain_black = missing_black + [{"name": "black", "purl": "pkg:pypi/black"}]
    row = diff_sbom(sbom(*plain_black), expectation())
    assert row.finds_remote is Tri.PARTIAL
    assert row.version_mismatches == [f"black: expected ref {BLACK}, found none"]


def test_version_mismatch_detected():
    wrong = [dict(c, version="0.6.1") if c["name"] == "docopt" else c for c in FULL]
    row = diff_sbom(sbom(*wrong), expectation())
    assert row.version_mismatches == ["docopt: 0.6.1 does not satisfy ==0.6.2"]


def test_names_compared_normalized():
    renamed = [dict(c, name="NumPy") if c["name"] == "numpy" else c for c in FULL]
    assert diff_sbom(sbom(*renamed), expectation()).finds_direct is Tri.YES


def test_score_invariant_under_component_order():
    exp = expectation(transitive_available=True, transitive=["six"])
    comps = FULL + [{"name": "six", "version": "1.16.0", "purl": "pkg:pypi/six@1.16.0"}]
    first = diff_sbom(sbom(*comps), exp)
    rng = random.Random(3)
    for _ in range(10):
        rng.shuffle(comps)
        assert diff_sbom(json.dumps(sbom(*comps)), exp) == first


def test_matrix_order_and_text():
    row = ScoreRow(Tri.YES, Tri.NO, Tri.YES, Tri.PARTIAL)
    matrix = score_matrix({"poetry-poetry": row, "hatch-hatchling": row})
    assert list(matrix.rows) == ["hatch-hatchling", "poetry-poetry"]
    text = matrix.text().splitlines()
    assert text[0].split("|")[1].strip() == "hatch-hatchling"
    assert text[3].startswith("Find transitive dependencies")
    assert matrix.to_json()["poetry-poetry"]["finds_optional"] == "partial"


def test_corpus_matrix_all_yes(corpus_runs):
    matrix = score_matrix({fid: r.score for fid, r in corpus_runs.items()})
    print(matrix.text())
    for fid, row in matrix.rows.items():
        assert row.finds_direct is Tri.YES, fid
        assert row.finds_remote is Tri.YES, fid
        assert row.finds_optional is Tri.YES, fid
