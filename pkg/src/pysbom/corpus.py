"""Fixture corpus and completeness scoring.

The corpus holds one small project per compatible front-end/back-end pair,
each declaring the same six dependencies. ``diff_sbom`` scores an SBOM
against a fixture's ``expected.json`` on the four completeness questions:
are direct, transitive, remote (VCS) and optional dependencies present?
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple
from urllib.parse import parse_qsl, unquote

from .index import IndexClient
from .model import normalize_name
from .pipeline import scan_project
from .resolver import ResolutionPolicy
from .versions import InvalidSpecifier, InvalidVersion, matches, parse_specifier_set, parse_version

# front-end, back-end pairs that can build a project together
COMPAT: Tuple[Tuple[str, str], ...] = (
    ("hatch", "hatchling"),
    ("hatch", "pdm"),
    ("hatch", "setuptools"),
    ("pdm", "flit"),
    ("pdm", "hatchling"),
    ("pdm", "pdm"),
    ("pdm", "setuptools"),
    ("pip", "hatchling"),
    ("pip", "pdm"),
    ("pip", "setuptools"),
    ("pipenv", "pdm"),
    ("poetry", "poetry"),
)

REQUIRED_NAMES = frozenset({"numpy", "docopt", "black", "seaborn", "matplotlib", "urllib3"})

# offline replay cache for the fixtures lives next to them
INDEX_DIR = "_index"


class CorpusError(ValueError):
    pass


class Tri(str, Enum):
    YES = "yes"
    PARTIAL = "partial"
    NO = "no"


@dataclass(frozen=True)
class ExpectationSet:
    direct: Mapping[str, str]
    transitive_available: bool
    remote: FrozenSet[str]
    optional: FrozenSet[str]
    transitive: FrozenSet[str] = frozenset()
    edges: FrozenSet[Tuple[str, str]] = frozenset()

    def __post_init__(self) -> None:
        missing = REQUIRED_NAMES - set(self.direct)
        if missing:
            raise CorpusError(f"expectation lacks required direct dependencies: {', '.join(sorted(missing))}")

    @classmethod
    def from_json(cls, data: dict) -> "ExpectationSet":
        try:
            return cls(
                direct={normalize_name(k).normalized: str(v) for k, v in data["direct"].items()},
                transitive_available=bool(data["transitive_available"]),
                remote=frozenset(normalize_name(n).normalized for n in data.get("remote", [])),
                optional=frozenset(normalize_name(n).normalized for n in data.get("optional", [])),
                transitive=frozenset(normalize_name(n).normalized for n in data.get("transitive", [])),
                edges=frozenset((a, b) for a, b in data.get("edges", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, CorpusError):
                raise
            raise CorpusError(f"malformed expectation: {exc}") from None


@dataclass(frozen=True)
class FixtureProject:
    frontend: str
    backend: str
    path: Path
    expected: ExpectationSet

    @property
    def id(self) -> str:
        return f"{self.frontend}-{self.backend}"


@dataclass
class ScoreRow:
    finds_direct: Tri
    finds_transitive: Tri
    finds_remote: Tri
    finds_optional: Tri
    version_mismatches: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "finds_direct": self.finds_direct.value,
            "finds_transitive": self.finds_transitive.value,
            "finds_remote": self.finds_remote.value,
            "finds_optional": self.finds_optional.value,
            "version_mismatches": list(self.version_mismatches),
        }


def load_corpus(root) -> List[FixtureProject]:
    """Load all fixtures; every compatible pair must be present."""
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus directory not found: {root}")
    out = []
    for frontend, backend in COMPAT:
        path = root / f"{frontend}-{backend}"
        if not path.is_dir():
            raise CorpusError(f"fixture for {frontend}/{backend} is missing ({path})")
        exp_path = path / "expected.json"
        try:
            data = json.loads(exp_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CorpusError(f"{frontend}-{backend}: expected.json is missing") from None
        except ValueError as exc:
            raise CorpusError(f"{frontend}-{backend}: expected.json is not JSON: {exc}") from None
        try:
            expected = ExpectationSet.from_json(data)
        except CorpusError as exc:
            raise CorpusError(f"{frontend}-{backend}: {exc}") from None
        out.append(FixtureProject(frontend, backend, path, expected))
    return out


def _tri(found: int, wanted: int) -> Tri:
    if wanted == 0 or found == wanted:
        return Tri.YES
    return Tri.PARTIAL if found else Tri.NO


def _purl_qualifiers(purl: str) -> Dict[str, str]:
    _, _, query = purl.partition("?")
    return {k: unquote(v) for k, v in parse_qsl(query, keep_blank_values=True)}


def _version_problem(name: str, want: str, comp: dict) -> Optional[str]:
    version = comp.get("version")
    if want.startswith("ref:"):
        ref = want[4:]
        qualifiers = _purl_qualifiers(comp.get("purl", ""))
        if qualifiers.get("ref") == ref:
            return None
        return f"{name}: expected ref {ref}, found {qualifiers.get('ref') or 'none'}"
    if want in ("", "*"):
        return None
    if version is None:
        return f"{name}: expected {want}, component has no version"
    try:
        spec = parse_specifier_set(want)
        ok = matches(spec, parse_version(version), prereleases=True)
    except (InvalidSpecifier, InvalidVersion) as exc:
        return f"{name}: cannot check {version} against {want}: {exc}"
    return None if ok else f"{name}: {version} does not satisfy {want}"


def diff_sbom(produced, expected: ExpectationSet) -> ScoreRow:
    """Score an SBOM (bytes, text or parsed JSON) against expectations.

    Names are compared after normalization. Versions are checked only where
    the expectation pins (``==``), constrains, or names a VCS ref.
    """
    if isinstance(produced, (bytes, str)):
        produced = json.loads(produced)
    comps: Dict[str, dict] = {}
    for c in produced.get("components", []):
        try:
            comps[normalize_name(c["name"]).normalized] = c
        except (KeyError, ValueError):
            continue
    names = set(comps)

    direct = set(expected.direct)
    finds_direct = _tri(len(direct & names), len(direct))

    if expected.transitive:
        finds_transitive = _tri(len(expected.transitive & names), len(expected.transitive))
    else:
        finds_transitive = Tri.YES if names - direct else Tri.NO

    remote_found = 0
    remote_partial = 0
    for n in expected.remote:
        comp = comps.get(n)
        if comp is None:
            continue
        if "vcs_url" in _purl_qualifiers(comp.get("purl", "")):
            remote_found += 1
        else:
            remote_partial += 1
    if not expected.remote or remote_found == len(expected.remote):
        finds_remote = Tri.YES
    else:
        finds_remote = Tri.PARTIAL if remote_found or remote_partial else Tri.NO

    finds_optional = _tri(len(expected.optional & names), len(expected.optional))

    problems = []
    for name in sorted(direct & names):
        problem = _version_problem(name, expected.direct[name], comps[name])
        if problem:
            problems.append(problem)
    return ScoreRow(finds_direct, finds_transitive, finds_remote, finds_optional, problems)


_ROWS = (
    ("finds_direct", "Find direct dependencies"),
    ("finds_transitive", "Find transitive dependencies"),
    ("finds_remote", "Find remote dependencies"),
    ("finds_optional", "Find optional dependencies"),
)


@dataclass
class ScoreMatrix:
    rows: Dict[str, ScoreRow]

    def to_json(self) -> dict:
        return {fixture: row.to_dict() for fixture, row in self.rows.items()}

    def text(self) -> str:
        fixtures = list(self.rows)
        label_w = max(len(label) for _, label in _ROWS + (("", "Version mismatches"),))
        widths = [max(len(f), 7) for f in fixtures]
        lines = [" " * label_w + " | " + " | ".join(f.ljust(w) for f, w in zip(fixtures, widths))]
        lines.append("-" * len(lines[0]))
        for attr, label in _ROWS:
            cells = [getattr(self.rows[f], attr).value.ljust(w) for f, w in zip(fixtures, widths)]
            lines.append(label.ljust(label_w) + " | " + " | ".join(cells))
        cells = [str(len(self.rows[f].version_mismatches)).ljust(w) for f, w in zip(fixtures, widths)]
        lines.append("Version mismatches".ljust(label_w) + " | " + " | ".join(cells))
        return "\n".join(lines) + "\n"


def score_matrix(runs: Mapping[str, ScoreRow]) -> ScoreMatrix:
    """Arrange per-fixture scores in corpus order."""
    order = {f"{fe}-{be}": i for i, (fe, be) in enumerate(COMPAT)}
    return ScoreMatrix({k: runs[k] for k in sorted(runs, key=lambda k: (order.get(k, len(order)), k))})


def corpus_policy() -> ResolutionPolicy:
    """The environment the corpus fixtures were locked for, everything included."""
    return ResolutionPolicy(include_optional=True, include_dev=True, python_version="3.10", sys_platform="linux")


@dataclass
class CorpusRun:
    fixture: FixtureProject
    sbom: bytes
    report: bytes
    score: ScoreRow
    edges: List[Tuple[Optional[str], str]]


def run_corpus(root, policy: Optional[ResolutionPolicy] = None, client: Optional[IndexClient] = None) -> List[CorpusRun]:
    """Scan every fixture offline against the recorded index and score it."""
    root = Path(root)
    fixtures = load_corpus(root)
    policy = policy or corpus_policy()
    client = client or IndexClient("https://pypi.org", root / INDEX_DIR, offline=True)

    def one(fx: FixtureProject) -> CorpusRun:
        result = scan_project(fx.path, policy, client)
        sbom = result.sbom()
        return CorpusRun(fx, sbom, result.report(), diff_sbom(sbom, fx.expected), list(result.resolved.edges))

    with ThreadPoolExecutor(max_workers=4) as pool:
        return list(pool.map(one, fixtures))
