from datetime import datetime, timezone

import pytest

from fakeindex import FakeIndex

from pysbom.index import IndexClient
from pysbom.model import Reach, ResolutionKind, Scope
from pysbom.project import build_project_model
from pysbom.requirements import parse_requirement
from pysbom.resolver import NoCandidate, ResolutionPolicy, Strategy, resolve_project, resolve_version

PY310 = dict(python_version="3.10", sys_platform="linux")


def project(tmp_path, requirements, **files):
    (tmp_path / "requirements.txt").write_text(requirements)
    for name, content in files.items():
        (tmp_path / name.replace("_", ".")).write_text(content)
    return build_project_model(tmp_path)


def run(tmp_path, requirements, index=None, policy=None, **files):
    model = project(tmp_path, requirements, **files)
    client = IndexClient("https://pypi.org", tmp_path / ".cache", transport=index) if index is not None else None
    result = resolve_project(model, policy or ResolutionPolicy(**PY310), client)
    comps = {c.name.normalized: c for c in result.components}
    return comps, set(result.edges), result.diagnostics


def codes(diags, subject=None):
    return {d.code for d in diags if subject is None or d.subject == subject}


@pytest.fixture
def index():
    return (
        FakeIndex()
        .add("app", "1.0", ["lib>=1", 'extra-dep ; extra == "fast"'])
        .add("lib", "1.0", ["base"], uploaded="2023-01-01T00:00:00Z")
        .add("lib", "1.5", ["base"], uploaded="2023-06-01T00:00:00Z")
        .add("lib", "2.0", ["base", 'winonly ; sys_platform == "win32"'], uploaded="2024-01-01T00:00:00Z")
        .add("lib", "3.0", ["base"], uploaded="2024-02-01T00:00:00Z", yanked=True)
        .add("lib", "4.0", ["base"], uploaded="2024-03-01T00:00:00Z", requires_python=">=3.12")
        .add("base", "0.1", [])
        .add("extra-dep", "2.0", [])
        .add("winonly", "1.0", [])
        .add("cyc-a", "1.0", ["cyc-b"])
        .add("cyc-b", "1.0", ["cyc-a"])
        .add("beta", "1.0b1", [])
    )


def test_resolve_version_filters(index, tmp_path):
    client = IndexClient("https://pypi.org", tmp_path, transport=index)
    idx = client.fetch_release_index("lib")
    d = parse_requirement("lib").declared()
    version, res = resolve_version(d, idx, ResolutionPolicy(**PY310))
    # 4.0 needs a newer Python, 3.0 is yanked
    assert str(version) == "2.0"
    assert res.kind is ResolutionKind.RESOLVED
    as_of = datetime(2023, 7, 1, tzinfo=timezone.utc)
    version, res = resolve_version(d, idx, ResolutionPolicy(as_of=as_of, **PY310))
    assert str(version) == "1.5"
    assert res.at == as_of
    with pytest.raises(NoCandidate):
        resolve_version(d, idx, ResolutionPolicy(as_of=datetime(2020, 1, 1, tzinfo=timezone.utc), **PY310))
    assert str(resolve_version(d, idx, ResolutionPolicy(python_version="3.12"))[0]) == "4.0"


def test_transitive_closure_with_markers_and_extras(tmp_path, index):
    comps, edges, diags = run(tmp_path, "app[fast]\n", index)
    assert set(comps) == {"app", "lib", "base", "extra-dep"}
    assert edges == {(None, "app"), ("app", "lib"), ("lib", "base"), ("app", "extra-dep")}
    assert comps["app"].reach is Reach.DIRECT
    assert comps["lib"].reach is Reach.TRANSITIVE
    assert str(comps["lib"].version) == "2.0"


def test_marker_gate_follows_platform(tmp_path, index):
    comps, edges, _ = run(tmp_path, "lib\n", index, ResolutionPolicy(python_version="3.10", sys_platform="win32"))
    assert ("lib", "winonly") in edges
    comps, edges, _ = run(tmp_path, "lib\n", index)
    assert "winonly" not in comps


def test_cycle_terminates(tmp_path, index):
    comps, edges, _ = run(tmp_path, "cyc-a\n", index)
    assert set(comps) == {"cyc-a", "cyc-b"}
    assert {("cyc-a", "cyc-b"), ("cyc-b", "cyc-a")} <= edges


def test_exact_pin_needs_no_index(tmp_path):
    comps, _, diags = run(tmp_path, "lib==1.0\n")
    assert comps["lib"].resolution.kind is ResolutionKind.PINNED
    assert str(comps["lib"].version) == "1.0"


def test_unversioned_without_index_is_kept(tmp_path):
    comps, _, diags = run(tmp_path, "numpy\nlib>=1.0\n", policy=ResolutionPolicy(offline=True, **PY310))
    assert comps["numpy"].version is None
    assert comps["numpy"].resolution.kind is ResolutionKind.UNKNOWN
    assert "T3" in codes(diags, "numpy")
    assert "A-UNRESOLVED" in codes(diags, "lib")


def test_guess_strategy_flags_t6(tmp_path):
    policy = ResolutionPolicy(strategy_order=(Strategy.GUESS,), **PY310)
    comps, _, diags = run(tmp_path, "lib>=1.5\nother<2\n", policy=policy)
    assert str(comps["lib"].version) == "1.5"
    assert comps["lib"].resolution.kind is ResolutionKind.GUESSED
    assert "T6" in codes(diags, "lib")
    assert comps["other"].version is None


def test_strategy_order(tmp_path, index):
    policy = ResolutionPolicy(strategy_order=(Strategy.GUESS, Strategy.RESOLVE), **PY310)
    comps, _, _ = run(tmp_path, "lib>=1.0\n", index, policy)
    assert comps["lib"].resolution.kind is ResolutionKind.GUESSED
    policy = ResolutionPolicy(strategy_order=(Strategy.RESOLVE, Strategy.GUESS), **PY310)
    comps, _, _ = run(tmp_path, "lib>=1.0\n", index, policy)
    assert comps["lib"].resolution.kind is ResolutionKind.RESOLVED


def test_prerelease_fallback_is_noted(tmp_path, index):
    comps, _, diags = run(tmp_path, "beta\n", index)
    assert str(comps["beta"].version) == "1.0b1"
    assert "A-PRERELEASE" in codes(diags, "beta")


def test_vcs_declaration_without_lock(tmp_path):
    comps, _, diags = run(tmp_path, "black @ git+https://github.com/psf/black@abc\n")
    assert comps["black"].version is None
    assert comps["black"].source.ref == "abc"
    assert "A-UNRESOLVED" in codes(diags, "black")


def test_marker_excluded_direct(tmp_path):
    comps, _, diags = run(tmp_path, 'pywin32==306 ; sys_platform == "win32"\n')
    assert "pywin32" not in comps
    assert "A-MARKER-EXCLUDED" in codes(diags, "pywin32")


POETRY_PYPROJECT = """
[tool.poetry]
name = "p"
version = "0.1.0"

[tool.poetry.dependencies]
python = "^3.10"
lib = "^1.0"
plot = {version = "1.0", optional = true}

[tool.poetry.group.dev.dependencies]
pytest = "*"
"""

POETRY_LOCK = """
[[package]]
name = "lib"
version = "1.0"
optional = false
groups = ["main"]
files = []

[package.dependencies]
base = "*"

[[package]]
name = "base"
version = "0.1"
optional = false
groups = ["main"]
files = []

[[package]]
name = "plot"
version = "1.0"
optional = true
groups = ["main"]
files = []

[[package]]
name = "pytest"
version = "8.0"
optional = false
groups = ["dev"]
files = []

[package.dependencies]
pluggy = "*"

[[package]]
name = "pluggy"
version = "1.4"
optional = false
groups = ["dev"]
files = []
"""


def test_lock_takes_precedence_over_index(tmp_path, index):
    comps, edges, _ = run(tmp_path, "", index, pyproject_toml=POETRY_PYPROJECT, poetry_lock=POETRY_LOCK)
    assert str(comps["lib"].version) == "1.0"
    assert comps["lib"].resolution.kind is ResolutionKind.LOCKED
    assert comps["base"].reach is Reach.TRANSITIVE
    assert ("lib", "base") in edges
    # nothing was fetched: the lock answered everything
    assert index.calls == []


def test_group_policy(tmp_path):
    comps, _, diags = run(tmp_path, "", pyproject_toml=POETRY_PYPROJECT, poetry_lock=POETRY_LOCK)
    assert set(comps) == {"lib", "base"}
    everything = ResolutionPolicy(include_optional=True, include_dev=True, **PY310)
    comps, edges, _ = run(tmp_path, "", policy=everything, pyproject_toml=POETRY_PYPROJECT, poetry_lock=POETRY_LOCK)
    assert set(comps) == {"lib", "base", "plot", "pytest", "pluggy"}
    assert comps["plot"].scope is Scope.OPTIONAL
    assert comps["pytest"].scope is Scope.EXCLUDED_DEV
    assert comps["pluggy"].scope is Scope.EXCLUDED_DEV
    assert ("pytest", "pluggy") in edges


def test_no_declared_dependency_is_dropped(tmp_path):
    reqs = "numpy\nlib>=1\nblack @ git+https://github.com/psf/black\nfoo==1.0\nbar<3\n"
    policy = ResolutionPolicy(offline=True, **PY310)
    comps, _, _ = run(tmp_path, reqs, policy=policy)
    assert {"numpy", "lib", "black", "foo", "bar"} <= set(comps)


def test_policy_validation():
    with pytest.raises(ValueError):
        ResolutionPolicy(strategy_order=())
    with pytest.raises(ValueError):
        ResolutionPolicy(strategy_order=("lock", "lock"))
    with pytest.raises(ValueError):
        ResolutionPolicy(as_of=datetime(2024, 1, 1))
