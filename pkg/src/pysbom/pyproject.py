"""Dependency declarations from ``pyproject.toml``.

Three dialects are read: standard ``[project]`` tables, Poetry's
``[tool.poetry]`` tables and PDM's ``[tool.pdm.dev-dependencies]``. Their
notions of "optional" differ, so they are mapped onto one group model:

* ``project.optional-dependencies.<extra>`` -> optional(extra)
* ``tool.poetry.group.dev`` / ``tool.poetry.dev-dependencies`` -> development
* ``tool.poetry.group.<g>`` (g != dev) -> optional(g)
* ``tool.pdm.dev-dependencies.<g>`` -> development
* ``dependency-groups.dev`` -> development, other groups -> optional(g)
"""

from __future__ import annotations

import re
from typing import List, Optional, Tuple

from . import _toml
from . import diagnostics as dg
from .model import (
    DEVELOPMENT,
    REGISTRY,
    REQUIRED,
    DeclaredDependency,
    DependencyGroup,
    InvalidName,
    SourceKind,
    SourceRef,
    normalize_name,
)
from .requirements import RequirementSyntaxError, parse_requirement
from .versions import (
    Clause,
    InvalidSpecifier,
    InvalidVersion,
    VersionSpec,
    parse_clause,
    parse_version,
)

_BACKEND_HINTS = {
    "poetry.core.masonry.api": "poetry",
    "poetry.masonry.api": "poetry",
    "pdm.backend": "pdm",
    "pdm.pep517.api": "pdm",
    "hatchling.build": "hatch",
    "setuptools.build_meta": "pip",
    "setuptools.build_meta:__legacy__": "pip",
}


class PyprojectError(ValueError):
    pass


# -- Poetry constraint shorthand -------------------------------------------------

_POETRY_TOKEN = re.compile(r"(?P<op>\^|~=|~|===|==|!=|<=|>=|<|>|=)?\s*(?P<ver>[0-9A-Za-z.*+!_-]+)")


def _bump(release: Tuple[int, ...], index: int, width: int) -> str:
    parts = list(release[: index + 1])
    parts[index] += 1
    parts += [0] * (width - len(parts))
    return ".".join(str(p) for p in parts)


def _caret(literal: str) -> List[Clause]:
    v = parse_version(literal)
    rel = v.release
    width = len(rel)
    major = rel[0]
    minor = rel[1] if width > 1 else None
    patch = rel[2] if width > 2 else None
    if major > 0 or minor is None:
        upper = _bump(rel, 0, width)
    elif minor > 0 or patch is None:
        upper = _bump(rel, 1, width)
    else:
        upper = _bump(rel, 2, width)
    return [Clause(">=", literal), Clause("<", upper)]


def _tilde(literal: str) -> List[Clause]:
    v = parse_version(literal)
    width = len(v.release)
    upper = _bump(v.release, 0 if width == 1 else 1, width)
    return [Clause(">=", literal), Clause("<", upper)]


def poetry_constraint(text: str) -> VersionSpec:
    """Translate a Poetry version constraint into standard clauses.

    ``^1.2`` becomes ``>=1.2,<2.0`` and ``~1.2`` becomes ``>=1.2,<1.3``.
    Alternatives joined with ``||`` have no conjunctive form and are rejected.
    """
    text = text.strip()
    if text in ("", "*"):
        return VersionSpec()
    if "||" in text or "|" in text:
        raise InvalidSpecifier(f"union constraint {text!r} is not supported", code="A-UNSUPPORTED-CONSTRAINT")
    clauses: List[Clause] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise InvalidSpecifier(f"empty clause in {text!r}")
        pos = 0
        while pos < len(part):
            m = _POETRY_TOKEN.match(part, pos)
            if m is None:
                raise InvalidSpecifier(f"cannot parse constraint {text!r}")
            op, literal = m.group("op"), m.group("ver")
            pos = m.end()
            while pos < len(part) and part[pos].isspace():
                pos += 1
            if literal == "*":
                continue
            try:
                if op == "^":
                    clauses.extend(_caret(literal))
                elif op == "~":
                    clauses.extend(_tilde(literal))
                elif op in (None, "="):
                    clauses.append(parse_clause("==" + literal))
                else:
                    clauses.append(parse_clause(op + literal))
            except InvalidVersion as exc:
                raise InvalidSpecifier(str(exc)) from None
    return VersionSpec(tuple(clauses))


# -- helpers --------------------------------------------------------------------


def _line_of(text: str, *needles: str) -> Optional[int]:
    for needle in needles:
        if not needle:
            continue
        for number, line in enumerate(text.splitlines(), start=1):
            if needle in line:
                return number
    return None


def _extras_to_groups(extras_table: dict) -> dict:
    owner = {}
    for extra in sorted(extras_table):
        for name in extras_table[extra]:
            try:
                key = normalize_name(re.split(r"[\s\[(<>=!~;]", name.strip(), 1)[0]).normalized
            except InvalidName:
                continue
            owner.setdefault(key, extra)
    return owner


class _Reader:
    def __init__(self, text: str, path: str, diagnostics: Optional[list]):
        self.text = text
        self.path = path
        self.diagnostics = diagnostics
        self.out: List[DeclaredDependency] = []

    def report(self, code: str, message: str, subject=None, line=None) -> None:
        if self.diagnostics is None:
            raise PyprojectError(f"{self.path}:{line or '?'}: {message}")
        self.diagnostics.append(dg.error(code, message, subject, (self.path, line)))

    def pep508(self, items, group: DependencyGroup, table: str) -> None:
        if not isinstance(items, list):
            self.report("A-PARSE-ERROR", f"{table} must be an array of requirement strings")
            return
        for item in items:
            if not isinstance(item, str):
                # PEP 735 include-group tables contribute no direct entries
                continue
            line = _line_of(self.text, f'"{item}"', f"'{item}'")
            try:
                req = parse_requirement(item)
            except RequirementSyntaxError as exc:
                code = exc.code or "A-PARSE-ERROR"
                self.report(code, f"{table}: {exc}", line=line)
                continue
            self.out.append(req.declared(group, (self.path, line)))

    def poetry_table(self, deps: dict, group_for, table: str) -> None:
        for raw_name, value in deps.items():
            if raw_name.lower() == "python":
                continue
            line = _line_of(self.text, f"{raw_name} =", f'"{raw_name}" =')
            try:
                name = normalize_name(raw_name)
            except InvalidName as exc:
                self.report("A-PARSE-ERROR", f"{table}: {exc}", line=line)
                continue
            entries = value if isinstance(value, list) else [value]
            for entry in entries:
                try:
                    self.out.append(self.poetry_entry(name, entry, group_for, line))
                except (InvalidSpecifier, ValueError) as exc:
                    code = getattr(exc, "code", None) or "A-PARSE-ERROR"
                    self.report(code, f"{table}.{raw_name}: {exc}", name.normalized, line)

    def poetry_entry(self, name, entry, group_for, line) -> DeclaredDependency:
        if isinstance(entry, str):
            return DeclaredDependency(name, poetry_constraint(entry), REGISTRY, group_for(name, False), origin=(self.path, line))
        if not isinstance(entry, dict):
            raise ValueError(f"unsupported dependency value {entry!r}")
        spec = poetry_constraint(str(entry.get("version", "")))
        source = REGISTRY
        for vcs in ("git", "hg", "svn", "bzr"):
            if vcs in entry:
                ref = entry.get("rev") or entry.get("tag") or entry.get("branch")
                source = SourceRef(
                    kind=SourceKind.VCS,
                    url=entry[vcs],
                    vcs_type=vcs,
                    ref=ref,
                    subdirectory=entry.get("subdirectory"),
                )
                break
        else:
            if "url" in entry:
                source = SourceRef(kind=SourceKind.DIRECT_URL, url=entry["url"], subdirectory=entry.get("subdirectory"))
            elif "path" in entry:
                source = SourceRef(kind=SourceKind.PATH, url=entry["path"])
        extras = frozenset(normalize_name(e).normalized for e in entry.get("extras", []))
        marker = entry.get("markers")
        return DeclaredDependency(
            name,
            spec,
            source,
            group_for(name, bool(entry.get("optional", False))),
            extras,
            marker,
            (self.path, line),
        )


def parse_pyproject(
    content, *, path: str = "pyproject.toml", diagnostics: Optional[list] = None
) -> Tuple[List[DeclaredDependency], Optional[str]]:
    """Read every dependency table in a pyproject file.

    Returns the declarations and a front-end hint (``pip``, ``hatch``,
    ``pdm``, ``pipenv`` or ``poetry``) guessed from the tables and build
    back-end present. Raises on TOML syntax errors; malformed requirement
    strings raise too unless a ``diagnostics`` list is given.
    """
    text = content.decode("utf-8") if isinstance(content, bytes) else content
    try:
        data = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise PyprojectError(f"{path}: TOML syntax error: {exc}") from None
    reader = _Reader(text, path, diagnostics)

    project = data.get("project", {})
    if "dependencies" in project:
        reader.pep508(project["dependencies"], REQUIRED, "project.dependencies")
    for extra, items in sorted(project.get("optional-dependencies", {}).items()):
        reader.pep508(items, DependencyGroup.optional(extra), f"project.optional-dependencies.{extra}")

    for gname, items in sorted(data.get("dependency-groups", {}).items()):
        group = DEVELOPMENT if gname == "dev" else DependencyGroup.optional(gname)
        reader.pep508(items, group, f"dependency-groups.{gname}")

    tool = data.get("tool", {})
    poetry = tool.get("poetry", {})
    if poetry:
        owner = _extras_to_groups(poetry.get("extras", {}))

        def main_group(name, optional):
            if not optional:
                return REQUIRED
            return DependencyGroup.optional(owner.get(name.normalized, name.normalized))

        reader.poetry_table(poetry.get("dependencies", {}), main_group, "tool.poetry.dependencies")
        reader.poetry_table(
            poetry.get("dev-dependencies", {}), lambda n, o: DEVELOPMENT, "tool.poetry.dev-dependencies"
        )
        for gname, gtable in sorted(poetry.get("group", {}).items()):
            group = DEVELOPMENT if gname == "dev" else DependencyGroup.optional(gname)
            reader.poetry_table(
                gtable.get("dependencies", {}), lambda n, o, g=group: g, f"tool.poetry.group.{gname}.dependencies"
            )

    pdm = tool.get("pdm", {})
    for gname, items in sorted(pdm.get("dev-dependencies", {}).items()):
        reader.pep508(items, DEVELOPMENT, f"tool.pdm.dev-dependencies.{gname}")

    return reader.out, frontend_hint(data)


def frontend_hint(data: dict) -> Optional[str]:
    tool = data.get("tool", {})
    for key in ("poetry", "pdm", "hatch"):
        if key in tool:
            return key
    backend = data.get("build-system", {}).get("build-backend")
    return _BACKEND_HINTS.get(backend)


def project_identity(content) -> Tuple[Optional[str], Optional[str]]:
    """(name, version) of the project itself, when declared statically."""
    try:
        data = _toml.loads(content)
    except _toml.TOMLDecodeError:
        return None, None
    project = data.get("project", {})
    poetry = data.get("tool", {}).get("poetry", {})
    name = project.get("name") or poetry.get("name")
    version = project.get("version") or poetry.get("version")
    return name, version
