"""Lockfile readers for the three dialects in common use.

Each reader is a pure function of the file content and returns one
:class:`LockedPackage` per distinct (name, version, source). Group mapping:

* poetry.lock: ``main`` -> required (optional(extra) when ``optional = true``),
  ``dev`` -> development, any other group -> optional(group)
* pdm.lock: ``default`` -> required, ``dev`` -> development, other -> optional(group)
* Pipfile.lock: ``default`` -> required, ``develop`` -> development

A package listed under several groups takes the widest one.
"""

from __future__ import annotations

import json
import re
from typing import Dict, Iterable, List, Optional, Tuple

from . import _toml
from . import diagnostics as dg
from .model import (
    DEVELOPMENT,
    REGISTRY,
    REQUIRED,
    VCS_TYPES,
    DependencyGroup,
    InvalidName,
    LockedPackage,
    PackageName,
    SourceKind,
    SourceRef,
    normalize_name,
    widest_group,
)
from .versions import InvalidVersion, Version, parse_version


class LockfileError(ValueError):
    pass


_HASH_LENGTHS = {"md5": 32, "sha1": 40, "sha256": 64, "sha384": 96, "sha512": 128}
_EXTRA_MARKER = re.compile(r"""extra\s*==\s*["']([^"']+)["']""")
_DEP_NAME = re.compile(r"^\s*([A-Za-z0-9][A-Za-z0-9._-]*)")


def _hash_pair(text: str) -> Optional[Tuple[str, str]]:
    alg, sep, digest = str(text).partition(":")
    alg, digest = alg.strip().lower(), digest.strip().lower()
    if not sep or _HASH_LENGTHS.get(alg) != len(digest) or not re.fullmatch(r"[0-9a-f]+", digest):
        return None
    return alg, digest


def _hashes(values: Iterable[str]) -> Tuple[Tuple[str, str], ...]:
    pairs = {p for p in (_hash_pair(v) for v in values) if p is not None}
    return tuple(sorted(pairs))


def _name_lines(text: str, pattern: str) -> List[int]:
    rx = re.compile(pattern)
    return [n for n, line in enumerate(text.splitlines(), start=1) if rx.match(line)]


def _name(raw, where: str) -> PackageName:
    if not isinstance(raw, str):
        raise LockfileError(f"{where}: package entry has no name")
    try:
        return normalize_name(raw)
    except InvalidName as exc:
        raise LockfileError(f"{where}: {exc}") from None


def _version(raw, name: PackageName, where: str) -> Optional[Version]:
    if raw is None or raw in ("", "*"):
        return None
    text = str(raw)
    if text.startswith("=="):
        text = text[2:]
    try:
        return parse_version(text.strip())
    except InvalidVersion as exc:
        raise LockfileError(f"{where}: {name}: {exc}") from None


def _package(name, version, source, group, hashes, edges, marker, origin, where) -> LockedPackage:
    try:
        return LockedPackage(name, version, source, group, hashes, tuple(edges), marker, origin)
    except ValueError as exc:
        raise LockfileError(f"{where}: {exc}") from None


def _merge(packages: List[LockedPackage]) -> List[LockedPackage]:
    merged: Dict[tuple, LockedPackage] = {}
    for pkg in packages:
        key = (pkg.name.normalized, pkg.version, pkg.source)
        prior = merged.get(key)
        if prior is None:
            merged[key] = pkg
            continue
        edges = tuple(sorted(set(prior.edges) | set(pkg.edges), key=lambda n: n.normalized))
        merged[key] = LockedPackage(
            prior.name,
            prior.version,
            prior.source,
            widest_group(prior.group, pkg.group),
            tuple(sorted(set(prior.hashes) | set(pkg.hashes))),
            edges,
            prior.marker if prior.marker == pkg.marker else None,
            prior.origin,
        )
    return list(merged.values())


def _load_toml(content, path: str) -> dict:
    try:
        return _toml.loads(content)
    except _toml.TOMLDecodeError as exc:
        raise LockfileError(f"{path}: TOML syntax error: {exc}") from None
    except UnicodeDecodeError as exc:
        raise LockfileError(f"{path}: not UTF-8: {exc}") from None


def _text(content) -> str:
    return content.decode("utf-8", errors="replace") if isinstance(content, bytes) else content


# -- poetry.lock --------------------------------------------------------------------


def _poetry_group(entry: dict, marker: Optional[str], extras_owner: Dict[str, str]) -> DependencyGroup:
    groups = entry.get("groups")
    if groups is None:
        # lock formats before 2.1 used a single ``category``
        groups = [{"main": "main", "dev": "dev"}.get(entry.get("category", "main"), entry.get("category"))]
    mapped = []
    for g in groups:
        if g == "main":
            if entry.get("optional") is True:
                m = _EXTRA_MARKER.search(marker or "")
                name = normalize_name(entry["name"]).normalized
                mapped.append(DependencyGroup.optional(m.group(1) if m else extras_owner.get(name, name)))
            else:
                mapped.append(REQUIRED)
        elif g == "dev":
            mapped.append(DEVELOPMENT)
        else:
            mapped.append(DependencyGroup.optional(str(g)))
    return widest_group(*mapped) if mapped else REQUIRED


def _poetry_marker(value) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, str):
        return value or None
    if isinstance(value, dict):
        parts = sorted({str(v) for v in value.values() if v})
        if not parts:
            return None
        return parts[0] if len(parts) == 1 else " or ".join(f"({p})" for p in parts)
    return None


def _poetry_source(entry: dict, where: str) -> SourceRef:
    src = entry.get("source")
    if not src:
        return REGISTRY
    kind = src.get("type")
    if kind in VCS_TYPES:
        return SourceRef(
            kind=SourceKind.VCS,
            url=src.get("url"),
            vcs_type=kind,
            ref=src.get("resolved_reference") or src.get("reference"),
            subdirectory=src.get("subdirectory"),
        )
    if kind == "url":
        return SourceRef(kind=SourceKind.DIRECT_URL, url=src.get("url"), subdirectory=src.get("subdirectory"))
    if kind in ("file", "directory"):
        return SourceRef(kind=SourceKind.PATH, url=src.get("url"))
    if kind in ("legacy", "pypi", None):
        return REGISTRY
    raise LockfileError(f"{where}: unknown source type {kind!r}")


def parse_poetry_lock(content, *, path: str = "poetry.lock", diagnostics: Optional[list] = None) -> List[LockedPackage]:
    data = _load_toml(content, path)
    lines = _name_lines(_text(content), r'^name\s*=')
    owner: Dict[str, str] = {}
    for extra, members in sorted(data.get("extras", {}).items()):
        for member in members:
            m = _DEP_NAME.match(str(member))
            if m:
                owner.setdefault(normalize_name(m.group(1)).normalized, extra)
    out = []
    for i, entry in enumerate(data.get("package", [])):
        where = f"{path} package #{i + 1}"
        name = _name(entry.get("name"), where)
        marker = _poetry_marker(entry.get("markers"))
        edges = []
        for dep in sorted(entry.get("dependencies", {})):
            try:
                edges.append(normalize_name(dep))
            except InvalidName:
                continue
        hashes = _hashes(f.get("hash", "") for f in entry.get("files", []) if isinstance(f, dict))
        origin = (path, lines[i] if i < len(lines) else None)
        out.append(
            _package(
                name,
                _version(entry.get("version"), name, where),
                _poetry_source(entry, where),
                _poetry_group(entry, marker, owner),
                hashes,
                edges,
                marker,
                origin,
                where,
            )
        )
    return _merge(out)


# -- pdm.lock -----------------------------------------------------------------------


def _pdm_group(groups) -> DependencyGroup:
    mapped = []
    for g in groups or ["default"]:
        if g == "default":
            mapped.append(REQUIRED)
        elif g == "dev":
            mapped.append(DEVELOPMENT)
        else:
            mapped.append(DependencyGroup.optional(str(g)))
    return widest_group(*mapped)


def _pdm_source(entry: dict) -> SourceRef:
    for vcs in VCS_TYPES:
        if vcs in entry:
            return SourceRef(
                kind=SourceKind.VCS,
                url=entry[vcs],
                vcs_type=vcs,
                ref=entry.get("revision") or entry.get("ref"),
                subdirectory=entry.get("subdirectory"),
            )
    if "url" in entry:
        return SourceRef(kind=SourceKind.DIRECT_URL, url=entry["url"], subdirectory=entry.get("subdirectory"))
    if "path" in entry:
        return SourceRef(kind=SourceKind.PATH, url=entry["path"])
    return REGISTRY


def parse_pdm_lock(content, *, path: str = "pdm.lock", diagnostics: Optional[list] = None) -> List[LockedPackage]:
    data = _load_toml(content, path)
    lines = _name_lines(_text(content), r'^name\s*=')
    out = []
    for i, entry in enumerate(data.get("package", [])):
        where = f"{path} package #{i + 1}"
        name = _name(entry.get("name"), where)
        edges = []
        for dep in entry.get("dependencies", []):
            m = _DEP_NAME.match(str(dep))
            if m:
                try:
                    edges.append(normalize_name(m.group(1)))
                except InvalidName:
                    continue
        hashes = _hashes(f.get("hash", "") for f in entry.get("files", []) if isinstance(f, dict))
        out.append(
            _package(
                name,
                _version(entry.get("version"), name, where),
                _pdm_source(entry),
                _pdm_group(entry.get("groups")),
                hashes,
                sorted(set(edges), key=lambda n: n.normalized),
                entry.get("marker") or None,
                (path, lines[i] if i < len(lines) else None),
                where,
            )
        )
    return _merge(out)


# -- Pipfile.lock -------------------------------------------------------------------


def _pipfile_source(entry: dict) -> SourceRef:
    for vcs in VCS_TYPES:
        if vcs in entry:
            return SourceRef(
                kind=SourceKind.VCS,
                url=entry[vcs],
                vcs_type=vcs,
                ref=entry.get("ref"),
                subdirectory=entry.get("subdirectory"),
            )
    if "file" in entry:
        url = entry["file"]
        kind = SourceKind.DIRECT_URL if str(url).lower().startswith(("http://", "https://")) else SourceKind.PATH
        return SourceRef(kind=kind, url=url)
    if "path" in entry:
        return SourceRef(kind=SourceKind.PATH, url=entry["path"])
    return REGISTRY


def parse_pipfile_lock(
    content, *, path: str = "Pipfile.lock", diagnostics: Optional[list] = None
) -> List[LockedPackage]:
    """Read both the ``default`` and ``develop`` sections.

    Pipenv records remote (VCS) dependencies without a version; such entries
    come back version-less and an E7 note is appended to ``diagnostics``.
    """
    text = _text(content)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LockfileError(f"{path}: JSON syntax error: {exc}") from None
    if not isinstance(data, dict) or not any(k in data for k in ("default", "develop", "_meta")):
        raise LockfileError(f"{path}: not a Pipfile.lock document")
    line_of = {}
    section = None
    for n, line in enumerate(text.splitlines(), start=1):
        m = re.match(r'^    "([^"]+)":\s*\{', line)
        if m:
            section = m.group(1)
            continue
        m = re.match(r'^        "([^"]+)":\s*\{', line)
        if m and section:
            line_of.setdefault((section, m.group(1)), n)
    out = []
    for section, group in (("default", REQUIRED), ("develop", DEVELOPMENT)):
        entries = data.get(section, {}) or {}
        if not isinstance(entries, dict):
            raise LockfileError(f"{path}: {section!r} must be an object")
        for raw_name in sorted(entries):
            entry = entries[raw_name]
            where = f"{path} {section}.{raw_name}"
            if not isinstance(entry, dict):
                raise LockfileError(f"{where}: entry must be an object")
            name = _name(raw_name, where)
            source = _pipfile_source(entry)
            version = _version(entry.get("version"), name, where)
            origin = (path, line_of.get((section, raw_name)))
            if version is None and not source.is_registry and diagnostics is not None:
                diagnostics.append(
                    dg.warning(
                        "E7",
                        f"{section}.{raw_name} is a {source.kind.value} dependency recorded without a version",
                        name.normalized,
                        origin,
                    )
                )
            out.append(
                _package(
                    name,
                    version,
                    source,
                    group,
                    _hashes(entry.get("hashes", [])),
                    (),
                    entry.get("markers") or None,
                    origin,
                    where,
                )
            )
    return _merge(out)


LOCK_PARSERS = {
    "poetry": ("poetry.lock", parse_poetry_lock),
    "pdm": ("pdm.lock", parse_pdm_lock),
    "pipenv": ("Pipfile.lock", parse_pipfile_lock),
}
