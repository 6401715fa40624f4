"""Requirement strings, requirements files and VCS URLs."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import FrozenSet, List, Optional, Sequence
from urllib.parse import parse_qsl

from . import diagnostics as dg
from .model import (
    REGISTRY,
    REQUIRED,
    VCS_TYPES,
    DeclaredDependency,
    DependencyGroup,
    InvalidName,
    PackageName,
    SourceKind,
    SourceRef,
    normalize_name,
)
from .versions import InvalidSpecifier, VersionSpec, parse_specifier_set


class RequirementSyntaxError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None, code=None):
        where = f"{path or '<string>'}:{line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.path = path
        self.code = code


class IncludeCycleError(ValueError):
    def __init__(self, cycle: Sequence[str]):
        super().__init__("requirements include cycle: " + " -> ".join(cycle))
        self.cycle = list(cycle)


class InvalidSourceURL(ValueError):
    pass


@dataclass(frozen=True)
class Requirement:
    name: PackageName
    extras: FrozenSet[str] = frozenset()
    spec: VersionSpec = VersionSpec()
    source: SourceRef = REGISTRY
    marker: Optional[str] = None

    def declared(self, group: DependencyGroup = REQUIRED, origin=None) -> DeclaredDependency:
        return DeclaredDependency(
            name=self.name,
            spec=self.spec,
            source=self.source,
            group=group,
            extras=self.extras,
            marker=self.marker,
            origin=origin,
        )


# -- VCS / direct URLs -----------------------------------------------------------

_VCS_URL_RE = re.compile(r"^(?P<vcs>[a-z]+)\+(?P<scheme>[a-z][a-z0-9+.-]*)://(?P<rest>.*)$", re.IGNORECASE)


def parse_vcs_url(url: str) -> SourceRef:
    """Split ``<vcs>+<scheme>://host/path[@ref][#egg=..&subdirectory=..]``."""
    m = _VCS_URL_RE.match(url.strip())
    if m is None or m.group("vcs").lower() not in VCS_TYPES:
        raise InvalidSourceURL(f"unrecognized VCS URL scheme: {url!r}")
    vcs = m.group("vcs").lower()
    rest, _, fragment = m.group("rest").partition("#")
    netloc, slash, path = rest.partition("/")
    if not netloc:
        raise InvalidSourceURL(f"VCS URL has no host: {url!r}")
    ref = None
    if "@" in path:
        path, ref = path.rsplit("@", 1)
        ref = ref or None
    params = dict(parse_qsl(fragment)) if fragment else {}
    return SourceRef(
        kind=SourceKind.VCS,
        url=f"{m.group('scheme')}://{netloc}{slash}{path}",
        vcs_type=vcs,
        ref=ref,
        subdirectory=params.get("subdirectory"),
        name_hint=params.get("egg"),
    )


def parse_source_url(url: str) -> SourceRef:
    """Classify a direct reference as VCS, local path or remote archive."""
    url = url.strip()
    if _VCS_URL_RE.match(url):
        return parse_vcs_url(url)
    lowered = url.lower()
    if lowered.startswith("file:"):
        return SourceRef(kind=SourceKind.PATH, url=url)
    if lowered.startswith(("http://", "https://")):
        base, _, fragment = url.partition("#")
        params = dict(parse_qsl(fragment)) if fragment else {}
        return SourceRef(kind=SourceKind.DIRECT_URL, url=base, subdirectory=params.get("subdirectory"))
    raise InvalidSourceURL(f"unsupported URL scheme: {url!r}")


# -- PEP 508 requirement strings ----------------------------------------------------

_REQ_RE = re.compile(
    r"""
    ^\s*
    (?P<name>[A-Za-z0-9](?:[A-Za-z0-9._-]*[A-Za-z0-9])?)
    \s*
    (?:\[(?P<extras>[^\]]*)\])?
    \s*
    (?P<rest>.*?)
    \s*$
    """,
    re.VERBOSE | re.DOTALL,
)


def parse_requirement(text: str) -> Requirement:
    m = _REQ_RE.match(text)
    if m is None:
        raise RequirementSyntaxError(f"cannot parse requirement {text.strip()!r}")
    try:
        name = normalize_name(m.group("name"))
    except InvalidName as exc:
        raise RequirementSyntaxError(str(exc)) from None
    extras = frozenset()
    if m.group("extras") is not None:
        items = [e.strip() for e in m.group("extras").split(",") if e.strip()]
        try:
            extras = frozenset(normalize_name(e).normalized for e in items)
        except InvalidName as exc:
            raise RequirementSyntaxError(f"bad extra in {text.strip()!r}: {exc}") from None
    rest = m.group("rest")
    marker = None
    source = REGISTRY
    spec = VersionSpec()
    if rest.startswith("@"):
        url_part = rest[1:].strip()
        # a marker after a URL must be separated by whitespace
        url_match = re.match(r"^(\S+)(?:\s+;\s*(.*))?$", url_part, re.DOTALL)
        if url_match is None:
            raise RequirementSyntaxError(f"bad URL requirement {text.strip()!r}")
        try:
            source = parse_source_url(url_match.group(1))
        except InvalidSourceURL as exc:
            raise RequirementSyntaxError(str(exc)) from None
        marker = url_match.group(2)
    else:
        spec_text, semi, marker_text = rest.partition(";")
        spec_text = spec_text.strip()
        if spec_text.startswith("(") and spec_text.endswith(")"):
            spec_text = spec_text[1:-1]
        try:
            spec = parse_specifier_set(spec_text)
        except InvalidSpecifier as exc:
            raise RequirementSyntaxError(
                f"bad version specifier in {text.strip()!r}: {exc}", code=exc.code
            ) from None
        marker = marker_text.strip() if semi else None
    if marker is not None:
        marker = marker.strip() or None
    return Requirement(name, extras, spec, source, marker)


# -- requirements files -----------------------------------------------------------

_COMMENT_RE = re.compile(r"(^|\s+)#.*$")
_INCLUDE_OPTS = {"-r", "--requirement"}
_CONSTRAINT_OPTS = {"-c", "--constraint"}
_EDITABLE_OPTS = {"-e", "--editable"}
# global options that take a value and contribute no requirement
_VALUE_OPTS = {
    "-i", "--index-url", "--extra-index-url", "-f", "--find-links",
    "--trusted-host", "--no-binary", "--only-binary", "--use-feature",
}


def _logical_lines(content: str):
    buf, start = [], None
    for number, line in enumerate(content.splitlines(), start=1):
        if start is None:
            start = number
        if line.endswith("\\"):
            buf.append(line[:-1])
            continue
        buf.append(line)
        yield start, " ".join(buf)
        buf, start = [], None
    if buf:
        yield start, " ".join(buf)


def _split_option(line: str):
    """``-r x`` / ``-rx`` / ``--requirement=x`` -> (option, value)."""
    if line.startswith("--"):
        opt, sep, value = line.partition("=")
        if not sep:
            opt, _, value = line.partition(" ")
        return opt.strip(), value.strip()
    opt, value = line[:2], line[2:].strip()
    return opt, value


def _requirement_from_url(url: str) -> Requirement:
    source = parse_source_url(url)
    hint = source.name_hint
    if hint is None and "#" in url:
        hint = dict(parse_qsl(url.partition("#")[2])).get("egg")
    if not hint:
        raise RequirementSyntaxError(f"cannot name requirement without '#egg=': {url!r}")
    return Requirement(normalize_name(hint), source=source)


def _strip_hash_options(line: str) -> str:
    return re.sub(r"\s--hash[=\s]\S+", "", line)


def parse_requirements(
    content: str,
    base: Path,
    visited: Optional[Sequence[str]] = None,
    *,
    root: Optional[Path] = None,
    diagnostics: Optional[list] = None,
) -> List[DeclaredDependency]:
    """Parse a requirements file into declared dependencies.

    ``base`` is the path of the file being parsed (relative to ``root`` when
    given); ``-r`` includes resolve against its directory. ``visited`` is the
    chain of files currently being read and is how include cycles are found.
    With a ``diagnostics`` list, malformed lines are reported there and
    skipped instead of raising.
    """
    base = Path(base)
    chain = list(visited or ()) + [base.as_posix()]
    out: List[DeclaredDependency] = []
    for number, raw in _logical_lines(content):
        line = _COMMENT_RE.sub("", raw).strip()
        if not line:
            continue
        origin = (base.as_posix(), number)
        try:
            if line.startswith("-"):
                opt, value = _split_option(line)
                if opt in _INCLUDE_OPTS:
                    out.extend(_include(value, base, chain, root, diagnostics))
                elif opt in _EDITABLE_OPTS:
                    req = _requirement_from_url(value) if "://" in value else None
                    if req is None:
                        raise RequirementSyntaxError(f"editable local path cannot be named: {value!r}")
                    out.append(req.declared(REQUIRED, origin))
                elif opt in _CONSTRAINT_OPTS or opt in _VALUE_OPTS or opt.startswith("-"):
                    continue
                continue
            line = _strip_hash_options(line)
            if _VCS_URL_RE.match(line) or re.match(r"^(https?|file)://", line, re.IGNORECASE):
                req = _requirement_from_url(line.split()[0])
            else:
                req = parse_requirement(line)
            out.append(req.declared(REQUIRED, origin))
        except IncludeCycleError:
            raise
        except (RequirementSyntaxError, InvalidSourceURL, InvalidName) as exc:
            if diagnostics is None:
                raise RequirementSyntaxError(
                    str(exc), number, base.as_posix(), code=getattr(exc, "code", None)
                ) from None
            code = "A-LOCAL-IN-SPEC" if getattr(exc, "code", None) == "A-LOCAL-IN-SPEC" else "A-PARSE-ERROR"
            diagnostics.append(dg.error(code, f"skipped line: {exc}", origin=origin))
    return out


def _include(target: str, base: Path, chain: List[str], root: Optional[Path], diagnostics):
    path = Path(base).parent / target
    key = Path(*[p for p in path.parts if p != "."]).as_posix()
    if key in chain:
        raise IncludeCycleError(chain[chain.index(key):] + [key])
    full = (root / path) if root is not None else path
    try:
        content = full.read_text(encoding="utf-8")
    except OSError as exc:
        raise RequirementSyntaxError(f"cannot read included file {target!r}: {exc.strerror}") from None
    return parse_requirements(content, Path(key), chain, root=root, diagnostics=diagnostics)
