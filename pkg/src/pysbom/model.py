"""Shared domain types: names, sources, groups, dependencies and components."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import FrozenSet, Optional, Tuple
from urllib.parse import quote

from .versions import Version, VersionSpec

_NAME_CHARS = re.compile(r"^[A-Za-z0-9._-]+$")
_SEPARATORS = re.compile(r"[-_.]+")
_CANONICAL = re.compile(r"^[a-z0-9]([a-z0-9-]*[a-z0-9])?$")


class InvalidName(ValueError):
    pass


@dataclass(frozen=True)
class PackageName:
    raw: str
    normalized: str

    def __str__(self) -> str:
        return self.normalized


def normalize_name(raw: str) -> PackageName:
    """Lowercase and collapse separator runs so ``My_Pkg.name`` == ``my-pkg-name``."""
    if not raw or not _NAME_CHARS.match(raw):
        raise InvalidName(f"invalid package name: {raw!r}")
    normalized = _SEPARATORS.sub("-", raw.lower())
    if not _CANONICAL.match(normalized):
        raise InvalidName(f"invalid package name: {raw!r}")
    return PackageName(raw, normalized)


class SourceKind(str, Enum):
    REGISTRY = "registry"
    VCS = "vcs"
    DIRECT_URL = "direct-url"
    PATH = "path"


VCS_TYPES = ("git", "hg", "svn", "bzr")


@dataclass(frozen=True)
class SourceRef:
    kind: SourceKind = SourceKind.REGISTRY
    url: Optional[str] = None
    vcs_type: Optional[str] = None
    ref: Optional[str] = None
    subdirectory: Optional[str] = None
    # ``#egg=`` fragment of a VCS URL, kept so the URL can be rebuilt
    name_hint: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind is SourceKind.VCS and (self.vcs_type not in VCS_TYPES or not self.url):
            raise ValueError("vcs source needs a vcs type and url")

    @property
    def is_registry(self) -> bool:
        return self.kind is SourceKind.REGISTRY


REGISTRY = SourceRef()


class GroupKind(str, Enum):
    REQUIRED = "required"
    OPTIONAL = "optional"
    DEVELOPMENT = "development"


@dataclass(frozen=True)
class DependencyGroup:
    kind: GroupKind = GroupKind.REQUIRED
    extra: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind is GroupKind.OPTIONAL and not self.extra:
            raise ValueError("optional group needs an extra name")

    @classmethod
    def optional(cls, extra: str) -> "DependencyGroup":
        return cls(GroupKind.OPTIONAL, extra)

    def __str__(self) -> str:
        if self.kind is GroupKind.OPTIONAL:
            return f"optional:{self.extra}"
        return self.kind.value


REQUIRED = DependencyGroup()
DEVELOPMENT = DependencyGroup(GroupKind.DEVELOPMENT)

_GROUP_RANK = {GroupKind.REQUIRED: 0, GroupKind.OPTIONAL: 1, GroupKind.DEVELOPMENT: 2}


def widest_group(*groups: DependencyGroup) -> DependencyGroup:
    """The most inclusive group: required beats optional beats development."""
    return min(groups, key=lambda g: (_GROUP_RANK[g.kind], g.extra or ""))


Origin = Tuple[str, Optional[int]]


@dataclass(frozen=True)
class DeclaredDependency:
    name: PackageName
    spec: VersionSpec = VersionSpec()
    source: SourceRef = REGISTRY
    group: DependencyGroup = REQUIRED
    extras: FrozenSet[str] = frozenset()
    marker: Optional[str] = None
    origin: Optional[Origin] = None

    @property
    def unversioned(self) -> bool:
        return not self.spec and self.source.is_registry


@dataclass(frozen=True)
class LockedPackage:
    name: PackageName
    version: Optional[Version]
    source: SourceRef = REGISTRY
    group: DependencyGroup = REQUIRED
    hashes: Tuple[Tuple[str, str], ...] = ()
    edges: Tuple[PackageName, ...] = ()
    marker: Optional[str] = None
    origin: Optional[Origin] = None

    def __post_init__(self) -> None:
        if self.version is None and self.source.is_registry:
            raise ValueError(f"registry lock entry {self.name} has no version")


class Scope(str, Enum):
    REQUIRED = "required"
    OPTIONAL = "optional"
    EXCLUDED_DEV = "excluded-dev"


def scope_for(group: DependencyGroup) -> Scope:
    return {
        GroupKind.REQUIRED: Scope.REQUIRED,
        GroupKind.OPTIONAL: Scope.OPTIONAL,
        GroupKind.DEVELOPMENT: Scope.EXCLUDED_DEV,
    }[group.kind]


class Reach(str, Enum):
    DIRECT = "direct"
    TRANSITIVE = "transitive"


class ResolutionKind(str, Enum):
    LOCKED = "locked"
    PINNED = "pinned"
    RESOLVED = "resolved"
    GUESSED = "guessed"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Resolution:
    kind: ResolutionKind
    at: Optional[datetime] = None

    def __str__(self) -> str:
        return self.kind.value


LOCKED = Resolution(ResolutionKind.LOCKED)
PINNED = Resolution(ResolutionKind.PINNED)
GUESSED = Resolution(ResolutionKind.GUESSED)
UNKNOWN = Resolution(ResolutionKind.UNKNOWN)


@dataclass(frozen=True)
class ResolvedComponent:
    name: PackageName
    version: Optional[Version]
    source: SourceRef = REGISTRY
    scope: Scope = Scope.REQUIRED
    reach: Reach = Reach.DIRECT
    resolution: Resolution = UNKNOWN
    group: DependencyGroup = REQUIRED
    hashes: Tuple[Tuple[str, str], ...] = ()
    origin: Optional[Origin] = None
    index_url: Optional[str] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.version is None and self.resolution.kind is not ResolutionKind.UNKNOWN:
            raise ValueError(f"{self.name}: version-less component must have unknown resolution")

    @property
    def purl(self) -> str:
        return make_purl(self)


DEFAULT_INDEX = "https://pypi.org"


def _q(value: str) -> str:
    return quote(value, safe="")


def render_vcs_url(source: SourceRef, with_ref: bool = True) -> str:
    """``<vcs>+<url>[@ref][#egg=..&subdirectory=..]`` for a VCS source."""
    text = f"{source.vcs_type}+{source.url}"
    if with_ref and source.ref:
        text += f"@{source.ref}"
    fragment = []
    if source.name_hint:
        fragment.append(f"egg={source.name_hint}")
    if source.subdirectory:
        fragment.append(f"subdirectory={source.subdirectory}")
    if with_ref and fragment:
        text += "#" + "&".join(fragment)
    return text


def make_purl(c: ResolvedComponent) -> str:
    purl = f"pkg:pypi/{_q(c.name.normalized)}"
    if c.version is not None:
        purl += f"@{_q(str(c.version))}"
    qualifiers = {}
    src = c.source
    if src.kind is SourceKind.VCS:
        qualifiers["vcs_url"] = render_vcs_url(src, with_ref=False)
        if src.ref:
            qualifiers["ref"] = src.ref
    elif src.kind in (SourceKind.DIRECT_URL, SourceKind.PATH) and src.url:
        qualifiers["download_url"] = src.url
    if src.is_registry and c.index_url and c.index_url.rstrip("/") != DEFAULT_INDEX:
        qualifiers["repository_url"] = c.index_url.rstrip("/")
    if qualifiers:
        purl += "?" + "&".join(f"{k}={_q(v)}" for k, v in sorted(qualifiers.items()))
    return purl
