"""PEP 440 versions and specifier sets.

Parsing, ordering and matching are implemented here rather than borrowed, so
the behaviour the resolver depends on is pinned by this module's own tests.
``guess_pin`` reproduces the constraint-guessing shortcut some static SBOM
generators apply; it is only ever used as an explicitly labelled fallback.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property, total_ordering
from typing import Iterable, List, Optional, Tuple


class InvalidVersion(ValueError):
    """Raised for text that is not a PEP 440 version."""


class InvalidSpecifier(ValueError):
    """Raised for malformed specifier text.

    ``code`` carries a diagnostic code when the failure maps to one.
    """

    def __init__(self, message: str, code: Optional[str] = None):
        super().__init__(message)
        self.code = code


_VERSION_RE = re.compile(
    r"""
    ^\s*v?
    (?:(?P<epoch>[0-9]+)!)?
    (?P<release>[0-9]+(?:\.[0-9]+)*)
    (?P<pre>
        [-_.]?
        (?P<pre_l>alpha|a|beta|b|preview|pre|c|rc)
        [-_.]?
        (?P<pre_n>[0-9]+)?
    )?
    (?P<post>
        (?:-(?P<post_n1>[0-9]+))
        |
        (?:
            [-_.]?
            (?P<post_l>post|rev|r)
            [-_.]?
            (?P<post_n2>[0-9]+)?
        )
    )?
    (?P<dev>
        [-_.]?
        (?P<dev_l>dev)
        [-_.]?
        (?P<dev_n>[0-9]+)?
    )?
    (?:\+(?P<local>[a-z0-9]+(?:[-_.][a-z0-9]+)*))?
    \s*$
    """,
    re.VERBOSE | re.IGNORECASE,
)

_PRE_PHASES = {"a": "a", "alpha": "a", "b": "b", "beta": "b", "c": "rc", "rc": "rc", "pre": "rc", "preview": "rc"}
_PHASE_ORDER = {"a": 0, "b": 1, "rc": 2}


@total_ordering
@dataclass(frozen=True, eq=False)
class Version:
    epoch: int = 0
    release: Tuple[int, ...] = (0,)
    pre: Optional[Tuple[str, int]] = None
    post: Optional[int] = None
    dev: Optional[int] = None
    local: Optional[str] = None
    _key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.release:
            raise InvalidVersion("release segment must be non-empty")
        if self.pre is not None and self.pre[0] not in _PHASE_ORDER:
            raise InvalidVersion(f"unknown pre-release phase {self.pre[0]!r}")
        object.__setattr__(self, "_key", _sort_key(self))

    @property
    def is_prerelease(self) -> bool:
        return self.pre is not None or self.dev is not None

    @property
    def is_postrelease(self) -> bool:
        return self.post is not None

    @property
    def public(self) -> "Version":
        if self.local is None:
            return self
        return Version(self.epoch, self.release, self.pre, self.post, self.dev)

    @property
    def base(self) -> "Version":
        return Version(self.epoch, self.release)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Version):
            return NotImplemented
        return self._key == other._key

    def __lt__(self, other: "Version") -> bool:
        if not isinstance(other, Version):
            return NotImplemented
        return self._key < other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __str__(self) -> str:
        parts = []
        if self.epoch:
            parts.append(f"{self.epoch}!")
        parts.append(".".join(str(x) for x in self.release))
        if self.pre is not None:
            parts.append(f"{self.pre[0]}{self.pre[1]}")
        if self.post is not None:
            parts.append(f".post{self.post}")
        if self.dev is not None:
            parts.append(f".dev{self.dev}")
        if self.local is not None:
            parts.append(f"+{self.local}")
        return "".join(parts)


def _sort_key(v: Version) -> tuple:
    release = list(v.release)
    while len(release) > 1 and release[-1] == 0:
        release.pop()
    # dev-only < pre-release < final
    if v.pre is None and v.post is None and v.dev is not None:
        pre = (0,)
    elif v.pre is None:
        pre = (2,)
    else:
        pre = (1, _PHASE_ORDER[v.pre[0]], v.pre[1])
    post = (0,) if v.post is None else (1, v.post)
    dev = (1,) if v.dev is None else (0, v.dev)
    if v.local is None:
        local: tuple = (0,)
    else:
        # numeric segments sort above alphanumeric ones
        local = (1, tuple((1, int(s), "") if s.isdigit() else (0, 0, s) for s in v.local.split(".")))
    return (v.epoch, tuple(release), pre, post, dev, local)


def parse_version(text: str) -> Version:
    m = _VERSION_RE.match(text)
    if m is None:
        raise InvalidVersion(f"malformed version: {text!r}")
    pre = None
    if m.group("pre_l"):
        pre = (_PRE_PHASES[m.group("pre_l").lower()], int(m.group("pre_n") or 0))
    post = None
    if m.group("post_n1"):
        post = int(m.group("post_n1"))
    elif m.group("post_l"):
        post = int(m.group("post_n2") or 0)
    dev = int(m.group("dev_n") or 0) if m.group("dev_l") else None
    local = m.group("local")
    if local is not None:
        local = ".".join(str(int(s)) if s.isdigit() else s for s in re.split(r"[-_.]", local.lower()))
    return Version(
        epoch=int(m.group("epoch") or 0),
        release=tuple(int(x) for x in m.group("release").split(".")),
        pre=pre,
        post=post,
        dev=dev,
        local=local,
    )


def compare(a: Version, b: Version) -> int:
    """Three-way comparison: -1, 0 or 1."""
    if a < b:
        return -1
    if b < a:
        return 1
    return 0


# -- specifiers ---------------------------------------------------------------

OPERATORS = ("~=", "==", "!=", "<=", ">=", "<", ">")
_CLAUSE_RE = re.compile(r"^\s*(===|~=|==|!=|<=|>=|<|>)\s*(\S.*?)\s*$")


@dataclass(frozen=True)
class Clause:
    operator: str
    literal: str
    wildcard: bool = False

    def __post_init__(self) -> None:
        if self.operator not in OPERATORS:
            raise InvalidSpecifier(f"unknown operator {self.operator!r}")
        if self.wildcard and self.operator not in ("==", "!="):
            raise InvalidSpecifier(f"wildcard not allowed with {self.operator!r}")

    @cached_property
    def version(self) -> Version:
        return parse_version(self.literal)

    def __str__(self) -> str:
        return f"{self.operator}{self.literal}{'.*' if self.wildcard else ''}"


@dataclass(frozen=True)
class VersionSpec:
    clauses: Tuple[Clause, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.clauses)

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.clauses)

    def __and__(self, other: "VersionSpec") -> "VersionSpec":
        merged = list(self.clauses)
        merged.extend(c for c in other.clauses if c not in merged)
        return VersionSpec(tuple(merged))

    @property
    def exact_pin(self) -> Optional[Version]:
        """The version when the set is a single non-wildcard ``==`` clause."""
        if len(self.clauses) == 1:
            c = self.clauses[0]
            if c.operator == "==" and not c.wildcard:
                return c.version
        return None


def parse_clause(text: str) -> Clause:
    m = _CLAUSE_RE.match(text)
    if m is None:
        raise InvalidSpecifier(f"unknown operator in clause {text.strip()!r}")
    op, literal = m.group(1), m.group(2).replace(" ", "")
    if op == "===":
        raise InvalidSpecifier("arbitrary equality '===' is not supported")
    wildcard = literal.endswith(".*")
    if wildcard:
        if op not in ("==", "!="):
            raise InvalidSpecifier(f"wildcard not allowed with {op!r}: {text.strip()!r}")
        literal = literal[:-2]
    try:
        v = parse_version(literal)
    except InvalidVersion:
        raise InvalidSpecifier(f"malformed version in clause {text.strip()!r}") from None
    if wildcard and (v.pre or v.post is not None or v.dev is not None or v.local):
        raise InvalidSpecifier(f"wildcard must follow a release segment: {text.strip()!r}")
    if v.local is not None and op not in ("==", "!="):
        raise InvalidSpecifier(
            f"local version label not allowed with {op!r}: {text.strip()!r}", code="A-LOCAL-IN-SPEC"
        )
    if op == "~=" and len(v.release) < 2:
        raise InvalidSpecifier(f"'~=' needs at least two release segments: {text.strip()!r}")
    return Clause(op, literal, wildcard)


def parse_specifier_set(text: str) -> VersionSpec:
    text = text.strip()
    if not text:
        return VersionSpec()
    return VersionSpec(tuple(parse_clause(part) for part in text.split(",")))


def _prefix_match(candidate: Version, prefix: Version) -> bool:
    if candidate.epoch != prefix.epoch:
        return False
    n = len(prefix.release)
    padded = tuple(candidate.release) + (0,) * max(0, n - len(candidate.release))
    return padded[:n] == tuple(prefix.release)


def _clause_matches(clause: Clause, v: Version) -> bool:
    op = clause.operator
    spec_v = clause.version
    if op in ("==", "!="):
        if clause.wildcard:
            hit = _prefix_match(v.public, spec_v)
        elif spec_v.local is None:
            hit = v.public == spec_v
        else:
            hit = v == spec_v
        return hit if op == "==" else not hit
    if op == "~=":
        prefix = Version(spec_v.epoch, spec_v.release[:-1])
        return v.public >= spec_v and _prefix_match(v.public, prefix)
    if op == ">=":
        return v.public >= spec_v
    if op == "<=":
        return v.public <= spec_v
    if op == "<":
        if not v < spec_v:
            return False
        # <V never admits a pre-release of V itself (V.dev0 up to V) unless V is one
        earliest = Version(spec_v.epoch, spec_v.release, spec_v.pre, spec_v.post, 0)
        if not spec_v.is_prerelease and v.is_prerelease and v >= earliest:
            return False
        return True
    # op == ">": never a post-release or local version of V itself
    if not v > spec_v:
        return False
    post_base = Version(v.epoch, v.release, v.pre)
    if not spec_v.is_postrelease and v.is_postrelease and post_base == spec_v:
        return False
    if v.local is not None and v.public == spec_v:
        return False
    return True


def allows_prereleases(spec: VersionSpec) -> bool:
    """True when some clause literal is itself a pre-release."""
    for c in spec.clauses:
        if c.operator == "!=":
            continue
        if c.version.is_prerelease:
            return True
    return False


def matches(spec: VersionSpec, v: Version, prereleases: Optional[bool] = None) -> bool:
    """Conjunction of all clauses.

    With ``prereleases=None`` a pre-release candidate is rejected by a
    non-empty set unless one of its clause literals is a pre-release.
    """
    if not spec.clauses:
        return True
    if prereleases is None:
        prereleases = allows_prereleases(spec)
    if v.is_prerelease and not prereleases:
        return False
    return all(_clause_matches(c, v) for c in spec.clauses)


def max_satisfying(
    candidates: Iterable[Version], spec: VersionSpec, allow_prerelease: bool = False
) -> Optional[Version]:
    candidates = list(candidates)
    if allow_prerelease:
        pool = [v for v in candidates if matches(spec, v, prereleases=True)]
    else:
        pool = [v for v in candidates if matches(spec, v) and not v.is_prerelease]
        if not pool:
            pool = [v for v in candidates if matches(spec, v, prereleases=True)]
    return max(pool) if pool else None


def guess_pin(spec: VersionSpec) -> Optional[Version]:
    """Turn a constraint into a single version the way static guessers do.

    Clauses whose operator has no ``=`` (``<`` and ``>``) are discarded, the
    rest are read as ``==``, and a trailing ``.*`` becomes ``.0``. When the
    surviving clauses name different versions there is no guess.
    """
    guesses: List[Version] = []
    for c in spec.clauses:
        if "=" not in c.operator:
            continue
        text = c.literal + (".0" if c.wildcard else "")
        guesses.append(parse_version(text))
    if not guesses:
        return None
    first = guesses[0]
    if any(g != first for g in guesses[1:]):
        return None
    return first
