"""Turn a :class:`ProjectModel` into one realized set of components.

Strategies are tried in the order the policy names them:

``lock``
    take the version recorded in a lockfile (resolution ``locked``)
``resolve``
    pick the newest release allowed by the declared constraint, the way an
    installer would, optionally as the index looked at ``as_of``
``guess``
    read a version straight out of the constraint (resolution ``guessed``,
    always flagged with a T6 warning)

An exact ``==`` pin needs no strategy and is recorded as ``pinned``.
Transitive dependencies come from lockfile edges when a lockfile exists and
from the index's ``requires_dist`` otherwise. The walk keeps the first
version selected per package; it is not a backtracking solver.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Set, Tuple

from . import diagnostics as dg
from .diagnostics import Diagnostic
from .index import IndexClient, IndexFetchError, ReleaseIndex
from .markers import MarkerEnv, current_python, evaluate_marker
from .model import (
    REGISTRY,
    DeclaredDependency,
    DependencyGroup,
    GroupKind,
    LockedPackage,
    PackageName,
    Reach,
    Resolution,
    ResolutionKind,
    ResolvedComponent,
    SourceRef,
    scope_for,
    widest_group,
)
from .requirements import RequirementSyntaxError, parse_requirement
from .versions import Version, VersionSpec, guess_pin, matches, max_satisfying, parse_version

# edges are (parent, child) by normalized name; a parent of None is the project itself
Edge = Tuple[Optional[str], str]


class Strategy(str, Enum):
    LOCK = "lock"
    RESOLVE = "resolve"
    GUESS = "guess"


DEFAULT_STRATEGY = (Strategy.LOCK, Strategy.RESOLVE)


@dataclass(frozen=True)
class ResolutionPolicy:
    strategy_order: Tuple[Strategy, ...] = DEFAULT_STRATEGY
    as_of: Optional[datetime] = None
    allow_prerelease: bool = False
    include_optional: bool = False
    include_dev: bool = False
    offline: bool = False
    python_version: str = field(default_factory=current_python)
    sys_platform: str = "linux"

    def __post_init__(self) -> None:
        order = tuple(Strategy(s) for s in self.strategy_order)
        if not order:
            raise ValueError("strategy order must not be empty")
        if len(set(order)) != len(order):
            raise ValueError("strategy order must not repeat a strategy")
        object.__setattr__(self, "strategy_order", order)
        if self.as_of is not None:
            if self.as_of.tzinfo is None:
                raise ValueError("as_of must be timezone-aware")
            object.__setattr__(self, "as_of", self.as_of.astimezone(timezone.utc))
        parse_version(self.python_version)

    def includes(self, group: DependencyGroup) -> bool:
        if group.kind is GroupKind.OPTIONAL:
            return self.include_optional
        if group.kind is GroupKind.DEVELOPMENT:
            return self.include_dev
        return True

    def env(self, extras: Iterable[str] = ()) -> MarkerEnv:
        return MarkerEnv(self.python_version, self.sys_platform, frozenset(extras))


class NoCandidate(LookupError):
    pass


class ResolveResult(NamedTuple):
    components: List[ResolvedComponent]
    edges: List[Edge]
    diagnostics: List[Diagnostic]


def _python_ok(release, python: Version) -> bool:
    return release.requires_python is None or matches(release.requires_python, python, prereleases=True)


def resolve_version(d: DeclaredDependency, idx: ReleaseIndex, policy: ResolutionPolicy) -> Tuple[Version, Resolution]:
    """Newest release of ``idx`` that an installer would pick for ``d``.

    Yanked releases, releases whose Requires-Python excludes the policy's
    interpreter and, when ``as_of`` is set, releases uploaded after it are
    not candidates. Raises :class:`NoCandidate` when nothing is left.
    """
    if not d.source.is_registry:
        raise ValueError(f"{d.name}: only registry dependencies are resolved against an index")
    python = parse_version(policy.env().lookup("python_full_version"))
    candidates = [
        r.version
        for r in idx.releases
        if not r.yanked
        and _python_ok(r, python)
        and (policy.as_of is None or (r.uploaded is not None and r.uploaded <= policy.as_of))
    ]
    chosen = max_satisfying(candidates, d.spec, policy.allow_prerelease)
    if chosen is None:
        when = f" as of {policy.as_of.isoformat()}" if policy.as_of else ""
        raise NoCandidate(f"no release of {d.name} satisfies {str(d.spec) or '*'}{when}")
    return chosen, Resolution(ResolutionKind.RESOLVED, policy.as_of or idx.fetched_at)


# -- direct declarations -------------------------------------------------------------


@dataclass
class _Direct:
    name: PackageName
    spec: VersionSpec
    source: SourceRef
    group: DependencyGroup
    extras: FrozenSet[str]
    marker: Optional[str]
    origin: object

    @property
    def declared(self) -> DeclaredDependency:
        return DeclaredDependency(self.name, self.spec, self.source, self.group, self.extras, self.marker, self.origin)


def merge_declarations(declared: Iterable[DeclaredDependency]) -> List[_Direct]:
    """One entry per normalized name: constraints conjoined, widest group kept.

    A non-registry source (VCS, URL, path) from any declaration wins over the
    registry. A marker is kept only if every declaration carries one.
    """
    merged: Dict[str, _Direct] = {}
    for d in declared:
        key = d.name.normalized
        prior = merged.get(key)
        if prior is None:
            merged[key] = _Direct(d.name, d.spec, d.source, d.group, d.extras, d.marker, d.origin)
            continue
        prior.spec = prior.spec & d.spec if d.spec != prior.spec else prior.spec
        if prior.source.is_registry and not d.source.is_registry:
            prior.source = d.source
        prior.group = widest_group(prior.group, d.group)
        prior.extras = prior.extras | d.extras
        if prior.marker is None or d.marker is None:
            prior.marker = None
        elif prior.marker != d.marker:
            prior.marker = f"({prior.marker}) or ({d.marker})"
    return [merged[k] for k in sorted(merged)]


# -- fetching --------------------------------------------------------------------------


class _Fetcher:
    """Caches per-name index lookups and turns fetch failures into diagnostics."""

    def __init__(self, client: Optional[IndexClient], diags: List[Diagnostic]):
        self.client = client
        self.diags = diags
        self.indexes: Dict[str, object] = {}

    def index(self, name: PackageName) -> Optional[ReleaseIndex]:
        if self.client is None:
            return None
        key = name.normalized
        if key not in self.indexes:
            try:
                self.indexes[key] = self.client.fetch_release_index(name)
            except IndexFetchError as exc:
                self.indexes[key] = exc
        value = self.indexes[key]
        return value if isinstance(value, ReleaseIndex) else None

    def failure(self, name: PackageName) -> Optional[str]:
        value = self.indexes.get(name.normalized)
        if isinstance(value, Exception):
            return str(value)
        if self.client is None:
            return "no package index configured"
        return None

    def prefetch(self, names: Iterable[PackageName]) -> None:
        if self.client is None:
            return
        todo = [n for n in names if n.normalized not in self.indexes]
        if todo:
            self.indexes.update(self.client.prefetch(todo))


def _select_version(
    d: DeclaredDependency,
    policy: ResolutionPolicy,
    fetcher: _Fetcher,
    diags: List[Diagnostic],
    strategies: Iterable[Strategy],
) -> Tuple[Optional[Version], Resolution, Optional[str]]:
    """Run the non-lock strategies for a registry dependency."""
    subject = d.name.normalized
    pin = d.spec.exact_pin
    if pin is not None:
        return pin, Resolution(ResolutionKind.PINNED), None
    for strategy in strategies:
        if strategy is Strategy.RESOLVE:
            idx = fetcher.index(d.name)
            if idx is None:
                continue
            try:
                version, resolution = resolve_version(d, idx, policy)
            except NoCandidate as exc:
                diags.append(dg.warning("A-UNRESOLVED", str(exc), subject, d.origin))
                continue
            if version.is_prerelease and not policy.allow_prerelease and not any(
                c.version.is_prerelease for c in d.spec.clauses if not c.wildcard
            ):
                diags.append(dg.info("A-PRERELEASE", f"pre-release {version} selected: no final release matches", subject))
            return version, resolution, idx.index_url
        if strategy is Strategy.GUESS:
            guess = guess_pin(d.spec)
            if guess is None:
                continue
            diags.append(dg.warning(
                "T6", f"version {guess} guessed from constraint {d.spec}; it may not match an installation",
                subject, d.origin,
            ))
            return guess, Resolution(ResolutionKind.GUESSED), None
    return None, Resolution(ResolutionKind.UNKNOWN), None


def _report_unknown(d: DeclaredDependency, fetcher: _Fetcher, diags: List[Diagnostic]) -> None:
    subject = d.name.normalized
    why = fetcher.failure(d.name)
    detail = f" ({why})" if why else ""
    if d.unversioned:
        diags.append(dg.warning(
            "T3", f"declared without a version and no version could be determined{detail}; listed without version",
            subject, d.origin,
        ))
    else:
        diags.append(dg.warning(
            "A-UNRESOLVED", f"no version could be determined for {str(d.spec) or '*'}{detail}", subject, d.origin,
        ))


# -- transitive expansion --------------------------------------------------------------


def expand_transitives(
    roots: List[ResolvedComponent],
    fetch: Optional[IndexClient],
    env: MarkerEnv,
    policy: ResolutionPolicy,
    *,
    root_extras: Optional[Dict[str, FrozenSet[str]]] = None,
    known: Optional[Dict[str, ResolvedComponent]] = None,
    diagnostics: Optional[List[Diagnostic]] = None,
) -> Tuple[List[ResolvedComponent], List[Edge]]:
    """Breadth-first closure over ``requires_dist``.

    ``root_extras`` lists the extras requested of each root. ``known`` holds
    components already fixed by other means (a lockfile); they are reused
    rather than resolved again. Returns every component reached, roots
    included, and the parent -> child edges.
    """
    diags = diagnostics if diagnostics is not None else []
    fetcher = fetch if isinstance(fetch, _Fetcher) else _Fetcher(fetch, diags)
    strategies = [s for s in policy.strategy_order if s is not Strategy.LOCK]
    selected: Dict[str, ResolvedComponent] = {}
    processed_extras: Dict[str, FrozenSet[str]] = {}
    edges: Set[Edge] = set()
    queue: deque = deque()
    for c in sorted(roots, key=lambda c: c.name.normalized):
        selected[c.name.normalized] = c
        queue.append((c.name.normalized, frozenset((root_extras or {}).get(c.name.normalized, ()))))
    known = known or {}

    while queue:
        key, extras = queue.popleft()
        done = processed_extras.get(key)
        if done is not None and extras <= done:
            continue
        processed_extras[key] = (done or frozenset()) | extras
        parent = selected[key]
        if parent.version is None or not parent.source.is_registry:
            if done is None:
                diags.append(dg.info(
                    "A-NO-METADATA",
                    "dependencies of a non-registry or version-less component are not expanded",
                    key,
                ))
            continue
        idx = fetcher.index(parent.name)
        requires: Tuple[str, ...] = ()
        if idx is not None:
            try:
                requires = fetcher.client.fetch_requires_dist(idx, parent.version)
            except IndexFetchError as exc:
                idx = None
                reason = str(exc)
        else:
            reason = fetcher.failure(parent.name) or "index unavailable"
        if idx is None:
            diags.append(dg.warning(
                "A-NO-METADATA", f"dependencies of {key} {parent.version} unknown: {reason}", key,
            ))
            continue
        req_env = env.with_extras(extras)
        for text in requires:
            try:
                req = parse_requirement(text)
            except RequirementSyntaxError as exc:
                diags.append(dg.warning("A-PARSE-ERROR", f"requires_dist of {key}: {exc}", key))
                continue
            if req.marker and not evaluate_marker(req.marker, req_env, diagnostics=diags, subject=key):
                continue
            child_key = req.name.normalized
            if child_key == key:
                # self-reference through an extra: its extras apply to this node
                if not req.extras <= processed_extras[key]:
                    queue.append((key, req.extras | processed_extras[key]))
                continue
            edges.add((key, child_key))
            child = selected.get(child_key)
            if child is None:
                child = known.get(child_key)
                if child is not None:
                    child = replace(child, reach=Reach.TRANSITIVE, group=parent.group, scope=parent.scope)
                else:
                    child = _resolve_child(req, parent, policy, fetcher, diags, strategies)
                selected[child_key] = child
            else:
                wider = widest_group(child.group, parent.group)
                if wider != child.group:
                    selected[child_key] = child = replace(child, group=wider, scope=scope_for(wider))
                if child.version is not None and req.spec and not matches(req.spec, child.version, prereleases=True):
                    diags.append(dg.warning(
                        "A-VERSION-CONFLICT",
                        f"{key} {parent.version} requires {child_key}{req.spec}, but {child.version} was already selected",
                        child_key,
                    ))
            queue.append((child_key, req.extras))

    return sorted(selected.values(), key=lambda c: c.name.normalized), sorted(edges, key=lambda e: (e[0] or "", e[1]))


def _resolve_child(req, parent, policy, fetcher, diags, strategies) -> ResolvedComponent:
    d = DeclaredDependency(req.name, req.spec, req.source, parent.group, req.extras)
    if not req.source.is_registry:
        diags.append(dg.warning(
            "A-UNRESOLVED", f"{parent.name} depends on a {req.source.kind.value} reference; version unknown",
            req.name.normalized,
        ))
        version, resolution, index_url = None, Resolution(ResolutionKind.UNKNOWN), None
    else:
        version, resolution, index_url = _select_version(d, policy, fetcher, diags, strategies)
        if version is None:
            _report_unknown(d, fetcher, diags)
    return ResolvedComponent(
        name=req.name,
        version=version,
        source=req.source,
        scope=parent.scope,
        reach=Reach.TRANSITIVE,
        resolution=resolution,
        group=parent.group,
        index_url=index_url,
    )


# -- whole project ---------------------------------------------------------------------


def _pick_locked(candidates: List[LockedPackage]) -> LockedPackage:
    with_version = [p for p in candidates if p.version is not None]
    if with_version:
        return max(with_version, key=lambda p: p.version)
    return candidates[0]


def resolve_project(model, policy: ResolutionPolicy, fetch: Optional[IndexClient] = None) -> ResolveResult:
    """Resolve every declared and locked dependency of ``model``.

    Nothing here is fatal: a dependency that cannot be pinned down becomes a
    component with ``unknown`` resolution plus a warning.
    """
    diags: List[Diagnostic] = []
    fetcher = _Fetcher(fetch, diags)
    project_extras = model.extras if policy.include_optional else frozenset()
    env = policy.env(project_extras)
    use_lock = Strategy.LOCK in policy.strategy_order and bool(model.locked)

    # a lockfile can widen a declaration's group: Pipenv installs whatever its
    # default section lists, even if pyproject calls it an extra
    lock_groups: Dict[str, DependencyGroup] = {}
    if use_lock:
        for p in model.locked:
            key = p.name.normalized
            lock_groups[key] = widest_group(lock_groups[key], p.group) if key in lock_groups else p.group

    # 1. direct declarations, filtered by group policy and markers
    directs = []
    excluded: Dict[str, List[str]] = {}
    for d in merge_declarations(model.declared):
        if d.name.normalized in lock_groups:
            d.group = widest_group(d.group, lock_groups[d.name.normalized])
        if not policy.includes(d.group):
            excluded.setdefault(d.group.kind.value, []).append(d.name.normalized)
            continue
        if d.marker and not evaluate_marker(d.marker, env, diagnostics=diags, subject=d.name.normalized):
            diags.append(dg.info("A-MARKER-EXCLUDED", f"marker {d.marker!r} is false for this environment", d.name.normalized, d.origin))
            continue
        directs.append(d)

    # 2. lockfile entries, filtered the same way
    locked: Dict[str, LockedPackage] = {}
    if use_lock:
        by_name: Dict[str, List[LockedPackage]] = {}
        for p in model.locked:
            by_name.setdefault(p.name.normalized, []).append(p)
        for key in sorted(by_name):
            usable = [
                p for p in by_name[key]
                if not p.marker or evaluate_marker(p.marker, env, diagnostics=diags, subject=key)
            ]
            if not usable:
                diags.append(dg.info("A-MARKER-EXCLUDED", "no lock entry applies to this environment", key))
                continue
            locked[key] = _pick_locked(usable)

    direct_keys = {d.name.normalized for d in directs}
    all_declared = {d.name.normalized for d in merge_declarations(model.declared)}
    lock_group_excluded: Dict[str, List[str]] = {}
    for key in sorted(locked):
        if key in all_declared:
            continue
        group = locked[key].group
        if not policy.includes(group):
            lock_group_excluded.setdefault(group.kind.value, []).append(key)
            del locked[key]

    components: Dict[str, ResolvedComponent] = {}
    root_extras: Dict[str, FrozenSet[str]] = {}
    to_expand: List[ResolvedComponent] = []
    fetcher.prefetch(
        d.name for d in directs
        if d.source.is_registry and d.name.normalized not in locked and not d.spec.exact_pin
        and Strategy.RESOLVE in policy.strategy_order
    )

    for d in directs:
        key = d.name.normalized
        decl = d.declared
        lock = locked.get(key)
        if lock is not None:
            group = d.group
            source = lock.source if not lock.source.is_registry else d.source if not d.source.is_registry else REGISTRY
            if lock.version is not None and d.spec and not matches(d.spec, lock.version, prereleases=True):
                diags.append(dg.warning(
                    "A-VERSION-CONFLICT", f"locked {lock.version} does not satisfy declared {d.spec}", key, lock.origin,
                ))
            components[key] = ResolvedComponent(
                name=d.name,
                version=lock.version,
                source=source,
                scope=scope_for(group),
                reach=Reach.DIRECT,
                resolution=Resolution(ResolutionKind.LOCKED) if lock.version is not None else Resolution(ResolutionKind.UNKNOWN),
                group=group,
                hashes=lock.hashes,
                origin=lock.origin,
            )
            continue
        if not d.source.is_registry:
            diags.append(dg.warning(
                "A-UNRESOLVED",
                f"{d.source.kind.value} dependency has no version in the metadata; "
                f"identified by {'ref ' + d.source.ref if d.source.ref else 'URL only'}",
                key, d.origin,
            ))
            version, resolution, index_url = None, Resolution(ResolutionKind.UNKNOWN), None
        else:
            strategies = [s for s in policy.strategy_order if s is not Strategy.LOCK]
            version, resolution, index_url = _select_version(decl, policy, fetcher, diags, strategies)
            if version is None:
                _report_unknown(decl, fetcher, diags)
        component = ResolvedComponent(
            name=d.name,
            version=version,
            source=d.source,
            scope=scope_for(d.group),
            reach=Reach.DIRECT,
            resolution=resolution,
            group=d.group,
            origin=d.origin,
            index_url=index_url,
        )
        components[key] = component
        to_expand.append(component)
        root_extras[key] = d.extras

    # 3. lock-only packages and lock edges
    edges: Set[Edge] = set()
    if use_lock:
        no_declarations = not direct_keys and not all_declared
        for key, lock in sorted(locked.items()):
            if key in components:
                continue
            if key in all_declared:
                # declared but excluded by group policy or marker
                continue
            components[key] = ResolvedComponent(
                name=lock.name,
                version=lock.version,
                source=lock.source,
                scope=scope_for(lock.group),
                reach=Reach.DIRECT if no_declarations else Reach.TRANSITIVE,
                resolution=Resolution(ResolutionKind.LOCKED) if lock.version is not None else Resolution(ResolutionKind.UNKNOWN),
                group=lock.group,
                hashes=lock.hashes,
                origin=lock.origin,
            )
        for key, lock in locked.items():
            if key not in components:
                continue
            for child in lock.edges:
                if child.normalized in components and child.normalized != key:
                    edges.add((key, child.normalized))
        if locked and all(not p.edges for p in model.locked):
            diags.append(dg.info(
                "A-NO-EDGES",
                "the lockfile records no dependency edges; lock-only packages are marked transitive without a parent",
            ))

    # 4. index-driven expansion for what the lock does not cover
    if to_expand and Strategy.RESOLVE in policy.strategy_order and fetch is not None:
        known = {k: c for k, c in components.items() if k not in {c.name.normalized for c in to_expand}}
        expanded, new_edges = expand_transitives(
            to_expand, fetcher, env, policy, root_extras=root_extras, known=known, diagnostics=diags,
        )
        for c in expanded:
            key = c.name.normalized
            prior = components.get(key)
            if prior is None:
                components[key] = c
            elif prior.reach is Reach.TRANSITIVE:
                wider = widest_group(prior.group, c.group)
                components[key] = replace(prior, group=wider, scope=scope_for(wider))
        edges.update(new_edges)
    elif to_expand and not use_lock:
        diags.append(dg.warning(
            "A-NO-METADATA", "transitive dependencies were not expanded: index resolution is disabled or unavailable",
        ))

    for key in sorted(direct_keys):
        if key in components:
            edges.add((None, key))
    if not direct_keys and use_lock:
        for key, c in components.items():
            if c.reach is Reach.DIRECT:
                edges.add((None, key))

    for kind, names in sorted(excluded.items()):
        diags.append(dg.info(
            "A-EXCLUDED", f"{len(names)} {kind} direct dependencies excluded by policy: {', '.join(sorted(names))}",
        ))
    for kind, names in sorted(lock_group_excluded.items()):
        diags.append(dg.info(
            "A-EXCLUDED", f"{len(names)} {kind} lock-only packages excluded by policy: {', '.join(sorted(names))}",
        ))

    ordered = [components[k] for k in sorted(components)]
    edge_list = sorted((e for e in edges if e[1] in components), key=lambda e: (e[0] or "", e[1]))
    return ResolveResult(ordered, edge_list, sorted(set(diags), key=lambda d: d.sort_key()))
