"""Package index client with an on-disk, replayable response cache.

Two endpoints of the JSON API are consumed::

    <index>/pypi/<name>/json            releases, upload times, yanked flags
    <index>/pypi/<name>/<version>/json  requires_dist of one release

Every response (including 404s) is stored under
``<cache>/<index-key>/<name>.json`` / ``<name>@<version>.json`` together with
a small header recording where and when it was fetched. A warmed cache can
be replayed with ``offline=True``, which makes resolution reproducible.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from .model import DEFAULT_INDEX, PackageName, normalize_name
from .versions import InvalidSpecifier, InvalidVersion, Version, VersionSpec, parse_specifier_set, parse_version

INDEX_URL_ENV = "PYSBOM_INDEX_URL"
CACHE_DIR_ENV = "PYSBOM_CACHE_DIR"

# (status, body) for a GET of the given URL
Transport = Callable[[str], Tuple[int, bytes]]


class IndexFetchError(Exception):
    pass


class NotFound(IndexFetchError):
    pass


class OfflineMiss(IndexFetchError):
    pass


class NetworkError(IndexFetchError):
    pass


class MalformedResponse(IndexFetchError):
    pass


@dataclass(frozen=True)
class Release:
    version: Version
    uploaded: Optional[datetime]
    yanked: bool = False
    requires_python: Optional[VersionSpec] = None


@dataclass
class ReleaseIndex:
    name: PackageName
    releases: List[Release] = field(default_factory=list)
    requires_dist: Dict[Version, Tuple[str, ...]] = field(default_factory=dict)
    fetched_at: Optional[datetime] = None
    index_url: str = DEFAULT_INDEX

    def __post_init__(self) -> None:
        self.releases.sort(key=lambda r: r.version)

    @property
    def requires_python(self) -> Dict[Version, Optional[VersionSpec]]:
        return {r.version: r.requires_python for r in self.releases}

    def release(self, version: Version) -> Optional[Release]:
        for r in self.releases:
            if r.version == version:
                return r
        return None


def parse_timestamp(text: str) -> datetime:
    """RFC 3339 / ISO 8601 timestamp -> aware UTC datetime."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        value = datetime.fromisoformat(text)
    except ValueError:
        raise ValueError(f"not an RFC 3339 timestamp: {text!r}") from None
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


def format_timestamp(value: datetime) -> str:
    return value.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def urllib_transport(url: str, timeout: float = 30.0) -> Tuple[int, bytes]:
    request = urllib.request.Request(url, headers={"Accept": "application/json", "User-Agent": "pysbom"})
    try:
        with urllib.request.urlopen(request, timeout=timeout) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as exc:
        return exc.code, b""
    except (urllib.error.URLError, OSError) as exc:
        raise NetworkError(f"GET {url}: {getattr(exc, 'reason', exc)}") from None


def _index_key(index_url: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", index_url.rstrip("/").split("://", 1)[-1]).strip("_")


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_DIR_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "pysbom"


def default_index_url() -> str:
    return os.environ.get(INDEX_URL_ENV) or DEFAULT_INDEX


def _release_from_files(version: Version, files: list) -> Release:
    times = []
    for f in files:
        stamp = f.get("upload_time_iso_8601") or f.get("upload_time")
        if stamp:
            times.append(parse_timestamp(stamp))
    yanked = bool(files) and all(f.get("yanked", False) for f in files)
    rp = None
    for f in files:
        if f.get("requires_python"):
            try:
                rp = parse_specifier_set(f["requires_python"])
            except InvalidSpecifier:
                rp = None
            break
    return Release(version, min(times) if times else None, yanked, rp)


def release_index_from_json(name: PackageName, body: dict, fetched_at=None, index_url=DEFAULT_INDEX) -> ReleaseIndex:
    try:
        releases_raw = body["releases"]
        info = body.get("info") or {}
    except (KeyError, TypeError):
        raise MalformedResponse(f"{name}: project response lacks 'releases'") from None
    releases = []
    for raw_version, files in releases_raw.items():
        try:
            version = parse_version(raw_version)
        except InvalidVersion:
            # legacy non-PEP 440 versions are unselectable
            continue
        releases.append(_release_from_files(version, files or []))
    idx = ReleaseIndex(name, releases, fetched_at=fetched_at, index_url=index_url)
    latest = info.get("version")
    if latest is not None:
        try:
            idx.requires_dist[parse_version(latest)] = tuple(info.get("requires_dist") or ())
        except InvalidVersion:
            pass
    return idx


class IndexClient:
    """Fetches project and release metadata, caching every response on disk.

    Fetches for different packages may run concurrently; writes to one cache
    entry are serialized by a per-key lock.
    """

    def __init__(
        self,
        index_url: Optional[str] = None,
        cache_dir=None,
        *,
        offline: bool = False,
        transport: Optional[Transport] = None,
        refresh: bool = False,
        max_workers: int = 8,
    ):
        self.index_url = (index_url or default_index_url()).rstrip("/")
        self.cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
        self.offline = offline
        self.transport = transport or urllib_transport
        self.refresh = refresh
        self.max_workers = max_workers
        self._locks: Dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._memo: Dict[str, Tuple[dict, Optional[dict]]] = {}

    # -- cache ---------------------------------------------------------------

    def _lock(self, key: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(key, threading.Lock())

    def _path(self, key: str) -> Path:
        return self.cache_dir / _index_key(self.index_url) / f"{key}.json"

    def _read_cache(self, key: str):
        path = self._path(key)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return data["header"], data.get("body")
        except FileNotFoundError:
            return None
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise MalformedResponse(f"corrupt cache entry {path}: {exc}") from None

    def store(self, key: str, url: str, status: int, body: Optional[dict], fetched_at: datetime) -> None:
        """Write one cache entry atomically."""
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = {
            "index_url": self.index_url,
            "url": url,
            "key": key,
            "status": status,
            "fetched_at": format_timestamp(fetched_at),
        }
        payload = json.dumps({"header": header, "body": body}, indent=1, sort_keys=True) + "\n"
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, path)

    def _get(self, key: str, url: str) -> Tuple[dict, Optional[dict]]:
        with self._lock(key):
            if key in self._memo:
                return self._memo[key]
            cached = None if self.refresh else self._read_cache(key)
            if cached is None:
                if self.offline:
                    raise OfflineMiss(f"offline and no cached response for {url}")
                status, raw = self.transport(url)
                body = None
                if status == 200:
                    try:
                        body = json.loads(raw)
                    except ValueError:
                        raise MalformedResponse(f"GET {url}: response is not JSON") from None
                elif status != 404:
                    raise NetworkError(f"GET {url}: HTTP {status}")
                self.store(key, url, status, body, datetime.now(timezone.utc))
                cached = self._read_cache(key)
            self._memo[key] = cached
            return cached

    # -- API -----------------------------------------------------------------

    def fetch_release_index(self, name) -> ReleaseIndex:
        name = name if isinstance(name, PackageName) else normalize_name(name)
        url = f"{self.index_url}/pypi/{name.normalized}/json"
        header, body = self._get(name.normalized, url)
        if header.get("status") == 404 or body is None:
            raise NotFound(f"{name.normalized} is not known to {self.index_url}")
        fetched = parse_timestamp(header["fetched_at"]) if header.get("fetched_at") else None
        return release_index_from_json(name, body, fetched, self.index_url)

    def fetch_requires_dist(self, idx: ReleaseIndex, version: Version) -> Tuple[str, ...]:
        """requires_dist of one release; memoized on ``idx``."""
        if version in idx.requires_dist:
            return idx.requires_dist[version]
        key = f"{idx.name.normalized}@{version}"
        url = f"{self.index_url}/pypi/{idx.name.normalized}/{version}/json"
        header, body = self._get(key, url)
        if header.get("status") == 404 or body is None:
            raise NotFound(f"{idx.name.normalized} {version} is not known to {self.index_url}")
        try:
            deps = tuple((body.get("info") or {}).get("requires_dist") or ())
        except AttributeError:
            raise MalformedResponse(f"{key}: release response is not an object") from None
        idx.requires_dist[version] = deps
        return deps

    def prefetch(self, names: Iterable) -> Dict[str, object]:
        """Fetch several project indexes concurrently.

        Returns name -> ReleaseIndex or the exception raised for it.
        """
        unique = sorted({n.normalized if isinstance(n, PackageName) else normalize_name(n).normalized for n in names})
        results: Dict[str, object] = {}

        def one(n):
            try:
                return n, self.fetch_release_index(n)
            except IndexFetchError as exc:
                return n, exc

        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            for n, value in pool.map(one, unique):
                results[n] = value
        return results
