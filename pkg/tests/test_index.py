import json
import threading

import pytest

from fakeindex import FakeIndex

from pysbom.index import IndexClient, MalformedResponse, NetworkError, NotFound, OfflineMiss, parse_timestamp
from pysbom.versions import parse_version


@pytest.fixture
def index():
    return (
        FakeIndex()
        .add("six", "1.15.0", uploaded="2020-05-21T00:00:00Z")
        .add("six", "1.16.0", uploaded="2021-05-05T00:00:00Z", requires_python=">=2.7")
        .add("six", "1.17.0a1", uploaded="2022-01-01T00:00:00Z", yanked=True)
    )


def test_fetch_and_cache(tmp_path, index):
    client = IndexClient("https://pypi.org", tmp_path, transport=index)
    idx = client.fetch_release_index("Six")
    assert [str(r.version) for r in idx.releases] == ["1.15.0", "1.16.0", "1.17.0a1"]
    assert idx.release(parse_version("1.17.0a1")).yanked
    assert str(idx.requires_python[parse_version("1.16.0")]) == ">=2.7"
    assert idx.release(parse_version("1.15.0")).uploaded == parse_timestamp("2020-05-21T00:00:00Z")
    entry = json.loads((tmp_path / "pypi_org" / "six.json").read_text())
    assert entry["header"]["url"] == "https://pypi.org/pypi/six/json"
    assert entry["header"]["status"] == 200

    # replay offline from the cache, no network
    offline = IndexClient("https://pypi.org", tmp_path, offline=True, transport=lambda url: pytest.fail(url))
    again = offline.fetch_release_index("six")
    assert again.releases == idx.releases
    assert again.fetched_at == idx.fetched_at


def test_requires_dist_per_version(tmp_path):
    index = FakeIndex().add("a", "1.0", ["b>=1"]).add("a", "2.0", ["c"])
    client = IndexClient("https://pypi.org", tmp_path, transport=index)
    idx = client.fetch_release_index("a")
    assert client.fetch_requires_dist(idx, parse_version("2.0")) == ("c",)
    assert client.fetch_requires_dist(idx, parse_version("1.0")) == ("b>=1",)
    calls = len(index.calls)
    client.fetch_requires_dist(idx, parse_version("1.0"))
    assert len(index.calls) == calls


def test_offline_miss(tmp_path):
    client = IndexClient("https://pypi.org", tmp_path, offline=True)
    with pytest.raises(OfflineMiss):
        client.fetch_release_index("six")


def test_not_found_is_cached(tmp_path, index):
    client = IndexClient("https://pypi.org", tmp_path, transport=index)
    with pytest.raises(NotFound):
        client.fetch_release_index("nope")
    offline = IndexClient("https://pypi.org", tmp_path, offline=True)
    with pytest.raises(NotFound):
        offline.fetch_release_index("nope")


def test_server_error(tmp_path):
    client = IndexClient("https://pypi.org", tmp_path, transport=lambda url: (503, b""))
    with pytest.raises(NetworkError):
        client.fetch_release_index("six")


def test_malformed_body(tmp_path):
    client = IndexClient("https://pypi.org", tmp_path, transport=lambda url: (200, b"<html>"))
    with pytest.raises(MalformedResponse):
        client.fetch_release_index("six")
    client = IndexClient("https://pypi.org", tmp_path / "b", transport=lambda url: (200, b'{"info": {}}'))
    with pytest.raises(MalformedResponse):
        client.fetch_release_index("six")


def test_caches_are_per_index(tmp_path, index):
    IndexClient("https://pypi.org", tmp_path, transport=index).fetch_release_index("six")
    other = IndexClient("https://mirror.example/root", tmp_path, offline=True)
    with pytest.raises(OfflineMiss):
        other.fetch_release_index("six")


def test_prefetch_concurrent_single_fetch(tmp_path, index):
    lock = threading.Lock()
    seen = []

    def transport(url):
        with lock:
            seen.append(url)
        return index(url)

    client = IndexClient("https://pypi.org", tmp_path, transport=transport, max_workers=4)
    results = client.prefetch(["six", "Six", "SIX", "missing"])
    assert set(results) == {"six", "missing"}
    assert isinstance(results["missing"], NotFound)
    assert seen.count("https://pypi.org/pypi/six/json") == 1
