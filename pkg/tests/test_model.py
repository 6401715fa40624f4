import pytest

from pysbom.model import (
    DEVELOPMENT,
    REQUIRED,
    DependencyGroup,
    InvalidName,
    LockedPackage,
    Resolution,
    ResolutionKind,
    ResolvedComponent,
    SourceKind,
    SourceRef,
    normalize_name,
    widest_group,
)
from pysbom.versions import parse_version


@pytest.mark.parametrize("raw", ["My_Pkg.name", "my-pkg-name", "MY__PKG--NAME", "my.pkg_name"])
def test_names_normalize_together(raw):
    assert normalize_name(raw).normalized == "my-pkg-name"


@pytest.mark.parametrize("raw", ["", "-lead", "trail_", "sp ace", "a/b"])
def test_invalid_names(raw):
    with pytest.raises(InvalidName):
        normalize_name(raw)


def test_widest_group():
    opt = DependencyGroup.optional("plot")
    assert widest_group(DEVELOPMENT, opt) == opt
    assert widest_group(opt, REQUIRED, DEVELOPMENT) == REQUIRED
    assert str(opt) == "optional:plot"


def test_optional_group_needs_extra():
    with pytest.raises(ValueError):
        DependencyGroup(kind=DependencyGroup.optional("x").kind)


def test_registry_lock_entry_needs_version():
    with pytest.raises(ValueError):
        LockedPackage(normalize_name("a"), None)


def test_versionless_component_must_be_unknown():
    with pytest.raises(ValueError):
        ResolvedComponent(normalize_name("a"), None, resolution=Resolution(ResolutionKind.LOCKED))


def comp(name, version=None, **kw):
    v = parse_version(version) if version else None
    kw.setdefault("resolution", Resolution(ResolutionKind.PINNED) if v else Resolution(ResolutionKind.UNKNOWN))
    return ResolvedComponent(normalize_name(name), v, **kw)


def test_registry_purl():
    assert comp("Requests", "2.31.0").purl == "pkg:pypi/requests@2.31.0"
    assert comp("numpy").purl == "pkg:pypi/numpy"


def test_local_version_is_percent_encoded():
    assert comp("torch", "2.1.0+cu118").purl == "pkg:pypi/torch@2.1.0%2Bcu118"


def test_vcs_purl_qualifiers_sorted_and_encoded():
    src = SourceRef(SourceKind.VCS, "https://github.com/psf/black", "git", "abc123")
    purl = comp("black", source=src).purl
    assert purl == "pkg:pypi/black?ref=abc123&vcs_url=git%2Bhttps%3A%2F%2Fgithub.com%2Fpsf%2Fblack"


def test_alternate_index_is_recorded():
    c = comp("foo", "1.0", index_url="https://mirror.example/")
    assert c.purl == "pkg:pypi/foo@1.0?repository_url=https%3A%2F%2Fmirror.example"
    assert comp("foo", "1.0", index_url="https://pypi.org").purl == "pkg:pypi/foo@1.0"


def test_direct_url_purl():
    src = SourceRef(SourceKind.DIRECT_URL, "https://example.com/foo-1.0.tar.gz")
    assert comp("foo", source=src).purl == "pkg:pypi/foo?download_url=https%3A%2F%2Fexample.com%2Ffoo-1.0.tar.gz"
