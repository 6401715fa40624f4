import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from packaging.version import Version as RefVersion

from oracles import oracle_matches

from pysbom.versions import (
    InvalidSpecifier,
    InvalidVersion,
    guess_pin,
    matches,
    max_satisfying,
    parse_specifier_set,
    parse_version,
)

segments = st.lists(st.integers(0, 12), min_size=1, max_size=4).map(lambda xs: ".".join(map(str, xs)))
suffixes = st.sampled_from(["", "a1", "b0", "rc2", ".post1", ".dev3", "a1.dev0", ".post2.dev1", "+local.7"])
versions = st.builds(lambda r, s, e: (f"{e}!" if e else "") + r + s, segments, suffixes, st.sampled_from([0, 0, 0, 1]))


@given(versions, versions)
@settings(max_examples=400)
def test_ordering_agrees_with_packaging(a, b):
    ours = (parse_version(a) > parse_version(b)) - (parse_version(a) < parse_version(b))
    ref = (RefVersion(a) > RefVersion(b)) - (RefVersion(a) < RefVersion(b))
    assert ours == ref


@given(versions)
def test_str_is_canonical(text):
    assert str(parse_version(text)) == str(RefVersion(text))


@pytest.mark.parametrize(
    "raw, canonical",
    [("1.0", "1.0"), ("v1.0", "1.0"), ("1.0-alpha.1", "1.0a1"), ("1.0c1", "1.0rc1"), ("1.0-1", "1.0.post1"),
     ("1.0.DEV", "1.0.dev0"), ("1!2.0", "1!2.0"), ("1.0+Ubuntu-1", "1.0+ubuntu.1")],
)
def test_normalization(raw, canonical):
    assert str(parse_version(raw)) == canonical


def test_trailing_zeros_equal():
    assert parse_version("1.0") == parse_version("1.0.0")
    assert hash(parse_version("1.0")) == hash(parse_version("1.0.0"))


@pytest.mark.parametrize("bad", ["", "one", "1..0", "1.0-beta-beta", "1.0+", "1.0+a..b"])
def test_invalid_versions(bad):
    with pytest.raises(InvalidVersion):
        parse_version(bad)


@pytest.mark.parametrize(
    "bad", ["=>1.0", "~=1", ">=1.0.*", "<1.0+local", "===1.0", "==1.0a1.*", ">= nope"]
)
def test_invalid_specifiers(bad):
    with pytest.raises(InvalidSpecifier):
        parse_specifier_set(bad)


def test_local_label_in_range_has_code():
    with pytest.raises(InvalidSpecifier) as info:
        parse_specifier_set(">=1.0+abc")
    assert info.value.code == "A-LOCAL-IN-SPEC"


clause_ops = st.sampled_from(["==", "!=", "<=", ">=", "<", ">", "~=", "==*", "!=*"])
plain = st.builds(lambda r, s: r + s, segments, st.sampled_from(["", "a1", "rc1", ".post1", ".dev0"]))


@st.composite
def clauses(draw):
    op = draw(clause_ops)
    if op in ("==*", "!=*"):
        return f"{op[:2]}{draw(segments)}.*"
    if op == "~=":
        return f"~={draw(segments.filter(lambda s: '.' in s))}"
    return f"{op}{draw(plain)}"


@given(st.lists(clauses(), min_size=1, max_size=3).map(",".join), versions)
@settings(max_examples=1500)
def test_matches_agrees_with_clause_expansion_oracle(spec, version):
    assert matches(parse_specifier_set(spec), parse_version(version), prereleases=True) == oracle_matches(spec, version)


@pytest.mark.parametrize(
    "spec, version, expected",
    [
        ("~=2.2", "2.9", True),
        ("~=2.2", "3.0", False),
        ("~=1.4.5", "1.4.9", True),
        ("~=1.4.5", "1.5.0", False),
        ("==1.1.*", "1.1.7", True),
        ("==1.1.*", "1.10", False),
        ("!=1.1.*", "1.2", True),
        ("<2.0", "2.0rc1", False),
        ("<2.0rc2", "2.0rc1", True),
        (">1.0", "1.0.post1", False),
        (">1.0.post1", "1.0.post2", True),
        (">1.0", "1.0+local", False),
        ("==1.0", "1.0+local", True),
        ("==1.0+local", "1.0", False),
        ("", "0.0.1", True),
    ],
)
def test_matches_table(spec, version, expected):
    assert matches(parse_specifier_set(spec), parse_version(version), prereleases=True) is expected


def test_prereleases_excluded_by_default():
    spec = parse_specifier_set(">=1.0")
    assert not matches(spec, parse_version("2.0b1"))
    assert matches(parse_specifier_set(">=2.0b1"), parse_version("2.0b2"))


def test_max_satisfying_prefers_final():
    pool = [parse_version(v) for v in ["1.0", "1.1", "2.0rc1"]]
    assert str(max_satisfying(pool, parse_specifier_set(">=1.0"))) == "1.1"
    assert str(max_satisfying(pool, parse_specifier_set(">=1.0"), allow_prerelease=True)) == "2.0rc1"
    # only pre-releases satisfy: fall back to them
    assert str(max_satisfying(pool, parse_specifier_set(">1.5"))) == "2.0rc1"
    assert max_satisfying(pool, parse_specifier_set(">3")) is None


def test_exact_pin():
    assert str(parse_specifier_set("==1.2").exact_pin) == "1.2"
    assert parse_specifier_set("==1.2.*").exact_pin is None
    assert parse_specifier_set(">=1.2").exact_pin is None


def test_guess_conflicting_clauses_has_no_guess():
    assert guess_pin(parse_specifier_set(">=1.0,<=2.0")) is None
    assert str(guess_pin(parse_specifier_set(">=1.0,!=1.0"))) == "1.0"
    assert guess_pin(parse_specifier_set("")) is None
