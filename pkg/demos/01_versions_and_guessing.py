# Versions, constraints, and what "guessing" a version costs.
# Run: python demos/01_versions_and_guessing.py

from pysbom.versions import guess_pin, matches, max_satisfying, parse_specifier_set, parse_version

# versions normalize and order the way installers order them
v = parse_version("1.0-Alpha.1")
print(v, v.is_prerelease)                     # 1.0a1 True
print(sorted(parse_version(s) for s in ["1.0", "1.0rc1", "1.0.post1", "1.0.dev0"]))

# a constraint is a conjunction of clauses
spec = parse_specifier_set(">=3.5,<4.0")
print([str(c) for c in spec.clauses])
print(matches(spec, parse_version("3.8.2")), matches(spec, parse_version("4.0")))

# ~= and wildcards
print(matches(parse_specifier_set("~=2.2"), parse_version("2.9")))   # True
print(matches(parse_specifier_set("==1.1.*"), parse_version("1.10")))  # False

# resolving picks the newest release an installer would accept
releases = [parse_version(s) for s in ["3.4.0", "3.5.3", "3.8.4", "3.9.0rc1", "4.0.0"]]
print("resolved:", max_satisfying(releases, spec))             # 3.8.4

# guessing reads a version out of the constraint instead
print("guessed: ", guess_pin(spec))                            # 3.5, never installed by pip
print(guess_pin(parse_specifier_set("==1.1.*")))               # 1.1.0
print(guess_pin(parse_specifier_set(">1.0,<2.0")))             # None: nothing to read
