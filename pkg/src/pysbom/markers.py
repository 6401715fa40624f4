"""Environment marker parsing and evaluation (PEP 508 marker subset)."""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple, Union

from . import diagnostics as dg
from .versions import InvalidSpecifier, InvalidVersion, matches, parse_clause, parse_version, VersionSpec


class MarkerSyntaxError(ValueError):
    pass


_PLATFORM_SYSTEM = {"linux": "Linux", "win32": "Windows", "cygwin": "Windows", "darwin": "Darwin"}
_VERSION_VARS = {"python_version", "python_full_version", "implementation_version"}


def current_python() -> str:
    return f"{sys.version_info.major}.{sys.version_info.minor}"


@dataclass(frozen=True)
class MarkerEnv:
    python_version: str = field(default_factory=current_python)
    sys_platform: str = "linux"
    extras: FrozenSet[str] = frozenset()
    other: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        parse_version(self.python_version)
        object.__setattr__(self, "extras", frozenset(_norm_extra(e) for e in self.extras))
        if isinstance(self.other, dict):
            object.__setattr__(self, "other", tuple(sorted(self.other.items())))

    def with_extras(self, extras) -> "MarkerEnv":
        return MarkerEnv(self.python_version, self.sys_platform, frozenset(extras), self.other)

    def lookup(self, name: str) -> Optional[str]:
        other = dict(self.other)
        if name in other:
            return other[name]
        if name == "python_version":
            return self.python_version
        if name == "python_full_version":
            parts = self.python_version.split(".")
            return ".".join(parts + ["0"] * (3 - len(parts)))
        if name == "sys_platform":
            return self.sys_platform
        if name == "platform_system":
            return _PLATFORM_SYSTEM.get(self.sys_platform, self.sys_platform.capitalize())
        if name == "os_name":
            return "nt" if self.sys_platform in ("win32", "cygwin") else "posix"
        if name == "platform_python_implementation":
            return "CPython"
        if name == "implementation_name":
            return "cpython"
        return None


def _norm_extra(name: str) -> str:
    return re.sub(r"[-_.]+", "-", name).lower()


# -- parsing -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    \s*(?:
        (?P<lparen>\() |
        (?P<rparen>\)) |
        (?P<string>'[^']*'|"[^"]*") |
        (?P<op>===|==|!=|<=|>=|~=|<|>|not\s+in\b|in\b) |
        (?P<bool>and\b|or\b) |
        (?P<var>[A-Za-z_][A-Za-z0-9_.]*)
    )
    """,
    re.VERBOSE,
)

Atom = Tuple[str, str]  # ("var", name) or ("str", value)
Node = Union[Tuple[str, "Node", "Node"], Tuple[str, Atom, str, Atom]]


def _tokenize(text: str) -> List[Tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise MarkerSyntaxError(f"unexpected text at {pos}: {text[pos:]!r}")
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "string":
            value = value[1:-1]
        elif kind == "op":
            value = re.sub(r"\s+", " ", value)
        tokens.append((kind, value))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, kind=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind):
            raise MarkerSyntaxError(f"expected {kind or 'token'}, got {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self) -> Node:
        node = self.parse_or()
        if self.i != len(self.tokens):
            raise MarkerSyntaxError(f"trailing tokens from {self.peek()[1]!r}")
        return node

    def parse_or(self) -> Node:
        node = self.parse_and()
        while self.peek() == ("bool", "or"):
            self.take()
            node = ("or", node, self.parse_and())
        return node

    def parse_and(self) -> Node:
        node = self.parse_expr()
        while self.peek() == ("bool", "and"):
            self.take()
            node = ("and", node, self.parse_expr())
        return node

    def parse_expr(self) -> Node:
        if self.peek()[0] == "lparen":
            self.take()
            node = self.parse_or()
            self.take("rparen")
            return node
        lhs = self.parse_atom()
        op = self.take("op")[1]
        rhs = self.parse_atom()
        if lhs[0] == rhs[0] == "str":
            raise MarkerSyntaxError("comparison needs at least one marker variable")
        return ("cmp", lhs, op, rhs)

    def parse_atom(self) -> Atom:
        kind, value = self.take()
        if kind == "var":
            return ("var", value)
        if kind == "string":
            return ("str", value)
        raise MarkerSyntaxError(f"expected variable or string, got {value!r}")


def parse_marker(text: str) -> Node:
    return _Parser(text).parse()


# -- evaluation ----------------------------------------------------------------


def _compare_values(lhs: str, op: str, rhs: str, version_like: bool) -> bool:
    if op == "in":
        return lhs in rhs
    if op == "not in":
        return lhs not in rhs
    if op == "===":
        return lhs == rhs
    if version_like:
        try:
            clause = parse_clause(f"{op}{rhs}")
            return matches(VersionSpec((clause,)), parse_version(lhs), prereleases=True)
        except (InvalidSpecifier, InvalidVersion):
            pass
    if op == "==":
        return lhs == rhs
    if op == "!=":
        return lhs != rhs
    if op == "~=":
        return False
    return {"<": lhs < rhs, "<=": lhs <= rhs, ">": lhs > rhs, ">=": lhs >= rhs}[op]


class _Evaluator:
    """Three-valued evaluation: a comparison on an unset variable is ``None``.

    ``None`` only decides the result when the known parts leave it open, so
    ``implementation_name == "x" and extra == "doc"`` is plainly false when
    the ``doc`` extra is not requested.
    """

    def __init__(self, env: MarkerEnv):
        self.env = env
        self.unknown_vars: List[str] = []

    def eval(self, node: Node) -> Optional[bool]:
        if node[0] in ("or", "and"):
            left, right = self.eval(node[1]), self.eval(node[2])
            if node[0] == "or":
                if left is True or right is True:
                    return True
                return None if None in (left, right) else False
            if left is False or right is False:
                return False
            return None if None in (left, right) else True
        _, lhs, op, rhs = node
        if "extra" in (lhs[1] if lhs[0] == "var" else None, rhs[1] if rhs[0] == "var" else None):
            return self.eval_extra(lhs, op, rhs)
        values = []
        version_like = False
        for kind, value in (lhs, rhs):
            if kind == "str":
                values.append(value)
                continue
            version_like = version_like or value in _VERSION_VARS
            resolved = self.env.lookup(value)
            if resolved is None:
                self.unknown_vars.append(value)
                return None
            values.append(resolved)
        return _compare_values(values[0], op, values[1], version_like)

    def eval_extra(self, lhs: Atom, op: str, rhs: Atom) -> bool:
        literal = rhs[1] if lhs[0] == "var" else lhs[1]
        wanted = _norm_extra(literal)
        if op == "==":
            return wanted in self.env.extras
        if op == "!=":
            return wanted not in self.env.extras
        return any(_compare_values(e, op, wanted, False) for e in self.env.extras)


def evaluate_marker(
    marker: str,
    env: MarkerEnv,
    *,
    unknown: bool = True,
    diagnostics: Optional[list] = None,
    subject: Optional[str] = None,
) -> bool:
    """Evaluate ``marker`` against ``env``.

    When the result hinges on a variable with no value in ``env``, the
    marker evaluates to ``unknown`` (inclusion by default). A marker that does not parse is
    treated as true. Both cases append a warning to ``diagnostics``.
    """
    try:
        tree = parse_marker(marker)
    except MarkerSyntaxError as exc:
        if diagnostics is not None:
            diagnostics.append(
                dg.warning("A-MARKER-SYNTAX", f"cannot parse marker {marker!r}: {exc}; included", subject)
            )
        return True
    ev = _Evaluator(env)
    result = ev.eval(tree)
    if result is not None:
        return result
    result = unknown
    if diagnostics is not None:
        names = ", ".join(sorted(set(ev.unknown_vars)))
        diagnostics.append(
            dg.warning(
                "A-MARKER-UNKNOWN",
                f"marker {marker!r} uses unset variable(s) {names}; assumed {str(unknown).lower()}",
                subject,
            )
        )
    return result
