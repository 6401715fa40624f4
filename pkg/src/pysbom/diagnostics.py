"""Diagnostic codes and the Diagnostic value type.

Every warning the generator can raise is keyed to a fixed code. ``T`` codes
name defects that SBOM generators commonly exhibit, ``E`` codes name hazards
that come from the Python packaging ecosystem itself, and ``A-`` codes are
specific to this tool. When the generator *avoids* a ``T`` defect it records
an info-level note under the same code, so a report shows which hazards were
checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple


class Severity(str, Enum):
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"

    @property
    def rank(self) -> int:
        return _SEVERITY_RANK[self]


_SEVERITY_RANK = {Severity.INFO: 0, Severity.WARNING: 1, Severity.ERROR: 2}


TAXONOMY = {
    # tool-side defects
    "T1": "SBOM generation tool does not consider pyproject.toml file",
    "T2": "SBOM generation tool does not consider lockfile",
    "T3": "SBOM generation tool ignores dependencies without pinned version",
    "T4": "SBOM generation tool fails in parsing of the optional dependency",
    "T5": "SBOM generation tool does not properly parse the URL of the packages",
    "T6": "SBOM generation tool guesses the dependency's version",
    "T7": "SBOM generation tool does not report the origin of the packages",
    # ecosystem hazards
    "E1": "Ecosystem has two build interfaces, setup.py and pyproject.toml",
    "E2": "The use of a lockfile is not mandatory",
    "E3": "The ecosystem does not provide a standard file name for the requirements.txt file",
    "E4": "Metadata files contain only direct dependencies",
    "E5": "Package manager does not create a lockfile",
    "E6": "Lack of a univocal standard for declaring optional dependencies",
    "E7": "Package managers do not explicitly declare version of the package",
    "E8": "The format for the lockfile is not standardized",
    "E9": "Version can be omitted in metadata files",
    # artifact-specific
    "A-PARSE-ERROR": "A metadata file could not be parsed; its entries are missing",
    "A-UNRESOLVED": "A version could not be determined for a component",
    "A-VERSION-CONFLICT": "A transitive requirement is not satisfied by the version already selected",
    "A-LOCAL-IN-SPEC": "Local version label used with an operator other than == or !=",
    "A-PRERELEASE": "A pre-release was selected because no final release matched",
    "A-MARKER-UNKNOWN": "Environment marker uses a variable with no value; included conservatively",
    "A-MARKER-SYNTAX": "Environment marker could not be parsed; included conservatively",
    "A-MARKER-EXCLUDED": "Dependency excluded because its environment marker is false",
    "A-EXCLUDED": "Dependencies excluded by group policy (optional/development)",
    "A-AMBIGUOUS-LOCK": "More than one lockfile dialect is present",
    "A-UNSUPPORTED-CONSTRAINT": "A version constraint cannot be expressed as a conjunction of clauses",
    "A-NO-EDGES": "Lockfile dialect records no dependency edges; reach is inferred",
    "A-NO-METADATA": "Dependency metadata for a component could not be obtained",
}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: Severity
    message: str
    subject: Optional[str] = None
    origin: Optional[Tuple[str, Optional[int]]] = None

    def __post_init__(self) -> None:
        if self.code not in TAXONOMY:
            raise ValueError(f"unknown diagnostic code {self.code!r}")
        if not isinstance(self.severity, Severity):
            object.__setattr__(self, "severity", Severity(self.severity))

    def sort_key(self):
        origin = self.origin or ("", None)
        return (self.code, self.subject or "", origin[0], origin[1] or 0, self.message)

    def to_dict(self) -> dict:
        data = {"code": self.code, "severity": self.severity.value, "message": self.message}
        data["subject"] = self.subject
        if self.origin is not None:
            data["origin"] = {"file": self.origin[0], "line": self.origin[1]}
        else:
            data["origin"] = None
        return data


def info(code, message, subject=None, origin=None) -> Diagnostic:
    return Diagnostic(code, Severity.INFO, message, subject, origin)


def warning(code, message, subject=None, origin=None) -> Diagnostic:
    return Diagnostic(code, Severity.WARNING, message, subject, origin)


def error(code, message, subject=None, origin=None) -> Diagnostic:
    return Diagnostic(code, Severity.ERROR, message, subject, origin)
