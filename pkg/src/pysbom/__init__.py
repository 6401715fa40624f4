"""CycloneDX SBOMs for Python projects.

Reads every metadata surface a Python project may use (pyproject.toml in its
standard, Poetry and PDM dialects, requirements files, and poetry.lock,
pdm.lock and Pipfile.lock), resolves versions, and reports every gap it
could not close as a coded diagnostic instead of dropping it.
"""

__version__ = "0.1.0"

from .diagnostics import Diagnostic, Severity  # noqa: E402
from .index import IndexClient  # noqa: E402
from .model import (  # noqa: E402
    DeclaredDependency,
    DependencyGroup,
    LockedPackage,
    PackageName,
    ResolvedComponent,
    SourceRef,
    normalize_name,
)
from .pipeline import ScanResult, scan_project  # noqa: E402
from .project import NoMetadataError, build_project_model, discover  # noqa: E402
from .resolver import ResolutionPolicy, Strategy, resolve_project  # noqa: E402
from .versions import Version, VersionSpec, matches, parse_specifier_set, parse_version  # noqa: E402

__all__ = [
    "DeclaredDependency",
    "DependencyGroup",
    "Diagnostic",
    "IndexClient",
    "LockedPackage",
    "NoMetadataError",
    "PackageName",
    "ResolutionPolicy",
    "ResolvedComponent",
    "ScanResult",
    "Severity",
    "SourceRef",
    "Strategy",
    "Version",
    "VersionSpec",
    "build_project_model",
    "discover",
    "matches",
    "normalize_name",
    "parse_specifier_set",
    "parse_version",
    "resolve_project",
    "scan_project",
]
