"""scan -> parse -> resolve -> emit, as one call."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .cyclonedx import BomMetadata, emit, emit_diagnostics
from .diagnostics import Diagnostic
from .index import IndexClient
from .project import DEFAULT_REQUIREMENTS, ProjectModel, build_project_model
from .resolver import ResolutionPolicy, ResolveResult, resolve_project


@dataclass
class ScanResult:
    model: ProjectModel
    resolved: ResolveResult

    @property
    def diagnostics(self) -> List[Diagnostic]:
        return sorted(set(self.model.diagnostics) | set(self.resolved.diagnostics), key=lambda d: d.sort_key())

    @property
    def metadata(self) -> BomMetadata:
        name = self.model.name or Path(self.model.root).resolve().name
        return BomMetadata(name=name, version=self.model.version, tool_version=__version__)

    def sbom(self, deterministic: bool = True) -> bytes:
        return emit(
            self.resolved.components,
            self.resolved.edges,
            self.metadata,
            deterministic,
            diagnostics=self.diagnostics,
        )

    def report(self, fmt: str = "json") -> bytes:
        return emit_diagnostics(self.diagnostics, fmt)


def scan_project(
    root,
    policy: Optional[ResolutionPolicy] = None,
    client: Optional[IndexClient] = None,
    requirements_names: Sequence[str] = DEFAULT_REQUIREMENTS,
) -> ScanResult:
    """Build the project model for ``root`` and resolve it.

    Raises :class:`~pysbom.project.NoMetadataError` when nothing in ``root``
    could be parsed.
    """
    policy = policy or ResolutionPolicy()
    model = build_project_model(root, requirements_names)
    return ScanResult(model, resolve_project(model, policy, client))
