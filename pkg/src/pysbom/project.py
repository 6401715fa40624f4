"""Find the metadata files of a project and assemble a :class:`ProjectModel`."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from . import diagnostics as dg
from .diagnostics import Diagnostic
from .lockfiles import LOCK_PARSERS, LockfileError
from .model import DeclaredDependency, GroupKind, LockedPackage, SourceKind
from .pyproject import PyprojectError, parse_pyproject, project_identity
from .requirements import IncludeCycleError, RequirementSyntaxError, parse_requirements

DEFAULT_REQUIREMENTS = ("requirements.txt",)
_REQUIREMENTS_LIKE = re.compile(r".*requirements.*\.txt$", re.IGNORECASE)


class NoMetadataError(RuntimeError):
    """Raised when not a single metadata file in the project could be parsed."""


@dataclass
class DiscoveredFiles:
    root: Path
    pyproject: Optional[Path] = None
    setup_py: Optional[Path] = None
    requirements: List[Path] = field(default_factory=list)
    lockfiles: List[Tuple[str, Path]] = field(default_factory=list)
    pipfile: Optional[Path] = None
    diagnostics: List[Diagnostic] = field(default_factory=list)

    def relative(self, path: Path) -> str:
        try:
            return path.relative_to(self.root).as_posix()
        except ValueError:
            return path.as_posix()


@dataclass
class ProjectModel:
    files: DiscoveredFiles
    declared: List[DeclaredDependency] = field(default_factory=list)
    locked: List[LockedPackage] = field(default_factory=list)
    frontend_hint: Optional[str] = None
    diagnostics: List[Diagnostic] = field(default_factory=list)
    name: Optional[str] = None
    version: Optional[str] = None

    @property
    def root(self) -> Path:
        return self.files.root

    @property
    def extras(self) -> frozenset:
        """Every optional-group name that appears in declarations or the lock."""
        groups = [d.group for d in self.declared] + [p.group for p in self.locked]
        return frozenset(g.extra for g in groups if g.kind is GroupKind.OPTIONAL)


def _readable(path: Path) -> bool:
    try:
        with path.open("rb"):
            return True
    except OSError:
        return False


def discover(root, requirements_names: Sequence[str] = DEFAULT_REQUIREMENTS) -> DiscoveredFiles:
    """Locate pyproject.toml, setup.py, requirements files and lockfiles in ``root``.

    Lockfile dialects are recognized by file name only.
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(f"not a readable directory: {root}")
    try:
        entries = sorted(p for p in root.iterdir() if p.is_file() and _readable(p))
    except OSError as exc:
        raise NotADirectoryError(f"cannot list {root}: {exc.strerror}") from None
    by_name = {p.name: p for p in entries}
    found = DiscoveredFiles(root=root)
    found.pyproject = by_name.get("pyproject.toml")
    found.setup_py = by_name.get("setup.py")
    found.pipfile = by_name.get("Pipfile")
    names = list(requirements_names or ())
    for name in names:
        candidate = root / name
        if candidate.is_file() and _readable(candidate):
            found.requirements.append(candidate)
    for dialect, (filename, _) in sorted(LOCK_PARSERS.items()):
        if filename in by_name:
            found.lockfiles.append((dialect, by_name[filename]))

    diags = found.diagnostics
    if found.pyproject is None:
        if found.setup_py is not None:
            diags.append(dg.warning(
                "E1", "setup.py found without pyproject.toml; setup.py is not executed, its dependencies are not read",
                origin=("setup.py", None),
            ))
        else:
            diags.append(dg.info("E1", "no pyproject.toml found"))
    if not found.lockfiles:
        diags.append(dg.info("E2", "no lockfile found; versions and transitive dependencies must be resolved"))
    elif len(found.lockfiles) > 1:
        dialects = ", ".join(d for d, _ in found.lockfiles)
        diags.append(dg.warning("A-AMBIGUOUS-LOCK", f"several lockfile dialects present ({dialects}); all are read"))
    listed = {p.name for p in found.requirements}
    for p in entries:
        if _REQUIREMENTS_LIKE.match(p.name) and p.name not in listed:
            diags.append(dg.info(
                "E3", f"{p.name} looks like a requirements file but is not in the configured names; not read",
                origin=(p.name, None),
            ))
    return found


def _absent_files(files: DiscoveredFiles, names: Sequence[str]) -> str:
    wanted = ["pyproject.toml", *names, "poetry.lock", "pdm.lock", "Pipfile.lock"]
    return ", ".join(wanted)


def build_project_model(root, requirements_names: Sequence[str] = DEFAULT_REQUIREMENTS) -> ProjectModel:
    """Discover and parse every metadata file of the project at ``root``.

    A file that fails to parse becomes an ``A-PARSE-ERROR`` diagnostic and the
    scan continues; :class:`NoMetadataError` is raised only when no file at
    all could be parsed.
    """
    files = discover(root, requirements_names)
    model = ProjectModel(files=files, diagnostics=list(files.diagnostics))
    diags = model.diagnostics
    parsed = 0
    hint = None

    if files.pyproject is not None:
        rel = files.relative(files.pyproject)
        content = files.pyproject.read_bytes()
        try:
            declared, hint = parse_pyproject(content, path=rel, diagnostics=diags)
        except PyprojectError as exc:
            diags.append(dg.error("A-PARSE-ERROR", str(exc), origin=(rel, None)))
        else:
            parsed += 1
            model.declared.extend(declared)
            model.name, model.version = project_identity(content)
            diags.append(dg.info("T1", f"{rel} parsed: {len(declared)} declared dependencies", origin=(rel, None)))

    for path in files.requirements:
        rel = files.relative(path)
        try:
            declared = parse_requirements(path.read_text(encoding="utf-8"), Path(rel), root=files.root, diagnostics=diags)
        except (RequirementSyntaxError, IncludeCycleError, OSError, UnicodeDecodeError) as exc:
            diags.append(dg.error("A-PARSE-ERROR", f"{rel}: {exc}", origin=(rel, None)))
            continue
        parsed += 1
        model.declared.extend(declared)

    for dialect, path in files.lockfiles:
        rel = files.relative(path)
        _, parser = LOCK_PARSERS[dialect]
        try:
            locked = parser(path.read_bytes(), path=rel, diagnostics=diags)
        except (LockfileError, OSError) as exc:
            diags.append(dg.error("A-PARSE-ERROR", str(exc), origin=(rel, None)))
            continue
        parsed += 1
        model.locked.extend(locked)
        diags.append(dg.info("T2", f"{rel} parsed: {len(locked)} locked packages", origin=(rel, None)))
        diags.append(dg.info("E8", f"{rel} read with the {dialect} lock dialect", origin=(rel, None)))
        dev = sum(1 for p in locked if p.group.kind is GroupKind.DEVELOPMENT)
        if dev:
            diags.append(dg.info("T4", f"{rel}: {dev} development-group packages retained", origin=(rel, None)))

    if parsed == 0:
        detail = "no metadata file could be parsed"
        if files.setup_py is not None:
            detail += " (setup.py is detected but never executed)"
        raise NoMetadataError(f"{files.root}: {detail}; looked for {_absent_files(files, requirements_names)}")

    for d in model.declared:
        if d.source.kind is SourceKind.VCS:
            diags.append(dg.info(
                "T5", f"VCS reference parsed: {d.source.vcs_type} {d.source.url} ref={d.source.ref or '-'}",
                d.name.normalized, d.origin,
            ))
        if d.unversioned:
            diags.append(dg.info("E9", "declared without a version; kept and resolved later", d.name.normalized, d.origin))
    if any(d.group.kind is not GroupKind.REQUIRED for d in model.declared):
        diags.append(dg.info(
            "E6", "optional and development dependencies mapped onto optional(<extra>) / development groups",
        ))

    model.frontend_hint = _frontend(files, hint)
    if not files.lockfiles:
        diags.append(dg.info("E4", "metadata lists only direct dependencies; transitives come from the package index"))
        if model.frontend_hint in ("pip", "hatch"):
            diags.append(dg.info("E5", f"{model.frontend_hint} does not create a lockfile"))
    return model


def _frontend(files: DiscoveredFiles, hint: Optional[str]) -> Optional[str]:
    dialects = {d for d, _ in files.lockfiles}
    if files.pipfile is not None or "pipenv" in dialects:
        return "pipenv"
    if "poetry" in dialects:
        return "poetry"
    if "pdm" in dialects:
        return "pdm"
    if files.requirements:
        # requirements files are pip's surface; the other front-ends keep their own
        return "pip"
    return hint
