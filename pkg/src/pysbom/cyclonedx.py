"""CycloneDX 1.5 JSON output and the diagnostic sidecar report."""

from __future__ import annotations

import hashlib
import json
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .diagnostics import Diagnostic, Severity
from .model import ResolvedComponent, Scope, SourceKind, render_vcs_url

SPEC_VERSION = "1.5"
SCHEMA_URL = "http://cyclonedx.org/schema/bom-1.5.schema.json"
TOOL_NAME = "pysbom"
FORMATS = ("json",)

_SCOPES = {Scope.REQUIRED: "required", Scope.OPTIONAL: "optional", Scope.EXCLUDED_DEV: "excluded"}
_HASH_NAMES = {"md5": "MD5", "sha1": "SHA-1", "sha256": "SHA-256", "sha384": "SHA-384", "sha512": "SHA-512"}


class DuplicateRefError(ValueError):
    pass


class UnsupportedFormat(ValueError):
    pass


@dataclass(frozen=True)
class BomMetadata:
    """The project the SBOM describes, and the tool that wrote it."""

    name: str
    version: Optional[str] = None
    tool_version: str = "0.0.0"
    timestamp: Optional[datetime] = None


def _check_format(fmt: str) -> None:
    if fmt.lower() not in FORMATS:
        raise UnsupportedFormat(f"unsupported output format {fmt!r}: only JSON is supported")


def assign_refs(components: Iterable[ResolvedComponent]) -> Dict[str, str]:
    """normalized name -> bom-ref.

    The ref is the purl; version-less components get a ``noversion=<n>``
    qualifier numbered in purl order so refs stay unique and stable.
    """
    ordered = sorted(components, key=lambda c: (c.purl, c.name.normalized))
    refs: Dict[str, str] = {}
    seen = set()
    n = 0
    for c in ordered:
        ref = c.purl
        if c.version is None:
            n += 1
            ref += ("&" if "?" in ref else "?") + f"noversion={n}"
        if ref in seen or c.name.normalized in refs:
            raise DuplicateRefError(f"duplicate component reference {ref}")
        seen.add(ref)
        refs[c.name.normalized] = ref
    return refs


def _root_ref(meta: BomMetadata) -> str:
    ref = f"root:{meta.name}"
    return ref + (f"@{meta.version}" if meta.version else "")


def _component(c: ResolvedComponent, ref: str) -> dict:
    out = {"type": "library", "bom-ref": ref, "name": c.name.normalized}
    if c.version is not None:
        out["version"] = str(c.version)
    out["scope"] = _SCOPES[c.scope]
    hashes = [
        {"alg": _HASH_NAMES[alg], "content": digest} for alg, digest in c.hashes if alg in _HASH_NAMES
    ]
    if hashes:
        out["hashes"] = hashes
    out["purl"] = c.purl
    src = c.source
    if src.kind is SourceKind.VCS:
        out["externalReferences"] = [{"type": "vcs", "url": render_vcs_url(src)}]
    elif src.kind in (SourceKind.DIRECT_URL, SourceKind.PATH) and src.url:
        out["externalReferences"] = [{"type": "distribution", "url": src.url}]
    props = [
        ("pysbom:resolution", c.resolution.kind.value),
        ("pysbom:reach", c.reach.value),
        ("pysbom:group", str(c.group)),
        ("pysbom:source", src.kind.value),
    ]
    if c.resolution.at is not None:
        stamp = c.resolution.at.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        props.append(("pysbom:resolved-at", stamp))
    if src.kind is SourceKind.VCS and src.ref:
        props.append(("pysbom:vcs-ref", src.ref))
    if c.origin is not None:
        file, line = c.origin
        props.append(("pysbom:origin", f"{file}:{line}" if line else file))
    out["properties"] = [{"name": k, "value": v} for k, v in props]
    return out


def _document_diagnostics(diags: Sequence[Diagnostic]) -> List[dict]:
    props = []
    for d in sorted(diags, key=lambda d: d.sort_key()):
        if d.severity is Severity.INFO:
            continue
        value = f"{d.subject}: {d.message}" if d.subject else d.message
        props.append({"name": f"pysbom:diagnostic:{d.code}", "value": value})
    return props


def build_document(
    components: Sequence[ResolvedComponent],
    edges: Iterable[Tuple[Optional[str], str]],
    metadata: BomMetadata,
    *,
    diagnostics: Sequence[Diagnostic] = (),
    deterministic: bool = True,
) -> dict:
    refs = assign_refs(components)
    root_ref = _root_ref(metadata)
    if root_ref in refs.values():
        raise DuplicateRefError(f"component reference collides with the root: {root_ref}")
    by_ref = sorted(components, key=lambda c: refs[c.name.normalized])

    depends: Dict[str, set] = {root_ref: set()}
    for c in components:
        depends[refs[c.name.normalized]] = set()
    for parent, child in edges:
        if child not in refs or (parent is not None and parent not in refs):
            raise ValueError(f"dependency edge {parent or '<root>'} -> {child} names a component not in the SBOM")
        depends[root_ref if parent is None else refs[parent]].add(refs[child])

    root = {"type": "application", "bom-ref": root_ref, "name": metadata.name}
    if metadata.version:
        root["version"] = metadata.version
    meta: dict = {}
    if not deterministic:
        stamp = metadata.timestamp or datetime.now(timezone.utc)
        meta["timestamp"] = stamp.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    meta["tools"] = {"components": [{"type": "application", "name": TOOL_NAME, "version": metadata.tool_version}]}
    meta["component"] = root
    props = _document_diagnostics(diagnostics)
    if props:
        meta["properties"] = props

    doc = {
        "$schema": SCHEMA_URL,
        "bomFormat": "CycloneDX",
        "specVersion": SPEC_VERSION,
        "serialNumber": None,
        "version": 1,
        "metadata": meta,
        "components": [_component(c, refs[c.name.normalized]) for c in by_ref],
        "dependencies": [
            {"ref": ref, "dependsOn": sorted(depends[ref])}
            for ref in [root_ref] + [refs[c.name.normalized] for c in by_ref]
        ],
    }
    if deterministic:
        digest = hashlib.sha256(_dump(doc)).hexdigest()
        doc["serialNumber"] = f"urn:uuid:{uuid.uuid5(uuid.NAMESPACE_URL, 'pysbom:' + digest)}"
    else:
        doc["serialNumber"] = f"urn:uuid:{uuid.uuid4()}"
    return doc


def _dump(data) -> bytes:
    return (json.dumps(data, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def emit(
    components: Sequence[ResolvedComponent],
    edges: Iterable[Tuple[Optional[str], str]],
    metadata: BomMetadata,
    deterministic: bool = True,
    *,
    diagnostics: Sequence[Diagnostic] = (),
    fmt: str = "json",
) -> bytes:
    """Serialize an SBOM.

    In deterministic mode the output depends only on the inputs as sets:
    components are ordered by bom-ref, the timestamp is omitted and the
    serial number is derived from a hash of the content.
    """
    _check_format(fmt)
    doc = build_document(components, edges, metadata, diagnostics=diagnostics, deterministic=deterministic)
    return _dump(doc)


def emit_diagnostics(diags: Iterable[Diagnostic], fmt: str = "json") -> bytes:
    """Diagnostics ordered by code, then subject; as JSON or one line each."""
    ordered = sorted(diags, key=lambda d: d.sort_key())
    if fmt == "json":
        return _dump({"diagnostics": [d.to_dict() for d in ordered]})
    if fmt == "text":
        lines = []
        for d in ordered:
            line = f"{d.code} {d.severity.value} {d.subject or '-'} {d.message}"
            if d.origin is not None:
                file, number = d.origin
                line += f" ({file}:{number})" if number else f" ({file})"
            lines.append(line)
        return ("".join(line + "\n" for line in lines)).encode("utf-8")
    raise UnsupportedFormat(f"unsupported diagnostics format {fmt!r}: use json or text")
