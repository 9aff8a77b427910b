"""Run manifests: provenance and content digests for every output file."""

import hashlib
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

from .. import __version__


def file_digest(path: Path) -> str:
    """SHA-256 hex digest of a file's contents."""
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class OutputEntry(BaseModel):
    """One output file and its digest."""

    path: str
    sha256: str


class RunManifest(BaseModel):
    """Everything needed to reproduce a command's outputs."""

    tool_version: str = __version__
    command: str
    config: dict[str, Any] = Field(default_factory=dict)
    seed: int | None = None
    started_at: str = Field(default_factory=utc_now)
    finished_at: str | None = None
    outputs: list[OutputEntry] = Field(default_factory=list)

    def add_output(self, path: Path, root: Path) -> None:
        """Register an output file, recording its path relative to `root`."""
        self.outputs.append(
            OutputEntry(path=path.relative_to(root).as_posix(), sha256=file_digest(path))
        )

    def write(self, path: Path) -> Path:
        """Stamp the finish time and write the manifest as JSON."""
        self.finished_at = utc_now()
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    def digests(self) -> dict[str, str]:
        return {entry.path: entry.sha256 for entry in self.outputs}
