from __future__ import annotations

import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .. import __version__
from .io import sha256


@dataclass
class RunManifest:
    experiment: str
    command: str
    seed: int
    config: dict
    scheme: dict
    code_version: str = __version__
    wall_clock_s: float = 0.0
    steps: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    environment: dict = field(default_factory=lambda: {"python": platform.python_version()})

    def add_output(self, path: str | Path, root: str | Path) -> None:
        path = Path(path)
        self.outputs.append({"path": str(path.relative_to(root)), "sha256": sha256(path),
                             "bytes": path.stat().st_size})

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def write(self, out_dir: str | Path) -> Path:
        path = Path(out_dir) / "manifest.json"
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path

    @classmethod
    def read(cls, path: str | Path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))

    def verify_outputs(self, root: str | Path) -> list[str]:
        """Paths whose current hash differs from the recorded one."""
        bad = []
        for item in self.outputs:
            p = Path(root) / item["path"]
            if not p.exists() or sha256(p) != item["sha256"]:
                bad.append(item["path"])
        return bad
