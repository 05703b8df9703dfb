"""
Run manifest - emitted with every CLI run
"""
import json
import datetime
from dataclasses import dataclass, field
from typing import Any, Dict, List


def _plain(value: Any) -> Any:
    """JSON-friendly copy of diagnostics (numpy scalars, tuples)"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item"):
        return value.item()
    return value


@dataclass
class RunManifest:
    command: str
    config_hash: str
    tool_version: str
    wall_times: Dict[str, float] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    created_at: str = field(default_factory=lambda: datetime.datetime.now().isoformat(timespec="seconds"))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "wall_times": _plain(self.wall_times),
            "diagnostics": _plain(self.diagnostics),
            "created_at": self.created_at,
        }

    def to_lines(self) -> List[str]:
        """`# key = value` lines placed above the CSV header"""
        return [f"# {key} = {json.dumps(value, sort_keys=True)}" if not isinstance(value, str)
                else f"# {key} = {value}"
                for key, value in self.to_dict().items()]

    def write_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
