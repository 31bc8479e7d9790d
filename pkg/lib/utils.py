import hashlib
import json
import os
from pathlib import Path
from typing import Any, Iterable, List, Sequence

import yaml


def ensure_parent(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)


def read_yaml(path: Path) -> dict:
    if not path.exists():
        return {}
    with path.open("r", encoding="utf-8") as handle:
        data = yaml.safe_load(handle)
    return data or {}


def read_json(path: Path) -> dict:
    if not path.exists():
        return {}
    with path.open("r", encoding="utf-8") as handle:
        return json.load(handle)


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=False)


def write_json(path: Path, data: Any) -> None:
    ensure_parent(path)
    temp_path = path.with_suffix(path.suffix + ".tmp")
    with temp_path.open("w", encoding="utf-8") as handle:
        handle.write(dump_json(data))
        handle.write("\n")
    os.replace(temp_path, path)


def encode_complex(z: complex) -> List[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(pair: Sequence[float]) -> complex:
    return complex(float(pair[0]), float(pair[1]))


def encode_points(points: Iterable[complex]) -> List[List[float]]:
    return [encode_complex(z) for z in points]


def decode_points(pairs: Iterable[Sequence[float]]) -> tuple:
    return tuple(decode_complex(p) for p in pairs)


def content_hash(data: Any) -> str:
    """SHA-256 over canonical JSON; used for cache keys and base-point tags."""
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
