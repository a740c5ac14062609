"""Versioned model artifacts (.npz + JSON metadata) and JSON report files."""
import hashlib
import json
import logging
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np

from .errors import ArtifactError, ArtifactMismatchError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
_META_KEY = "__meta__"


def hash_text(text: str) -> str:
    """SHA-256 hex digest of a string."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True, eq=False)
class Artifact:
    kind: str
    meta: Dict[str, Any]
    arrays: Dict[str, np.ndarray]

    def subset(self, prefix: str) -> Dict[str, np.ndarray]:
        """Arrays stored under ``prefix/``, with the prefix stripped."""
        head = f"{prefix}/"
        return {k[len(head):]: v for k, v in self.arrays.items() if k.startswith(head)}


def save_artifact(path: Union[str, Path], kind: str, arrays: Mapping[str, np.ndarray], meta: Mapping[str, Any]) -> Path:
    """Write arrays plus a ``format_version``/``kind`` metadata record.

    The file is written exactly at ``path`` (no ``.npz`` suffix is added).
    """
    path = Path(path)
    if _META_KEY in arrays:
        raise ArtifactError(f"array name {_META_KEY!r} is reserved")
    record = {"format_version": FORMAT_VERSION, "kind": kind, **meta}
    payload = {k: np.asarray(v) for k, v in arrays.items()}
    payload[_META_KEY] = np.array(json.dumps(record, sort_keys=True, ensure_ascii=False))
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        np.savez(f, **payload)
    logger.debug("wrote %s artifact with %d arrays to %s", kind, len(arrays), path)
    return path


def load_artifact(path: Union[str, Path], kind: Optional[str] = None) -> Artifact:
    """Read an artifact without unpickling; check its version and, if given, its kind."""
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as data:
            arrays = {name: data[name] for name in data.files}
    except (OSError, ValueError, zipfile.BadZipFile) as exc:
        raise ArtifactError(f"cannot read artifact {path}: {exc}") from exc
    if _META_KEY not in arrays:
        raise ArtifactError(f"{path} has no metadata record")
    try:
        meta = json.loads(str(arrays.pop(_META_KEY)))
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path} has corrupt metadata: {exc.msg}") from exc
    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise ArtifactError(f"{path} has format version {version}, expected {FORMAT_VERSION}")
    if kind is not None and meta.get("kind") != kind:
        raise ArtifactError(f"{path} holds a {meta.get('kind')!r} model, expected {kind!r}")
    return Artifact(kind=meta["kind"], meta=meta, arrays=arrays)


def check_fingerprint(name: str, stored: Optional[str], current: str) -> None:
    if stored != current:
        raise ArtifactMismatchError(
            f"{name} fingerprint mismatch: artifact has {str(stored)[:12]}, current is {current[:12]}"
        )


def prefixed(prefix: str, arrays: Mapping[str, np.ndarray]) -> Dict[str, np.ndarray]:
    return {f"{prefix}/{k}": v for k, v in arrays.items()}


def write_json(path: Union[str, Path], data: Any) -> Path:
    """Write JSON with stable formatting, so identical data gives identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")
    return path


def read_json(path: Union[str, Path]) -> Any:
    with open(path, encoding="utf-8") as f:
        return json.load(f)
