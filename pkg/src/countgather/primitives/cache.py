"""On-disk cache for built primitive constants.

One JSON file per (primitive, key). The header holds the profile id and the
key; the body is checksummed so a damaged file is rebuilt, not trusted.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator

CACHE_ENV = "COUNTGATHER_CACHE"


def cache_dir() -> Path:
    root = os.environ.get(CACHE_ENV) or os.path.join(os.path.expanduser("~"), ".cache", "countgather")
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _digest(body: Any) -> str:
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


@contextmanager
def _locked(path: Path) -> Iterator[None]:
    with open(str(path) + ".lock", "w") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def read(primitive: str, key: str, profile: str = "shared") -> Any | None:
    path = cache_dir() / f"{primitive}-{key}.json"
    try:
        doc = json.loads(path.read_text())
    except (OSError, ValueError):
        return None
    head = doc.get("header", {})
    if head.get("primitive") != primitive or head.get("key") != key or head.get("profile") != profile:
        return None
    if doc.get("sha256") != _digest(doc.get("body")):
        return None
    return doc["body"]


def cached(primitive: str, key: str, build: Callable[[], Any], profile: str = "shared", meta: dict | None = None) -> Any:
    body = read(primitive, key, profile)
    if body is not None:
        return body
    path = cache_dir() / f"{primitive}-{key}.json"
    with _locked(path):
        body = read(primitive, key, profile)
        if body is not None:
            return body
        body = build()
        doc = {
            "header": {"primitive": primitive, "key": key, "profile": profile, **(meta or {})},
            "body": body,
            "sha256": _digest(body),
        }
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh)
        os.replace(tmp, path)
    return body
