"""On-disk response cache and append-only run journal."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from pathlib import Path

from ordex.llm.backends import GenerationParams
from ordex.llm.messages import Conversation

logger = logging.getLogger(__name__)


def request_digest(conv: Conversation, params: GenerationParams) -> str:
    blob = json.dumps({"messages": conv.to_list(), "params": params.to_dict()},
                      sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class ResponseCache:
    """Digest-keyed response store.

    Entries live in memory for the life of the object and, when ``directory``
    is given, as one ``<digest>.json`` file each so later processes can reuse
    them. Disk errors downgrade the cache to memory-only with a warning.
    """

    def __init__(self, directory: str | Path | None = None) -> None:
        self.directory = Path(directory) if directory is not None else None
        self._mem: dict[str, str] = {}
        self._lock = threading.Lock()
        self._disk_ok = True
        if self.directory is not None:
            try:
                self.directory.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                self._disk_failed(exc)

    def _disk_failed(self, exc: OSError) -> None:
        logger.warning("response cache at %s unusable, continuing without it: %s", self.directory, exc)
        self._disk_ok = False

    def _path(self, digest: str) -> Path:
        assert self.directory is not None
        return self.directory / f"{digest}.json"

    def get(self, digest: str) -> str | None:
        if digest in self._mem:
            return self._mem[digest]
        if self.directory is None or not self._disk_ok:
            return None
        path = self._path(digest)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None
        except (OSError, ValueError) as exc:
            logger.warning("ignoring unreadable cache entry %s: %s", path, exc)
            return None
        response = data.get("response")
        if isinstance(response, str):
            self._mem[digest] = response
            return response
        return None

    def put(self, digest: str, conv: Conversation, params: GenerationParams, response: str) -> None:
        with self._lock:
            self._mem[digest] = response
            if self.directory is None or not self._disk_ok:
                return
            record = {"digest": digest, "params": params.to_dict(), "messages": conv.to_list(), "response": response}
            try:
                atomic_write_text(self._path(digest), json.dumps(record, ensure_ascii=False, indent=1))
            except OSError as exc:
                self._disk_failed(exc)

    def __contains__(self, digest: str) -> bool:
        return self.get(digest) is not None

    def __len__(self) -> int:
        return len(self._mem)


class Journal:
    """Newline-delimited JSON log of every prompt/response exchange."""

    def __init__(self, path: str | Path | None) -> None:
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self.entries = 0

    def record(self, digest: str, conv: Conversation, response: str, *, cached: bool) -> None:
        self.entries += 1
        if self.path is None:
            return
        line = json.dumps(
            {"timestamp": time.time(), "digest": digest, "cached": cached,
             "conversation": conv.to_list(), "response": response},
            ensure_ascii=False,
        )
        with self._lock:
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
            except OSError as exc:
                logger.warning("could not append to journal %s: %s", self.path, exc)
