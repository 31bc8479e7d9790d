import threading
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from .logutil import get_logger
from .utils import content_hash, read_json, write_json

try:
    import fcntl

    _HAS_FCNTL = True
except ImportError:
    fcntl = None  # type: ignore
    _HAS_FCNTL = False

log = get_logger("cache")


class TableCache:
    """
    Generator tables persisted as one JSON file per content key under cache_dir.
    A sibling .lock file is used with flock(2) so concurrent runs never read a
    half-written table or compute the same key twice.
    """

    def __init__(self, cache_dir: Path) -> None:
        self.cache_dir = Path(cache_dir).resolve()
        self.lock_path = self.cache_dir / ".tables.lock"
        self.process_lock = threading.Lock()

    @staticmethod
    def key_for(descriptor: Dict[str, Any]) -> str:
        return content_hash(descriptor)[:24]

    def path_for(self, key: str) -> Path:
        return self.cache_dir / f"table-{key}.json"

    @contextmanager
    def _flock(self, exclusive: bool) -> Any:
        """Cross-process lock around cache reads/writes (Linux/macOS)."""
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        if not _HAS_FCNTL:
            self.process_lock.acquire()
            try:
                yield
            finally:
                self.process_lock.release()
            return
        with open(self.lock_path, "a+", encoding="utf-8") as lf:
            op = fcntl.LOCK_EX if exclusive else fcntl.LOCK_SH
            fcntl.flock(lf.fileno(), op)
            try:
                yield
            finally:
                fcntl.flock(lf.fileno(), fcntl.LOCK_UN)

    def load(self, key: str) -> Optional[dict]:
        with self._flock(exclusive=False):
            data = read_json(self.path_for(key))
        return data or None

    def get_or_compute(self, descriptor: Dict[str, Any], compute: Callable[[], dict]) -> dict:
        key = self.key_for(descriptor)
        cached = self.load(key)
        if cached is not None:
            log.info("table cache hit key=%s", key)
            return cached["payload"]
        with self._flock(exclusive=True):
            data = read_json(self.path_for(key))
            if data:
                return data["payload"]
            log.info("table cache miss key=%s, computing", key)
            payload = compute()
            write_json(self.path_for(key), {"descriptor": descriptor, "payload": payload})
        return payload
