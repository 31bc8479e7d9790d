import threading
from pathlib import Path
from typing import Dict, List, Optional

from .action import GeneratorTables, PhiTower, generator_lifts, table_from_lifts
from .cache import TableCache
from .config import RunConfig
from .fiber import LabeledFiber, base_hash, full_fiber
from .lift import PolyPath
from .logutil import get_logger
from .polyalg import ConfigPoint
from .reference import published_tables, reference_roots
from .utils import encode_points

log = get_logger("tables")

SOURCES = ("computed", "published", "auto")


class TableService:
    """
    Fiber, generator tables and φ tower for one RunConfig. Computed tables go
    through the on-disk cache; lifts are shared between the two embeddings.
    """

    def __init__(
        self,
        cfg: RunConfig,
        cache: Optional[TableCache] = None,
        reference_dir: Optional[Path] = None,
    ) -> None:
        self.cfg = cfg
        self.cache = cache
        self.reference_dir = reference_dir
        self._lock = threading.Lock()
        self._fiber: Optional[LabeledFiber] = None
        self._lifts: Dict[int, List[PolyPath]] = {}
        self._tables: Dict[tuple, GeneratorTables] = {}
        self._tower: Optional[PhiTower] = None

    @property
    def base(self):
        return self.cfg.base_points()

    @property
    def base_hash(self) -> str:
        return base_hash(self.base)

    def has_reference(self) -> bool:
        return reference_roots(self.cfg.n, self.base, self.cfg.epsilon, self.reference_dir) is not None

    def fiber(self) -> LabeledFiber:
        with self._lock:
            if self._fiber is None:
                ref = reference_roots(self.cfg.n, self.base, self.cfg.epsilon, self.reference_dir)
                self._fiber = full_fiber(ConfigPoint(tuple(self.base), "C", self.cfg.tau_sep), self.cfg, reference=ref)
            return self._fiber

    def lifts(self, i: int) -> List[PolyPath]:
        fiber = self.fiber()
        with self._lock:
            cached = self._lifts.get(i)
        if cached is None:
            cached = generator_lifts(self.cfg.n, i, fiber, self.cfg)
            with self._lock:
                self._lifts[i] = cached
        return cached

    def descriptor(self, embedding: str) -> dict:
        return {
            "n": self.cfg.n,
            "base": encode_points(self.base),
            "embedding": embedding,
            "tolerances": self.cfg.tolerances(),
            "samples": self.cfg.samples,
            "seed": self.cfg.seed,
            "crossing_sign": self.cfg.crossing_sign,
        }

    def _compute(self, embedding: str) -> GeneratorTables:
        n = self.cfg.n
        tables = {
            i: table_from_lifts(n, self.lifts(i), embedding, self.base_hash) for i in range(1, n)
        }
        return GeneratorTables(n, embedding, self.base_hash, tables, source="computed")

    def tables(self, embedding: Optional[str] = None, source: str = "computed") -> GeneratorTables:
        embedding = embedding or self.cfg.embedding
        if source == "auto":
            source = "published" if self.has_reference() else "computed"
        key = (embedding, source)
        with self._lock:
            cached = self._tables.get(key)
        if cached is not None:
            return cached
        if source == "published":
            result = published_tables(self.cfg.n, embedding, self.reference_dir)
        elif self.cache is not None:
            payload = self.cache.get_or_compute(
                self.descriptor(embedding), lambda: self._compute(embedding).to_json()
            )
            result = GeneratorTables.from_json(payload)
        else:
            result = self._compute(embedding)
        with self._lock:
            self._tables[key] = result
        return result

    def tower(self) -> PhiTower:
        fiber = self.fiber()
        with self._lock:
            if self._tower is None:
                self._tower = PhiTower(fiber, self.cfg)
            return self._tower
