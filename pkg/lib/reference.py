"""Published reference data for n = 2 and n = 3, shipped as JSON under data/reference."""
import cmath
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

from .action import GeneratorTables, WreathTable
from .braids import BraidWord, Perm
from .config import EMBEDDINGS
from .errors import MissingTable
from .fiber import base_hash
from .utils import decode_points, read_json

DEFAULT_REFERENCE_DIR = Path(__file__).resolve().parent.parent / "data" / "reference"


@dataclass(frozen=True)
class ReferenceData:
    n: int
    base: Tuple[complex, ...]
    fiber: Tuple[Tuple[complex, ...], ...]
    tables: Dict[str, dict]

    @property
    def base_hash(self) -> str:
        return base_hash(self.base)

    def generator_tables(self, embedding: str = "roots") -> GeneratorTables:
        if embedding not in EMBEDDINGS:
            raise MissingTable(f"no published tables for embedding {embedding!r}")
        size = self.n**self.n
        tables = {}
        for key, entry in self.tables.items():
            words = entry.get(embedding)
            if words is None:
                raise MissingTable(f"reference n={self.n} has no {embedding} words for s{key}")
            tables[int(key)] = WreathTable(
                self.n,
                Perm.parse(entry["perm"], size),
                tuple(BraidWord.parse(text, self.n) for text in words),
                embedding,
                self.base_hash,
            )
        return GeneratorTables(self.n, embedding, self.base_hash, tables, source="published")


def load_reference(n: int, reference_dir: Optional[Path] = None) -> ReferenceData:
    path = Path(reference_dir or DEFAULT_REFERENCE_DIR) / f"n{n}.json"
    data = read_json(path)
    if not data:
        raise MissingTable(f"no reference data for n={n} at {path}")
    return ReferenceData(
        n=int(data["n"]),
        base=decode_points(data["base"]),
        fiber=tuple(decode_points(roots) for roots in data["fiber"]),
        tables=data.get("tables", {}),
    )


def published_tables(n: int, embedding: str = "roots", reference_dir: Optional[Path] = None) -> GeneratorTables:
    return load_reference(n, reference_dir).generator_tables(embedding)


def n2_fiber_roots(epsilon: float) -> Tuple[Tuple[complex], ...]:
    """Nonzero roots z_0..z_3 of the n = 2 fiber over (e^{iε}/2, -e^{iε}/2)."""
    z1 = 2 * cmath.exp(0.5j * epsilon)
    z2 = 2 * cmath.exp(0.5j * (epsilon + cmath.pi))
    return ((-z2,), (z1,), (z2,), (-z1,))


def reference_roots(n: int, base, epsilon: float = 0.8, reference_dir: Optional[Path] = None):
    """Published labels for this base, or None when the base is not a published one."""
    if n == 2:
        half = 0.5 * cmath.exp(1j * epsilon)
        if base_hash(base) == base_hash((half, -half)):
            return n2_fiber_roots(epsilon)
        return None
    try:
        ref = load_reference(n, reference_dir)
    except MissingTable:
        return None
    if ref.base_hash != base_hash(base):
        return None
    return ref.fiber
