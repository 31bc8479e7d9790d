"""
Wreath-product action engine.

h(B) = (B_0, ..., B_{N-1}; σ(B)) with N = n^n, one lifted braid per fiber label.
Composition follows path concatenation:

    h(AB)_i = A_i · B_{σ(A)(i)},    σ(AB) = σ(A) then σ(B)

Level-j permutations ρ_j act on N^j points; point N^j·k + i carries the level-j
index i in its low digits and the (j+1)-th digit k.
"""
import threading
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from sympy.combinatorics import Permutation, PermutationGroup

from .braids import BraidWord, Perm, braids_equal, free_reduce
from .config import RunConfig
from .errors import (
    BadIndex,
    BasePointMismatch,
    DepthExceeded,
    EndpointUnmatched,
    EnumerationBudgetExceeded,
    MissingTable,
    StrandMismatch,
)
from .fiber import LabeledFiber, fiber_over_point
from .jobs import parallel_map
from .lift import PolyPath, SampledPath, end_strand, lift_path, project_to_V, word_loop
from .logutil import get_logger
from .polyalg import ConfigPoint

log = get_logger("action")

PSI = "psi"
PHI = "phi"
_KIND_ALIASES = {"psi": PSI, "H": PSI, "phi": PHI, "N": PHI}


def action_kind(kind: str) -> str:
    try:
        return _KIND_ALIASES[kind]
    except KeyError:
        raise BadIndex(f"unknown action kind {kind!r} (psi/H or phi/N)") from None


@dataclass(frozen=True)
class WreathTable:
    n: int
    perm: Perm
    lifted: Tuple[BraidWord, ...]
    embedding: str = "roots"
    base_hash: str = ""

    def __post_init__(self) -> None:
        size = self.n**self.n
        if self.perm.size != size or len(self.lifted) != size:
            raise ValueError(f"a table for n={self.n} needs {size} entries")
        for w in self.lifted:
            if w.strands != self.n:
                raise StrandMismatch(f"lifted braid on {w.strands} strands in an n={self.n} table")

    @classmethod
    def identity(cls, n: int, embedding: str = "roots", base_hash: str = "") -> "WreathTable":
        size = n**n
        return cls(n, Perm.identity(size), (BraidWord.identity(n),) * size, embedding, base_hash)

    @property
    def size(self) -> int:
        return self.perm.size

    def _check_compatible(self, other: "WreathTable") -> None:
        if other.n != self.n:
            raise StrandMismatch(f"tables for n={self.n} and n={other.n}")
        if other.embedding != self.embedding:
            raise ValueError(f"tables for embeddings {self.embedding} and {other.embedding}")
        if self.base_hash and other.base_hash and self.base_hash != other.base_hash:
            raise BasePointMismatch(f"tables over bases {self.base_hash} and {other.base_hash}")

    def then(self, other: "WreathTable") -> "WreathTable":
        """Table of the concatenation: self's loop first."""
        self._check_compatible(other)
        lifted = tuple(
            free_reduce(self.lifted[i] * other.lifted[self.perm(i)]) for i in range(self.size)
        )
        return WreathTable(self.n, self.perm.then(other.perm), lifted, self.embedding, self.base_hash or other.base_hash)

    def inverse(self) -> "WreathTable":
        inv = self.perm.inverse()
        lifted = tuple(self.lifted[inv(j)].inverse() for j in range(self.size))
        return WreathTable(self.n, inv, lifted, self.embedding, self.base_hash)

    def is_identity(self) -> bool:
        e = BraidWord.identity(self.n)
        return self.perm.is_identity() and all(braids_equal(w, e) for w in self.lifted)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "embedding": self.embedding,
            "base_hash": self.base_hash,
            "perm": self.perm.format(),
            "images": list(self.perm.images),
            "lifted": [w.format() for w in self.lifted],
        }

    @classmethod
    def from_json(cls, data: dict) -> "WreathTable":
        n = int(data["n"])
        if "images" in data:
            perm = Perm(tuple(int(x) for x in data["images"]))
        else:
            perm = Perm.parse(data["perm"], n**n)
        lifted = tuple(BraidWord.parse(text, n) for text in data["lifted"])
        return cls(n, perm, lifted, data.get("embedding", "roots"), data.get("base_hash", ""))


@dataclass
class GeneratorTables:
    """h(σ_i) for each generator, with a memo of evaluated words."""

    n: int
    embedding: str
    base_hash: str
    tables: Dict[int, WreathTable]
    source: str = "computed"
    _memo: Dict[Tuple, WreathTable] = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def generator(self, i: int, sign: int = 1) -> WreathTable:
        table = self.tables.get(i)
        if table is None:
            raise MissingTable(f"no table for s{i} (n={self.n}, embedding={self.embedding})")
        if sign > 0:
            return table
        key = ((i, -1),)
        with self._lock:
            cached = self._memo.get(key)
        if cached is None:
            cached = table.inverse()
            with self._lock:
                self._memo[key] = cached
        return cached

    def evaluate(self, w: BraidWord) -> WreathTable:
        if w.strands != self.n:
            raise StrandMismatch(f"braid on {w.strands} strands, tables for n={self.n}")
        reduced = free_reduce(w)
        key = reduced.letters
        with self._lock:
            cached = self._memo.get(key)
        if cached is not None:
            return cached
        out = WreathTable.identity(self.n, self.embedding, self.base_hash)
        for i, sign in reduced.letters:
            out = out.then(self.generator(i, sign))
        with self._lock:
            self._memo[key] = out
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "embedding": self.embedding,
            "base_hash": self.base_hash,
            "source": self.source,
            "tables": {str(i): t.to_json() for i, t in sorted(self.tables.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "GeneratorTables":
        tables = {int(i): WreathTable.from_json(t) for i, t in data["tables"].items()}
        return cls(int(data["n"]), data["embedding"], data.get("base_hash", ""), tables, data.get("source", "computed"))


def h_of_word(w: BraidWord, tables: GeneratorTables) -> WreathTable:
    return tables.evaluate(w)


def generator_lifts(
    n: int,
    i: int,
    fiber: LabeledFiber,
    cfg: Optional[RunConfig] = None,
) -> List[PolyPath]:
    """Lifts of the s_i loop from every fiber label, in label order."""
    cfg = cfg or RunConfig()
    base = fiber.base.points
    loop = word_loop(BraidWord.generator(n, i), base, cfg.samples)
    vpaths = {s: project_to_V(loop, s, cfg.tau_sep) for s in range(n)}

    def lift_from(label: int) -> PolyPath:
        s = fiber.strand_of(label)
        pp = lift_path(vpaths[s], label, fiber, cfg)
        expected = end_strand(loop, s, base)
        if fiber.strand_of(pp.end_label) != expected:
            raise EndpointUnmatched(
                f"lift of s{i} from {label} ends over strand {fiber.strand_of(pp.end_label)}, expected {expected}"
            )
        return pp

    lifts = parallel_map(lift_from, range(len(fiber)), cfg.max_workers)
    log.info("lifted s%d from %d labels (n=%d)", i, len(lifts), n)
    return lifts


def table_from_lifts(n: int, lifts: Sequence[PolyPath], embedding: str, base_hash: str) -> WreathTable:
    perm = Perm(tuple(pp.end_label for pp in lifts))
    lifted = tuple(pp.braid(embedding) for pp in lifts)
    return WreathTable(n, perm, lifted, embedding, base_hash)


def generator_table(
    n: int,
    i: int,
    fiber: LabeledFiber,
    embedding: str = "roots",
    cfg: Optional[RunConfig] = None,
) -> WreathTable:
    lifts = generator_lifts(n, i, fiber, cfg)
    return table_from_lifts(n, lifts, embedding, fiber.base_hash)


def iter_levels(
    w: BraidWord,
    j: int,
    tables: GeneratorTables,
    limit: int = 10**6,
) -> Iterator[Tuple[Perm, Tuple[BraidWord, ...]]]:
    """Yield (ρ_level(w), lifted braids at that level) for levels 0..j."""
    if j < 0:
        raise BadIndex(f"level must be non-negative, got {j}")
    size_n = tables.n**tables.n
    if size_n**j > limit:
        raise EnumerationBudgetExceeded(f"level {j} has {size_n}^{j} points, above the limit {limit}")
    images: List[int] = [0]
    lifted: List[BraidWord] = [w]
    yield Perm((0,)), (w,)
    for level in range(j):
        size = size_n**level
        new_images = [0] * (size * size_n)
        new_lifted: List[Optional[BraidWord]] = [None] * (size * size_n)
        for i in range(size):
            t = tables.evaluate(lifted[i])
            for k in range(size_n):
                new_images[size * k + i] = size * t.perm(k) + images[i]
                new_lifted[size * k + i] = t.lifted[k]
        images, lifted = new_images, new_lifted  # type: ignore[assignment]
        yield Perm(tuple(images)), tuple(lifted)


def level_lifts(
    w: BraidWord,
    j: int,
    tables: GeneratorTables,
    limit: int = 10**6,
) -> Tuple[Perm, Tuple[BraidWord, ...]]:
    """(ρ_j(w), lifted braids at level j) from the recursion on h."""
    out = None
    for out in iter_levels(w, j, tables, limit):
        pass
    return out


def rho_level(w: BraidWord, j: int, tables: GeneratorTables, limit: int = 10**6) -> Perm:
    if j < 1:
        raise BadIndex(f"rho_level needs j >= 1, got {j}")
    return level_lifts(w, j, tables, limit)[0]


@dataclass(frozen=True)
class AdicPrefix:
    """
    Finite digit prefix. psi digits are base n^n; phi digits are mixed radix
    (n, n^(n-1), n^(n-1), ...) with the first digit a strand of the base.
    """

    kind: str
    n: int
    digits: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in (PSI, PHI):
            raise BadIndex(f"unknown prefix kind {self.kind!r}")
        if not self.digits:
            raise BadIndex("a prefix needs at least one digit")
        for d, radix in zip(self.digits, self.radices):
            if not 0 <= d < radix:
                raise BadIndex(f"digit {d} outside 0..{radix - 1}")

    @staticmethod
    def radices_for(kind: str, n: int, depth: int) -> Tuple[int, ...]:
        if kind == PSI:
            return (n**n,) * depth
        return (n,) + (n ** (n - 1),) * (depth - 1)

    @property
    def radices(self) -> Tuple[int, ...]:
        return self.radices_for(self.kind, self.n, len(self.digits))

    @property
    def depth(self) -> int:
        return len(self.digits)

    def to_int(self) -> int:
        value, weight = 0, 1
        for d, radix in zip(self.digits, self.radices):
            value += d * weight
            weight *= radix
        return value

    @classmethod
    def from_int(cls, kind: str, n: int, value: int, depth: int) -> "AdicPrefix":
        radices = cls.radices_for(kind, n, depth)
        total = 1
        for r in radices:
            total *= r
        if not 0 <= value < total:
            raise BadIndex(f"{value} does not fit in {depth} digits")
        digits = []
        for radix in radices:
            value, d = divmod(value, radix)
            digits.append(d)
        return cls(kind, n, tuple(digits))

    @classmethod
    def points(cls, kind: str, n: int, depth: int) -> int:
        total = 1
        for r in cls.radices_for(kind, n, depth):
            total *= r
        return total

    def common_prefix(self, other: "AdicPrefix") -> int:
        """Number of leading digits shared; n-adic distance is a power of this."""
        count = 0
        for a, b in zip(self.digits, other.digits):
            if a != b:
                break
            count += 1
        return count

    def to_json(self) -> dict:
        return {"kind": self.kind, "n": self.n, "digits": list(self.digits), "integer": self.to_int()}


def psi_apply(w: BraidWord, a: AdicPrefix, tables: GeneratorTables) -> AdicPrefix:
    """Move each digit by σ of the braid lifted along the earlier digits."""
    if a.kind != PSI:
        raise BadIndex("psi_apply needs a psi prefix")
    if a.n != tables.n:
        raise StrandMismatch(f"prefix for n={a.n}, tables for n={tables.n}")
    current = w
    out = []
    for d in a.digits:
        t = tables.evaluate(current)
        out.append(t.perm(d))
        current = t.lifted[d]
    return AdicPrefix(PSI, a.n, tuple(out))


def phi_label(n: int, strand: int, digit: int) -> int:
    """Fiber label of the second φ digit over the given base strand."""
    return (strand + 1) % n + n * digit


class PhiTower:
    """
    φ_n by recursive lifting: the first digit is a base strand, the second a
    point over its difference set, deeper digits points over the nonzero roots
    of the previous level, each moved by lifting the actual lifted paths.
    """

    def __init__(self, fiber: LabeledFiber, cfg: Optional[RunConfig] = None) -> None:
        self.fiber = fiber
        self.n = fiber.n
        self.cfg = cfg or RunConfig(n=fiber.n)
        self._fibers: Dict[Tuple, LabeledFiber] = {}
        self._loops: Dict[Tuple, SampledPath] = {}
        self._lifts: Dict[Tuple, PolyPath] = {}
        self._lock = threading.Lock()

    def check_depth(self, level: int) -> None:
        limit = self.cfg.phi_depth.get(self.n, 1)
        if level > limit:
            raise DepthExceeded(f"phi level {level} exceeds the configured maximum {limit} for n={self.n}")

    def loop(self, w: BraidWord) -> SampledPath:
        key = w.letters
        with self._lock:
            cached = self._loops.get(key)
        if cached is None:
            cached = word_loop(w, self.fiber.base.points, self.cfg.samples)
            with self._lock:
                self._loops[key] = cached
        return cached

    def fiber_over(self, roots: Sequence[complex]) -> LabeledFiber:
        key = tuple(sorted((round(z.real, 6), round(z.imag, 6)) for z in roots))
        with self._lock:
            cached = self._fibers.get(key)
        if cached is None:
            cached = fiber_over_point(ConfigPoint(tuple(roots), "V", self.cfg.tau_sep), self.cfg)
            with self._lock:
                self._fibers[key] = cached
        return cached

    def _first_lift(self, w: BraidWord, strand: int, digit: int) -> PolyPath:
        key = (w.letters, strand, digit)
        with self._lock:
            cached = self._lifts.get(key)
        if cached is None:
            vpath = project_to_V(self.loop(w), strand, self.cfg.tau_sep)
            cached = lift_path(vpath, phi_label(self.n, strand, digit), self.fiber, self.cfg)
            with self._lock:
                self._lifts[key] = cached
        return cached

    def apply(self, w: BraidWord, a: AdicPrefix) -> AdicPrefix:
        if a.kind != PHI:
            raise BadIndex("phi_apply needs a phi prefix")
        if w.strands != self.n or a.n != self.n:
            raise StrandMismatch(f"phi tower for n={self.n}")
        self.check_depth(a.depth - 1)
        loop = self.loop(w)
        strand = a.digits[0]
        out = [end_strand(loop, strand, self.fiber.base.points)]
        if a.depth > 1:
            pp = self._first_lift(w, strand, a.digits[1])
            out.append(pp.end_label // self.n)
            for d in a.digits[2:]:
                start = self.fiber_over(pp.polys[0].nonzero_roots())
                end = self.fiber_over(pp.polys[-1].nonzero_roots())
                pp = lift_path(pp.root_path(), d, start, self.cfg, end_fiber=end)
                out.append(pp.end_label)
        return AdicPrefix(PHI, self.n, tuple(out))

    def level_perm(self, w: BraidWord, j: int) -> Perm:
        """φ on the n·(n^(n-1))^j points of level j, indexed by AdicPrefix.to_int."""
        self.check_depth(j)
        count = AdicPrefix.points(PHI, self.n, j + 1)
        prefixes = [AdicPrefix.from_int(PHI, self.n, x, j + 1) for x in range(count)]
        images = parallel_map(lambda a: self.apply(w, a).to_int(), prefixes, self.cfg.max_workers)
        return Perm(tuple(images))


def phi_apply(w: BraidWord, a: AdicPrefix, tower: PhiTower) -> AdicPrefix:
    return tower.apply(w, a)


def phi_level_perms(j: int, tower: PhiTower) -> Dict[int, Perm]:
    return {i: tower.level_perm(BraidWord.generator(tower.n, i), j) for i in range(1, tower.n)}


def psi_level_perms(j: int, tables: GeneratorTables, limit: int = 10**6) -> Dict[int, Perm]:
    return {i: rho_level(BraidWord.generator(tables.n, i), j, tables, limit) for i in range(1, tables.n)}


def kernel_membership(
    w: BraidWord,
    j: int,
    kind: str,
    tables: Optional[GeneratorTables] = None,
    tower: Optional[PhiTower] = None,
    limit: int = 10**6,
) -> bool:
    """True iff w acts trivially on level j (H: ψ, N: φ)."""
    if action_kind(kind) == PSI:
        if tables is None:
            raise MissingTable("psi kernel test needs generator tables")
        return rho_level(w, j, tables, limit).is_identity()
    if tower is None:
        raise MissingTable("phi kernel test needs a fiber")
    return tower.level_perm(w, j).is_identity()


def _generator_perms(
    j: int,
    kind: str,
    tables: Optional[GeneratorTables],
    tower: Optional[PhiTower],
    limit: int,
) -> List[Perm]:
    kind = action_kind(kind)
    if kind == PSI:
        if tables is None:
            raise MissingTable("psi needs generator tables")
        return list(psi_level_perms(j, tables, limit).values())
    if tower is None:
        raise MissingTable("phi needs a fiber")
    n = tower.n
    if AdicPrefix.points(PHI, n, j + 1) > limit:
        raise EnumerationBudgetExceeded(f"phi level {j} has too many points for the limit {limit}")
    return list(phi_level_perms(j, tower).values())


def _sympy_group(perms: Iterable[Perm]) -> PermutationGroup:
    gens = [Permutation(list(p.images)) for p in perms]
    return PermutationGroup(gens)


def image_order(
    j: int,
    kind: str,
    tables: Optional[GeneratorTables] = None,
    tower: Optional[PhiTower] = None,
    limit: int = 10**6,
) -> int:
    """Order of the group generated by the level-j generator permutations (Schreier-Sims)."""
    perms = _generator_perms(j, kind, tables, tower, limit)
    order = int(_sympy_group(perms).order())
    log.info("image order at level %d (%s): %d", j, action_kind(kind), order)
    return order


def orbit_partition(
    j: int,
    kind: str,
    tables: Optional[GeneratorTables] = None,
    tower: Optional[PhiTower] = None,
    limit: int = 10**6,
) -> List[Tuple[int, ...]]:
    """Orbits of the level-j points under all generators, each sorted, ordered by least point."""
    perms = _generator_perms(j, kind, tables, tower, limit)
    orbits = _sympy_group(perms).orbits()
    return sorted((tuple(sorted(int(x) for x in orbit)) for orbit in orbits), key=lambda o: o[0])


def all_prefixes(kind: str, n: int, depth: int) -> Iterable[AdicPrefix]:
    radices = AdicPrefix.radices_for(kind, n, depth)
    for digits in product(*(range(r) for r in radices)):
        yield AdicPrefix(kind, n, digits)
