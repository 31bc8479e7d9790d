"""
Braid-sequence invariants built from the ψ lifts: the nested lift sequences,
conjugacy cycles at each level, and invariant streams evaluated on them.
"""
from collections import Counter
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import sympy

from .action import GeneratorTables, iter_levels
from .braids import BraidWord, Perm, burau_reduced, exponent_sum, free_reduce, perm_rep
from .errors import BasePointMismatch, StrandMismatch
from .logutil import get_logger

log = get_logger("invariants")

EXPONENT_SUM = "exponent_sum"
CYCLE_TYPE = "cycle_type"
BURAU_TRACE = "burau_trace"
BASE_INVARIANTS = (EXPONENT_SUM, CYCLE_TYPE, BURAU_TRACE)


@dataclass(frozen=True)
class LiftSequence:
    """levels[j] holds the (n^n)^j braids B_{j,i}; levels[0] is the root word."""

    root: BraidWord
    levels: Tuple[Tuple[BraidWord, ...], ...]
    perms: Tuple[Perm, ...]
    embedding: str
    base_hash: str

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def to_json(self) -> dict:
        return {
            "root": self.root.format(),
            "embedding": self.embedding,
            "base_hash": self.base_hash,
            "levels": [[w.format() for w in level] for level in self.levels[1:]],
        }


def lift_sequence(w: BraidWord, depth: int, tables: GeneratorTables, limit: int = 10**6) -> LiftSequence:
    if w.strands != tables.n:
        raise StrandMismatch(f"braid on {w.strands} strands, tables for n={tables.n}")
    perms, levels = [], []
    for perm, lifted in iter_levels(w, depth, tables, limit):
        perms.append(perm)
        levels.append(lifted)
    return LiftSequence(w, tuple(levels), tuple(perms), tables.embedding, tables.base_hash)


@dataclass(frozen=True)
class ConjugacyCycleData:
    level: int
    cycles: Tuple[Tuple[Tuple[int, ...], BraidWord], ...]

    def cycle_lengths(self) -> Tuple[int, ...]:
        return tuple(len(c) for c, _ in self.cycles)

    def signature(self) -> Counter:
        """Multiset of (length, exponent sum, Burau trace) over the cycles; invariant under conjugation."""
        return Counter(
            (len(cycle), exponent_sum(loop), str(_burau_trace(loop))) for cycle, loop in self.cycles
        )

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "cycles": [{"points": list(c), "loop": loop.format()} for c, loop in self.cycles],
        }


def cycle_loops(perm: Perm, lifted: Tuple[BraidWord, ...], level: int) -> ConjugacyCycleData:
    cycles = []
    for cycle in perm.cycles():
        loop = BraidWord.identity(lifted[0].strands)
        for point in cycle:
            loop = loop * lifted[point]
        cycles.append((cycle, free_reduce(loop)))
    return ConjugacyCycleData(level, tuple(cycles))


def conjugacy_sequence(
    w: BraidWord,
    depth: int,
    tables: GeneratorTables,
    limit: int = 10**6,
) -> List[ConjugacyCycleData]:
    seq = lift_sequence(w, depth, tables, limit)
    # lifts at level j start at the level-j points, which the level-j perm moves
    return [cycle_loops(seq.perms[j], seq.levels[j], j) for j in range(1, depth + 1)]


def _burau_trace(w: BraidWord) -> sympy.Expr:
    if w.strands < 2:
        return sympy.Integer(1)
    return burau_reduced(w).trace()


INVARIANT_FUNCTIONS: Dict[str, Callable[[BraidWord], Any]] = {
    EXPONENT_SUM: exponent_sum,
    CYCLE_TYPE: lambda w: perm_rep(w).cycle_type(),
    BURAU_TRACE: _burau_trace,
}


def invariant_stream(
    w: BraidWord,
    depth: int,
    base: str,
    tables: GeneratorTables,
    limit: int = 10**6,
) -> List[List[Any]]:
    """base invariant on every entry of levels 1..depth."""
    fn = INVARIANT_FUNCTIONS.get(base)
    if fn is None:
        raise ValueError(f"unknown base invariant {base!r}; choose from {BASE_INVARIANTS}")
    seq = lift_sequence(w, depth, tables, limit)
    return [[fn(entry) for entry in level] for level in seq.levels[1:]]


def stream_to_json(stream: List[List[Any]]) -> List[List[Any]]:
    def encode(value: Any) -> Any:
        if isinstance(value, tuple):
            return list(value)
        if isinstance(value, sympy.Basic):
            return str(value)
        return value

    return [[encode(v) for v in level] for level in stream]


@dataclass(frozen=True)
class Verdict:
    distinguished: bool
    term: Optional[int]
    invariant: Optional[str]
    depth: int
    detail: str = ""

    @property
    def level(self) -> Optional[int]:
        """Lift level of the separating term (0 for the root word)."""
        return None if self.term is None else self.term - 1

    def to_json(self) -> dict:
        return {
            "distinguished": self.distinguished,
            "term": self.term,
            "level": self.level,
            "invariant": self.invariant,
            "depth": self.depth,
            "detail": self.detail,
        }


def _values_differ(base: str, xs: Tuple[BraidWord, ...], ys: Tuple[BraidWord, ...]) -> Optional[int]:
    fn = INVARIANT_FUNCTIONS[base]
    for idx, (x, y) in enumerate(zip(xs, ys)):
        a, b = fn(x), fn(y)
        if base == BURAU_TRACE:
            if sympy.expand(a - b) != 0:
                return idx
        elif a != b:
            return idx
    return None


def distinguish(
    a: BraidWord,
    b: BraidWord,
    depth: int,
    tables: GeneratorTables,
    tables_b: Optional[GeneratorTables] = None,
    limit: int = 10**6,
) -> Verdict:
    """
    Compare the lift sequences term by term (term 1 is the root word, term j+1
    the level-j lifts), trying exponent sum, cycle type and Burau trace in that
    order within each term.
    """
    if a.strands != b.strands:
        raise StrandMismatch(f"braids on {a.strands} and {b.strands} strands")
    tables_b = tables_b or tables
    if tables.base_hash != tables_b.base_hash or tables.embedding != tables_b.embedding:
        raise BasePointMismatch(
            f"sequences over {tables.base_hash}/{tables.embedding} and {tables_b.base_hash}/{tables_b.embedding}"
        )
    seq_a = lift_sequence(a, depth, tables, limit)
    seq_b = lift_sequence(b, depth, tables_b, limit)
    for level in range(depth + 1):
        xs, ys = seq_a.levels[level], seq_b.levels[level]
        for base in BASE_INVARIANTS:
            idx = _values_differ(base, xs, ys)
            if idx is not None:
                log.debug("distinguished at level %d entry %d via %s", level, idx, base)
                return Verdict(True, level + 1, base, depth, f"entry {idx} of level {level}")
    return Verdict(False, None, None, depth, f"indistinguishable up to depth {depth}")
