"""
Exact braid-word algebra.

Words are read left to right as path concatenation: in ``l1 l2 ... lm`` the
crossing ``l1`` happens first. Permutations follow the same order, so
``perm_rep(a * b) == perm_rep(a).then(perm_rep(b))`` and the reduced Burau
image of a concatenation is the matrix product in the same order.
"""
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Sequence, Tuple

import sympy

from .errors import BadWord, DegenerateClosure, StrandMismatch

T = sympy.Symbol("t")

Letter = Tuple[int, int]

_TOKEN = re.compile(r"s(\d+)(?:\^\(?(-?\d+)\)?)?")


@dataclass(frozen=True)
class Perm:
    """Bijection of {0..m-1}; ``images[i]`` is where ``i`` goes."""

    images: Tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a permutation: {self.images}")

    @classmethod
    def identity(cls, size: int) -> "Perm":
        return cls(tuple(range(size)))

    @classmethod
    def from_cycles(cls, size: int, cycles: Iterable[Sequence[int]]) -> "Perm":
        images = list(range(size))
        for cycle in cycles:
            for pos, point in enumerate(cycle):
                images[point] = cycle[(pos + 1) % len(cycle)]
        return cls(tuple(images))

    @classmethod
    def parse(cls, text: str, size: int) -> "Perm":
        cycles = [
            [int(tok) for tok in body.split()]
            for body in re.findall(r"\(([^()]*)\)", text)
            if body.strip()
        ]
        return cls.from_cycles(size, cycles)

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def then(self, other: "Perm") -> "Perm":
        """Apply self first, then other."""
        if other.size != self.size:
            raise ValueError("permutation sizes differ")
        return Perm(tuple(other.images[i] for i in self.images))

    def inverse(self) -> "Perm":
        inv = [0] * self.size
        for i, img in enumerate(self.images):
            inv[img] = i
        return Perm(tuple(inv))

    def power(self, k: int) -> "Perm":
        base = self if k >= 0 else self.inverse()
        out = Perm.identity(self.size)
        for _ in range(abs(k)):
            out = out.then(base)
        return out

    def is_identity(self) -> bool:
        return all(i == img for i, img in enumerate(self.images))

    def cycles(self, include_fixed: bool = True) -> List[Tuple[int, ...]]:
        """Cycles, each starting at its smallest point, ordered by that point."""
        seen = [False] * self.size
        out = []
        for start in range(self.size):
            if seen[start]:
                continue
            cycle = []
            point = start
            while not seen[point]:
                seen[point] = True
                cycle.append(point)
                point = self.images[point]
            if include_fixed or len(cycle) > 1:
                out.append(tuple(cycle))
        return out

    def cycle_type(self) -> Tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    def cycle_length_of(self, point: int) -> int:
        length, current = 1, self.images[point]
        while current != point:
            current = self.images[current]
            length += 1
        return length

    def reduce_mod(self, modulus: int) -> "Perm":
        """Induced permutation on residues; requires compatibility with the modulus."""
        images = [self.images[i] % modulus for i in range(modulus)]
        for i, img in enumerate(self.images):
            if img % modulus != images[i % modulus]:
                raise ValueError(f"permutation is not compatible with modulus {modulus}")
        return Perm(tuple(images))

    def format(self) -> str:
        cycles = self.cycles(include_fixed=False)
        if not cycles:
            return "()"
        return "".join("(" + " ".join(str(p) for p in c) + ")" for c in cycles)

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class BraidWord:
    strands: int
    letters: Tuple[Letter, ...] = ()

    def __post_init__(self) -> None:
        if self.strands < 1:
            raise BadWord(f"strand count must be positive, got {self.strands}")
        for i, sign in self.letters:
            if not 1 <= i < self.strands:
                raise BadWord(f"generator s{i} needs 1 <= i < {self.strands}")
            if sign not in (1, -1):
                raise BadWord(f"letter sign must be +1 or -1, got {sign}")

    @classmethod
    def identity(cls, n: int) -> "BraidWord":
        return cls(n, ())

    @classmethod
    def generator(cls, n: int, i: int, sign: int = 1) -> "BraidWord":
        return cls(n, ((i, sign),))

    @classmethod
    def parse(cls, text: str, n: int) -> "BraidWord":
        """Compact form ``"s1 s2^-1 s1^3"``; ``"e"`` or an empty string is the identity."""
        body = text.strip()
        if body in ("", "e"):
            return cls.identity(n)
        letters: List[Letter] = []
        pos = 0
        for match in _TOKEN.finditer(body):
            if body[pos:match.start()].strip():
                raise BadWord(f"cannot parse braid word {text!r} near {body[pos:match.start()]!r}")
            pos = match.end()
            i = int(match.group(1))
            k = int(match.group(2)) if match.group(2) is not None else 1
            letters.extend([(i, 1 if k > 0 else -1)] * abs(k))
        if body[pos:].strip():
            raise BadWord(f"cannot parse braid word {text!r} near {body[pos:]!r}")
        return cls(n, tuple(letters))

    @classmethod
    def from_json(cls, n: int, pairs: Iterable[Sequence[int]]) -> "BraidWord":
        return cls(n, tuple((int(i), int(s)) for i, s in pairs))

    def to_json(self) -> List[List[int]]:
        return [[i, s] for i, s in self.letters]

    def format(self) -> str:
        if not self.letters:
            return "e"
        parts = []
        run_letter, run = self.letters[0], 0
        for letter in self.letters + ((0, 0),):
            if letter == run_letter:
                run += 1
                continue
            i, sign = run_letter
            k = sign * run
            parts.append(f"s{i}" if k == 1 else f"s{i}^{k}")
            run_letter, run = letter, 1
        return " ".join(parts)

    def __str__(self) -> str:
        return self.format()

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "BraidWord") -> "BraidWord":
        _check_strands(self, other)
        return BraidWord(self.strands, self.letters + other.letters)

    def inverse(self) -> "BraidWord":
        return BraidWord(self.strands, tuple((i, -s) for i, s in reversed(self.letters)))

    def power(self, k: int) -> "BraidWord":
        base = self if k >= 0 else self.inverse()
        return BraidWord(self.strands, base.letters * abs(k))

    def is_identity_word(self) -> bool:
        return not free_reduce(self).letters


def _check_strands(a: BraidWord, b: BraidWord) -> None:
    if a.strands != b.strands:
        raise StrandMismatch(f"braids on {a.strands} and {b.strands} strands")


def free_reduce(w: BraidWord) -> BraidWord:
    stack: List[Letter] = []
    for i, sign in w.letters:
        if stack and stack[-1] == (i, -sign):
            stack.pop()
        else:
            stack.append((i, sign))
    return BraidWord(w.strands, tuple(stack))


def perm_rep(w: BraidWord) -> Perm:
    """Strand starting at position p ends at position perm_rep(w)(p)."""
    where = list(range(w.strands))
    at = list(range(w.strands))
    for i, _ in w.letters:
        a, b = at[i - 1], at[i]
        at[i - 1], at[i] = b, a
        where[a], where[b] = i, i - 1
    return Perm(tuple(where))


def exponent_sum(w: BraidWord) -> int:
    return sum(sign for _, sign in w.letters)


@dataclass(frozen=True)
class LaurentMatrix:
    matrix: sympy.ImmutableMatrix

    @classmethod
    def identity(cls, dim: int) -> "LaurentMatrix":
        return cls(sympy.ImmutableMatrix(sympy.eye(dim)))

    @property
    def dim(self) -> int:
        return self.matrix.rows

    def __matmul__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return LaurentMatrix(sympy.ImmutableMatrix((self.matrix * other.matrix).applyfunc(sympy.expand)))

    def equals(self, other: "LaurentMatrix") -> bool:
        if self.dim != other.dim:
            return False
        diff = (self.matrix - other.matrix).applyfunc(sympy.expand)
        return all(entry == 0 for entry in diff)

    def trace(self) -> sympy.Expr:
        return sympy.expand(self.matrix.trace())

    def to_strings(self) -> List[List[str]]:
        return [[str(self.matrix[r, c]) for c in range(self.dim)] for r in range(self.dim)]


@lru_cache(maxsize=None)
def _burau_generator(n: int, i: int, sign: int) -> LaurentMatrix:
    dim = n - 1
    m = sympy.eye(dim)
    k = i - 1
    if dim == 1:
        m[0, 0] = -T
    else:
        if k > 0:
            m[k, k - 1] = T
        m[k, k] = -T
        if k < dim - 1:
            m[k, k + 1] = 1
    if sign < 0:
        m = m.inv().applyfunc(sympy.expand)
    return LaurentMatrix(sympy.ImmutableMatrix(m))


def burau_reduced(w: BraidWord) -> LaurentMatrix:
    if w.strands < 2:
        raise BadWord("reduced Burau needs at least 2 strands")
    out = LaurentMatrix.identity(w.strands - 1)
    for i, sign in w.letters:
        out = out @ _burau_generator(w.strands, i, sign)
    return out


@dataclass(frozen=True)
class EqualityVerdict:
    equal: bool
    authoritative: bool
    reason: str


def compare_braids(a: BraidWord, b: BraidWord) -> EqualityVerdict:
    _check_strands(a, b)
    ra, rb = free_reduce(a), free_reduce(b)
    authoritative = a.strands <= 3
    if ra.letters == rb.letters:
        return EqualityVerdict(True, True, "identical after free reduction")
    if perm_rep(ra) != perm_rep(rb):
        return EqualityVerdict(False, True, "different permutations")
    if exponent_sum(ra) != exponent_sum(rb):
        return EqualityVerdict(False, True, "different exponent sums")
    if a.strands < 2:
        return EqualityVerdict(True, True, "trivial braid group")
    if not burau_reduced(ra).equals(burau_reduced(rb)):
        return EqualityVerdict(False, True, "different Burau images")
    if authoritative:
        return EqualityVerdict(True, True, "equal Burau images (faithful for n <= 3)")
    return EqualityVerdict(True, False, "permutation, exponent sum and Burau agree; not a proof for n >= 4")


def braids_equal(a: BraidWord, b: BraidWord) -> bool:
    return compare_braids(a, b).equal


@dataclass(frozen=True)
class AlexanderPoly:
    """Coefficients from degree 0 upward, normalized by +-t^k."""

    coefficients: Tuple[int, ...]

    @property
    def breadth(self) -> int:
        return len(self.coefficients) - 1

    def expr(self) -> sympy.Expr:
        return sympy.expand(sum(c * T**k for k, c in enumerate(self.coefficients)))

    def format(self) -> str:
        return str(self.expr())


def alexander_poly(w: BraidWord) -> AlexanderPoly:
    n = w.strands
    if n < 2:
        raise BadWord("Alexander polynomial needs at least 2 strands")
    m = burau_reduced(free_reduce(w)).matrix
    det = sympy.expand((sympy.eye(n - 1) - m).det(method="berkowitz"))
    quotient = sympy.cancel(det * (1 - T) / (1 - T**n))
    numer, denom = sympy.fraction(quotient)
    numer = sympy.expand(numer)
    if numer == 0:
        raise DegenerateClosure(f"det(I - Burau) vanishes for {w.format()}")
    denom_poly = sympy.Poly(denom, T)
    if len(denom_poly.terms()) != 1:
        raise DegenerateClosure(f"non-polynomial Alexander quotient for {w.format()}")
    coeffs = [int(c) for c in reversed(sympy.Poly(numer, T).all_coeffs())]
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    if coeffs[-1] < 0:
        coeffs = [-c for c in coeffs]
    return AlexanderPoly(tuple(coeffs))


def closure_components(w: BraidWord) -> List[Tuple[int, ...]]:
    return perm_rep(w).cycles()


def linking_numbers(w: BraidWord) -> Dict[Tuple[int, int], int]:
    """Pairwise linking numbers of the closure, keyed by component index pairs."""
    comps = closure_components(w)
    comp_of = {strand: idx for idx, cycle in enumerate(comps) for strand in cycle}
    counts: Counter = Counter()
    at = list(range(w.strands))
    for i, sign in w.letters:
        a, b = at[i - 1], at[i]
        ca, cb = comp_of[a], comp_of[b]
        if ca != cb:
            counts[(min(ca, cb), max(ca, cb))] += sign
        at[i - 1], at[i] = b, a
    out = {}
    for x in range(len(comps)):
        for y in range(x + 1, len(comps)):
            total = counts.get((x, y), 0)
            if total % 2:
                raise ValueError(f"odd crossing count between components {x} and {y}")
            out[(x, y)] = total // 2
    return out


def is_homogeneous(w: BraidWord) -> bool:
    signs: Dict[int, int] = {}
    for i, sign in w.letters:
        if signs.setdefault(i, sign) != sign:
            return False
    return True
