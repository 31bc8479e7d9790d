"""
Real algebraic closures from lifted loops in V_3.

Five loops β_1..β_5 based at x_1 = (e^{iπ/4}, 2) have critical values with
monotone or constant argument; some power of each lifts to a loop at z_1
whose root braid is one of the words w_1..w_5. Concatenations that move both
strands give braids whose squared closures are real algebraic.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .action import GeneratorTables
from .braids import (
    BraidWord,
    alexander_poly,
    braids_equal,
    closure_components,
    free_reduce,
    is_homogeneous,
    linking_numbers,
)
from .config import RunConfig
from .errors import BadIndex, ComputationError, DegenerateClosure
from .fiber import LabeledFiber
from .lift import CONSTANT, DECREASING, FAILS, INCREASING, SampledPath, check_argument_monotone, concatenate, lift_path
from .logutil import get_logger

log = get_logger("realalg")

N_STRANDS = 3
START_LABEL = 1
BETA_SAMPLES = 400

W_WORDS: Dict[int, str] = {
    1: "s2",
    2: "s1^2",
    3: "s1 s2 s1 s1 s2 s1",
    4: "s2 s1 s2^-1 s1 s2 s2 s1 s2^-1 s1 s2",
    5: "s2^-1 s1 s2^2 s1",
}
BETA_WORDS: Dict[int, str] = {
    1: "s1^2",
    2: "s2^-1 s1^2 s2",
    3: "s1^2 s2",
    4: "s1^2 s2^2",
    5: "s2 s1^2 s2",
}
LOOP_POWERS: Dict[int, int] = {1: 1, 2: 2, 3: 6, 4: 6, 5: 3}
# which nonzero strand (v1, v2) each loop moves
MOVES: Dict[int, Tuple[bool, bool]] = {
    1: (True, False),
    2: (False, True),
    3: (True, True),
    4: (True, False),
    5: (False, True),
}


def w_word(i: int) -> BraidWord:
    if i not in W_WORDS:
        raise BadIndex(f"theorem words are indexed 1..5, got {i}")
    return BraidWord.parse(W_WORDS[i], N_STRANDS)


def beta_word(i: int) -> BraidWord:
    if i not in BETA_WORDS:
        raise BadIndex(f"loops are indexed 1..5, got {i}")
    return BraidWord.parse(BETA_WORDS[i], N_STRANDS)


@dataclass(frozen=True)
class TheoremWord:
    epsilon: int
    indices: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.epsilon not in (1, -1):
            raise BadIndex(f"epsilon must be +1 or -1, got {self.epsilon}")
        for i in self.indices:
            if i not in W_WORDS:
                raise BadIndex(f"theorem words are indexed 1..5, got {i}")

    @classmethod
    def parse(cls, epsilon: int, text: str) -> "TheoremWord":
        try:
            indices = tuple(int(tok) for tok in text.replace(",", " ").split())
        except ValueError as exc:
            raise BadIndex(f"cannot parse indices {text!r}") from exc
        return cls(epsilon, indices)

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "indices": list(self.indices)}


def expand_theorem_word(tw: TheoremWord) -> BraidWord:
    out = BraidWord.identity(N_STRANDS)
    for i in tw.indices:
        out = out * w_word(i).power(tw.epsilon)
    return free_reduce(out)


@dataclass(frozen=True)
class ConditionReport:
    holds: bool
    explanation: str
    moves_v1: bool
    moves_v2: bool

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "explanation": self.explanation,
            "moves_v1": self.moves_v1,
            "moves_v2": self.moves_v2,
        }


def check_theorem_condition(tw: TheoremWord) -> ConditionReport:
    """Every nonzero strand must move: a 3, or one of {1, 4} together with one of {2, 5}."""
    used = set(tw.indices)
    v1 = any(MOVES[i][0] for i in used)
    v2 = any(MOVES[i][1] for i in used)
    if 3 in used:
        why = "w3 moves both strands"
    elif v1 and v2:
        why = f"{sorted(used & {1, 4})} move v1 and {sorted(used & {2, 5})} move v2"
    elif v1:
        why = "no index from {2, 3, 5}: v2 never moves"
    elif v2:
        why = "no index from {1, 3, 4}: v1 never moves"
    else:
        why = "no loop moves any strand"
    return ConditionReport(v1 and v2, why, v1, v2)


def _beta_points(i: int, t: np.ndarray) -> np.ndarray:
    theta = 2 * math.pi * t
    quarter = math.pi / 4
    v1 = np.full(t.shape, complex(math.cos(quarter), math.sin(quarter)))
    v2 = np.full(t.shape, 2 + 0j)
    if i == 1:
        v1 = np.exp(1j * (quarter + theta))
    elif i == 2:
        # dips between 0 and v1 on its way round
        radius = 0.5 + 1.5 * ((1 + np.cos(theta)) / 2) ** 16
        v2 = radius * np.exp(1j * theta)
    elif i == 3:
        v1 = (1 + t) * np.exp(1j * (quarter + 7 * math.pi * t / 4))
        v2 = (2 - t) * np.exp(1j * math.pi * t / 4)
    elif i == 4:
        phi = quarter + theta
        c = math.cos(quarter)
        bump = np.clip((np.cos(phi) - c) / (1 - c), 0.0, None) ** 2
        v1 = (1 + 2 * bump) * np.exp(1j * phi)
    elif i == 5:
        v2 = 2 * np.exp(1j * theta)
    else:
        raise BadIndex(f"loops are indexed 1..5, got {i}")
    return np.stack([v1, v2], axis=1)


@dataclass(frozen=True)
class BetaLoop:
    index: int
    power: int
    path: SampledPath
    verdicts: Tuple[str, ...]

    @property
    def word(self) -> BraidWord:
        return beta_word(self.index)

    def power_path(self) -> SampledPath:
        return concatenate([self.path] * self.power) if self.power > 1 else self.path

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "power": self.power,
            "word": self.word.format(),
            "verdicts": list(self.verdicts),
        }


def beta_loop(i: int, samples: int = BETA_SAMPLES, power: Optional[int] = None) -> BetaLoop:
    t = np.linspace(0.0, 1.0, samples + 1)
    path = SampledPath.from_array("V", t, _beta_points(i, t))
    return BetaLoop(i, LOOP_POWERS[i] if power is None else power, path, check_argument_monotone(path))


@dataclass(frozen=True)
class TableLift:
    index: int
    power: int
    braid: BraidWord

    def to_json(self) -> dict:
        return {"index": self.index, "power": self.power, "braid": self.braid.format()}


def table_lift(i: int, tables: GeneratorTables, start: int = START_LABEL) -> TableLift:
    """Loop power (cycle length of the start label) and lifted braid from wreath tables."""
    t = tables.evaluate(beta_word(i))
    power = t.perm.cycle_length_of(start)
    braid = tables.evaluate(beta_word(i).power(power)).lifted[start]
    return TableLift(i, power, free_reduce(braid))


def segment_verdicts(path: SampledPath, count: int) -> List[Tuple[str, ...]]:
    """Argument verdicts on each of `count` equal time slots, in the strand order of `path`."""
    ts = np.asarray(path.ts)
    arr = path.array()
    out = []
    for s in range(count):
        lo, hi = s / count, (s + 1) / count
        mask = (ts >= lo - 1e-12) & (ts <= hi + 1e-12)
        piece = SampledPath.from_array(path.space, (ts[mask] - lo) * count, arr[mask])
        out.append(check_argument_monotone(piece))
    return out


def segments_compatible(segments: Sequence[Sequence[str]]) -> Tuple[bool, List[str]]:
    """Per strand: no failures and no change of direction across segments."""
    problems = []
    for strand in range(len(segments[0]) if segments else 0):
        seen = {seg[strand] for seg in segments}
        if FAILS in seen:
            problems.append(f"strand {strand}: argument not monotone")
        elif INCREASING in seen and DECREASING in seen:
            problems.append(f"strand {strand}: argument changes direction")
    return not problems, problems


def _strands_move(segments: Sequence[Sequence[str]]) -> Tuple[bool, ...]:
    width = len(segments[0]) if segments else 0
    return tuple(any(seg[s] != CONSTANT for seg in segments) for s in range(width))


@dataclass
class Certificate:
    subject: dict
    start_label: int
    certified: bool = False
    closed: Optional[bool] = None
    end_label: Optional[int] = None
    braid: Optional[BraidWord] = None
    expected: Optional[BraidWord] = None
    matches_expected: Optional[bool] = None
    verdicts: List[List[str]] = field(default_factory=list)
    reasons: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "start_label": self.start_label,
            "certified": self.certified,
            "closed": self.closed,
            "end_label": self.end_label,
            "braid": None if self.braid is None else self.braid.format(),
            "expected": None if self.expected is None else self.expected.format(),
            "matches_expected": self.matches_expected,
            "segment_verdicts": self.verdicts,
            "reasons": self.reasons,
        }


def _certify_path(
    cert: Certificate,
    path: SampledPath,
    segments: List[Tuple[str, ...]],
    fiber: LabeledFiber,
    cfg: RunConfig,
) -> Certificate:
    cert.verdicts = [list(s) for s in segments]
    monotone, problems = segments_compatible(segments)
    cert.reasons.extend(problems)
    try:
        pp = lift_path(path, cert.start_label, fiber, cfg)
    except ComputationError as exc:
        cert.reasons.append(f"lift refused: {type(exc).__name__}: {exc}")
        return cert
    cert.end_label = pp.end_label
    cert.closed = pp.end_label == cert.start_label
    cert.braid = free_reduce(pp.braid_roots)
    if not cert.closed:
        cert.reasons.append(f"lift from {cert.start_label} ends at {pp.end_label}: not a loop")
    if cert.expected is not None:
        cert.matches_expected = braids_equal(cert.braid, cert.expected)
    cert.certified = bool(cert.closed and monotone)
    return cert


def certify_lift_loop(
    bl: BetaLoop,
    fiber: LabeledFiber,
    cfg: Optional[RunConfig] = None,
    start: int = START_LABEL,
) -> Certificate:
    cfg = cfg or RunConfig(n=N_STRANDS)
    cert = Certificate({"loop": bl.index, "power": bl.power}, start)
    if start == START_LABEL and bl.power == LOOP_POWERS[bl.index]:
        cert.expected = w_word(bl.index)
    path = bl.power_path()
    cert = _certify_path(cert, path, segment_verdicts(path, bl.power), fiber, cfg)
    log.info("loop %d^%d from z_%d: certified=%s", bl.index, bl.power, start, cert.certified)
    return cert


def theorem_path(tw: TheoremWord, samples: int = BETA_SAMPLES) -> Tuple[SampledPath, List[Tuple[str, ...]]]:
    pieces: List[SampledPath] = []
    for i in tw.indices:
        bl = beta_loop(i, samples)
        piece = bl.power_path()
        if tw.epsilon < 0:
            piece = piece.reversed()
        pieces.append(piece)
    path = concatenate(pieces)
    return path, segment_verdicts(path, len(pieces))


def certify_theorem_word(
    tw: TheoremWord,
    fiber: LabeledFiber,
    cfg: Optional[RunConfig] = None,
    samples: int = BETA_SAMPLES,
) -> Certificate:
    """Lift the concatenated loops once from z_1; the braid must be the expansion of tw."""
    cfg = cfg or RunConfig(n=N_STRANDS)
    cert = Certificate(tw.to_json(), START_LABEL, expected=expand_theorem_word(tw))
    if not tw.indices:
        cert.reasons.append("empty theorem word")
        return cert
    condition = check_theorem_condition(tw)
    path, segments = theorem_path(tw, samples)
    cert = _certify_path(cert, path, segments, fiber, cfg)
    if not all(_strands_move(segments)) or not condition.holds:
        cert.reasons.append(f"condition fails: {condition.explanation}")
        cert.certified = False
    if cert.matches_expected is False:
        cert.reasons.append("lifted braid differs from the expanded word")
        cert.certified = False
    return cert


@dataclass(frozen=True)
class ObstructionReport:
    components: int
    linking: Dict[Tuple[int, int], int]
    conway_degree: Optional[int]
    bound: int
    homogeneous_word: bool
    verdict: Optional[str]

    @property
    def violated(self) -> bool:
        return self.conway_degree is not None and self.conway_degree < self.bound

    def to_json(self) -> dict:
        return {
            "components": self.components,
            "linking_numbers": [[a, b, lk] for (a, b), lk in sorted(self.linking.items())],
            "linking_sum": sum(self.linking.values()),
            "conway_degree": self.conway_degree,
            "bound": self.bound,
            "inequality_holds": None if self.conway_degree is None else not self.violated,
            "homogeneous_word": self.homogeneous_word,
            "verdict": self.verdict,
        }


def homogeneity_obstruction(w: BraidWord) -> ObstructionReport:
    """Closures of homogeneous braids satisfy deg ∇ >= 2·Σ|lk| - k + 1."""
    k = len(closure_components(w))
    linking = linking_numbers(w)
    bound = 2 * sum(abs(v) for v in linking.values()) - k + 1
    try:
        degree: Optional[int] = alexander_poly(w).breadth
    except DegenerateClosure as exc:
        log.info("no Conway degree for %s: %s", w.format(), exc)
        degree = None
    verdict = None
    if degree is not None and degree < bound:
        verdict = "cannot be the closure of a homogeneous braid"
    return ObstructionReport(k, linking, degree, bound, is_homogeneous(w), verdict)


def homogeneous_check(w: BraidWord) -> bool:
    return is_homogeneous(w)
