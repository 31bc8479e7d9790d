"""
Path lifting through θ_n.

A loop in V_n is tracked on the critical-point system f_c(c_k) = v_k(t) with a
secant predictor and Newton corrector; the roots are carried along by seeded
root finding. Braid words are read from the real-part order of the strands
{0} ∪ roots (or {0} ∪ critical points): adjacent strands swapping positions
emit s_p^±1, positive when the strand moving left passes above (larger
imaginary part), which makes the n = 2 lift from z_1 the positive generator.
"""
import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .braids import BraidWord
from .config import RunConfig
from .errors import (
    DegenerateProjection,
    EndpointUnmatched,
    LeavesVn,
    NoConvergence,
    NonGenericBase,
    PathTrackingFailure,
)
from .fiber import LabeledFiber, check_generic
from .logutil import get_logger
from .polyalg import ConfigPoint, MonicPoly, all_roots, matching_order, newton_polish, set_distance
from .utils import ensure_parent

log = get_logger("lift")

INCREASING = "increasing"
DECREASING = "decreasing"
CONSTANT = "constant"
FAILS = "fails"


@dataclass(frozen=True)
class SampledPath:
    space: str
    ts: Tuple[float, ...]
    points: Tuple[Tuple[complex, ...], ...]

    def __post_init__(self) -> None:
        if len(self.ts) != len(self.points) or len(self.ts) < 2:
            raise ValueError("a sampled path needs at least two samples")
        if self.ts[0] != 0.0 or self.ts[-1] != 1.0:
            raise ValueError("sample times must run from 0 to 1")
        if any(b <= a for a, b in zip(self.ts, self.ts[1:])):
            raise ValueError("sample times must be strictly increasing")

    @classmethod
    def from_array(cls, space: str, ts: Sequence[float], arr: np.ndarray) -> "SampledPath":
        ts = [float(t) for t in ts]
        ts[0], ts[-1] = 0.0, 1.0
        return cls(space, tuple(ts), tuple(tuple(complex(z) for z in row) for row in arr))

    @property
    def width(self) -> int:
        return len(self.points[0])

    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex)

    @property
    def start(self) -> Tuple[complex, ...]:
        return self.points[0]

    @property
    def end(self) -> Tuple[complex, ...]:
        return self.points[-1]

    @property
    def closed(self) -> bool:
        return set_distance(self.start, self.end) <= 1e-9 * (1 + max(abs(z) for z in self.start))

    def at(self, t: float) -> np.ndarray:
        arr = self.array()
        if t <= 0.0:
            return arr[0]
        if t >= 1.0:
            return arr[-1]
        k = int(np.searchsorted(self.ts, t, side="right")) - 1
        t0, t1 = self.ts[k], self.ts[k + 1]
        s = (t - t0) / (t1 - t0)
        return (1 - s) * arr[k] + s * arr[k + 1]

    def reversed(self) -> "SampledPath":
        return SampledPath.from_array(self.space, [1.0 - t for t in reversed(self.ts)], self.array()[::-1])

    def then(self, other: "SampledPath") -> "SampledPath":
        return concatenate([self, other])

    def max_gap(self) -> float:
        return max(b - a for a, b in zip(self.ts, self.ts[1:]))

    def to_json(self) -> dict:
        return {
            "space": self.space,
            "t": list(self.ts),
            "points": [[[z.real, z.imag] for z in row] for row in self.points],
        }


def concatenate(paths: Sequence[SampledPath]) -> SampledPath:
    """Traverse the paths in order on equal time slots; later entries are re-ordered to continue the earlier ones."""
    if not paths:
        raise ValueError("nothing to concatenate")
    k = len(paths)
    ts: List[float] = []
    rows: List[np.ndarray] = []
    current_end: Optional[np.ndarray] = None
    for idx, path in enumerate(paths):
        arr = path.array()
        if current_end is not None:
            if set_distance(current_end, arr[0]) > 1e-9 * (1 + float(np.max(np.abs(arr[0])))):
                raise ValueError(f"path {idx} does not start where path {idx - 1} ends")
            order = matching_order(arr[0], current_end)
            arr = arr[:, order]
        offset = idx / k
        for j, (t, row) in enumerate(zip(path.ts, arr)):
            if idx > 0 and j == 0:
                continue
            ts.append(offset + t / k)
            rows.append(row)
        current_end = arr[-1]
    return SampledPath.from_array(paths[0].space, ts, np.asarray(rows))


def generator_loop(
    n: int,
    i: int,
    base: Sequence[complex],
    m: int = 100,
    sign: int = 1,
    tau_sep: float = 1e-8,
) -> SampledPath:
    """Half-turn (counterclockwise for sign=+1) exchanging the strands at real-order positions i-1, i."""
    base = tuple(complex(z) for z in base)
    if len(base) != n or not 1 <= i < n:
        raise ValueError(f"generator s{i} needs 1 <= i < n = {len(base)}")
    check_generic(base, tau_sep)
    order = sorted(range(n), key=lambda k: base[k].real)
    a, b = order[i - 1], order[i]
    mid = (base[a] + base[b]) / 2
    d = (base[b] - base[a]) / 2
    for k in range(n):
        if k not in (a, b) and abs(base[k].real - mid.real) <= abs(d) + tau_sep:
            raise NonGenericBase(f"strand {k} lies inside the real span of the s{i} exchange")
    ts = np.linspace(0.0, 1.0, m + 1)
    arr = np.tile(np.asarray(base, dtype=complex), (m + 1, 1))
    rot = np.exp(1j * np.pi * sign * ts)
    arr[:, b] = mid + d * rot
    arr[:, a] = mid - d * rot
    return SampledPath.from_array("C", ts, arr)


def word_loop(w: BraidWord, base: Sequence[complex], m: int = 100) -> SampledPath:
    """Concatenated generator loops of w in C_n, strands keeping their identity."""
    current = tuple(complex(z) for z in base)
    if not w.letters:
        return SampledPath.from_array("C", [0.0, 1.0], np.asarray([current, current]))
    pieces = []
    for i, sign in w.letters:
        loop = generator_loop(w.strands, i, current, m, sign)
        pieces.append(loop)
        current = loop.end
    return concatenate(pieces)


def project_to_V(path: SampledPath, strand: int, tau_sep: float = 1e-8) -> SampledPath:
    arr = path.array()
    others = [k for k in range(arr.shape[1]) if k != strand]
    diffs = arr[:, others] - arr[:, [strand]]
    for row in diffs:
        defect = ConfigPoint(tuple(row), "V", tau_sep).defect
        if defect:
            raise LeavesVn(f"projection relative to strand {strand} leaves V_n: {defect}")
    return SampledPath.from_array("V", path.ts, diffs)


def end_strand(path: SampledPath, strand: int, base: Sequence[complex]) -> int:
    """Index of the base point where the given strand of a C_n loop ends."""
    end = path.end[strand]
    return int(np.argmin([abs(end - z) for z in base]))


def read_braid(positions: np.ndarray, crossing_sign: int = 1) -> BraidWord:
    """Braid word of strands sampled as rows of ``positions`` (samples x strands)."""
    positions = np.asarray(positions, dtype=complex)
    samples, n = positions.shape
    scale = 1.0 + float(np.max(np.abs(positions)))
    tiny = 1e-12 * scale
    for row in (positions[0], positions[-1]):
        xs = np.sort(row.real)
        if np.any(np.diff(xs) <= tiny):
            raise DegenerateProjection("strands share a real part at an endpoint; perturb the base point")
    order = list(np.argsort(positions[0].real, kind="stable"))
    signs = np.sign(np.subtract.outer(positions[0].real, positions[0].real))
    letters = []
    for k in range(samples - 1):
        x0, x1 = positions[k].real, positions[k + 1].real
        y0, y1 = positions[k].imag, positions[k + 1].imag
        d0 = np.subtract.outer(x0, x0)
        d1 = np.subtract.outer(x1, x1)
        new_signs = np.where(d1 == 0, signs, np.sign(d1))
        events = []
        for a in range(n):
            for b in range(a + 1, n):
                if new_signs[a, b] != signs[a, b]:
                    denom = d0[a, b] - d1[a, b]
                    s = float(d0[a, b] / denom) if denom != 0 else 0.5
                    events.append((min(max(s, 0.0), 1.0), a, b))
        signs = new_signs
        for s, a, b in sorted(events):
            pa, pb = order.index(a), order.index(b)
            if abs(pa - pb) != 1:
                raise DegenerateProjection(f"non-adjacent strands {a}, {b} swap between samples {k} and {k + 1}")
            left, right = (a, b) if pa < pb else (b, a)
            im_left = (1 - s) * y0[left] + s * y1[left]
            im_right = (1 - s) * y0[right] + s * y1[right]
            if abs(im_right - im_left) <= tiny:
                raise DegenerateProjection(f"strands {a}, {b} collide near sample {k}")
            sign = 1 if im_right > im_left else -1
            p = min(pa, pb)
            letters.append((p + 1, sign * crossing_sign))
            order[pa], order[pb] = order[pb], order[pa]
    return BraidWord(n, tuple(letters))


def braid_of_C_path(path: SampledPath, crossing_sign: int = 1) -> BraidWord:
    return read_braid(path.array(), crossing_sign)


@dataclass
class PolyPath:
    ts: Tuple[float, ...]
    polys: Tuple[MonicPoly, ...]
    start_label: int
    end_label: int
    crossing_sign: int = 1
    steps_rejected: int = field(default=0, compare=False)

    @cached_property
    def braid_roots(self) -> BraidWord:
        return braid_from_path(self, "roots")

    @cached_property
    def braid_crit(self) -> BraidWord:
        return braid_from_path(self, "critical_points")

    def braid(self, embedding: str) -> BraidWord:
        return self.braid_roots if embedding == "roots" else self.braid_crit

    def strand_array(self, embedding: str) -> np.ndarray:
        if embedding == "roots":
            rows = [p.roots for p in self.polys]
        elif embedding == "critical_points":
            rows = [(0j,) + tuple(p.critical_points) for p in self.polys]
        else:
            raise ValueError(f"unknown embedding {embedding!r}")
        return np.asarray(rows, dtype=complex)

    def root_path(self) -> SampledPath:
        """Nonzero roots as a path in V_n (the next level of the tower)."""
        return SampledPath.from_array("V", self.ts, self.strand_array("roots")[:, 1:])

    def write_csv(self, path: Path, embedding: str = "roots") -> None:
        arr = self.strand_array(embedding)
        ensure_parent(path)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            header = ["t"]
            for j in range(arr.shape[1]):
                header += [f"re{j}", f"im{j}"]
            writer.writerow(header)
            for t, row in zip(self.ts, arr):
                line = [repr(float(t))]
                for z in row:
                    line += [repr(float(z.real)), repr(float(z.imag))]
                writer.writerow(line)

    def summary(self) -> dict:
        return {
            "start_label": self.start_label,
            "end_label": self.end_label,
            "samples": len(self.ts),
            "braid_roots": self.braid_roots.format(),
            "braid_critical_points": self.braid_crit.format(),
        }


def braid_from_path(pp: PolyPath, embedding: str = "roots") -> BraidWord:
    return read_braid(pp.strand_array(embedding), pp.crossing_sign)


class PathLifter:
    """Predictor-corrector continuation of critical points over a sampled V_n path."""

    def __init__(self, fiber: LabeledFiber, cfg: Optional[RunConfig] = None) -> None:
        self.fiber = fiber
        self.cfg = cfg or RunConfig()

    def lift(self, vpath: SampledPath, start: int, end_fiber: Optional[LabeledFiber] = None) -> PolyPath:
        """Lift from label `start`; the end is located in `end_fiber` (default: the start fiber)."""
        cfg = self.cfg
        p0 = self.fiber.points[start]
        v0 = np.asarray(vpath.start, dtype=complex)
        scale = 1.0 + float(np.max(np.abs(v0)))
        if set_distance(p0.critical_values, v0) > cfg.fiber_match * scale:
            raise EndpointUnmatched(f"path does not start over label {start}")
        order = matching_order(p0.critical_values, v0)
        c = np.asarray([p0.critical_points[k] for k in order], dtype=complex)
        roots = np.asarray(p0.roots, dtype=complex)

        h_max = min(vpath.max_gap(), 1.0 / max(cfg.samples, 1))
        h = h_max
        t = 0.0
        ts = [0.0]
        polys = [MonicPoly(tuple(c), tuple(roots))]
        c_prev, h_prev = None, None
        easy = 0
        rejected = 0
        while t < 1.0:
            t_new = min(t + h, 1.0)
            step = t_new - t
            guess = c if c_prev is None else c + (c - c_prev) * (step / h_prev)
            accepted = self._step(guess, vpath.at(t_new), c, roots)
            if accepted is None:
                rejected += 1
                h = step / 2
                easy = 0
                if h < cfg.h_min:
                    raise PathTrackingFailure(
                        f"step size underflow at t={t:.6f} lifting from label {start}"
                    )
                log.debug("lift from %d: halving step to %.3g at t=%.6f", start, h, t)
                continue
            c_new, roots_new, iters = accepted
            c_prev, h_prev = c, step
            c, roots, t = c_new, roots_new, t_new
            ts.append(t)
            polys.append(MonicPoly(tuple(c), tuple(roots)))
            easy = easy + 1 if iters <= 3 else 0
            if easy >= 4:
                h, easy = min(2 * step, h_max), 0
            else:
                h = min(step, h_max) if step > 0 else h_max

        try:
            end = (self.fiber if end_fiber is None else end_fiber).locate(tuple(c), tol=cfg.fiber_match)
        except KeyError as exc:
            raise EndpointUnmatched(f"lift from {start} ends off the fiber: {exc}") from exc
        log.debug("lift %d -> %d in %d samples (%d rejected)", start, end, len(ts), rejected)
        ts[-1] = 1.0
        return PolyPath(tuple(ts), tuple(polys), start, end, cfg.crossing_sign, rejected)

    def _step(self, guess: np.ndarray, v: np.ndarray, c: np.ndarray, roots: np.ndarray):
        cfg = self.cfg
        c_new, ok, iters = newton_polish(guess, v, residual=cfg.newton_residual, max_iter=8)
        if not ok:
            return None
        crit_strands = np.concatenate([[0j], c])
        if np.max(np.abs(c_new - c)) > 0.1 * _min_separation(crit_strands):
            return None
        try:
            new_roots = all_roots(MonicPoly(tuple(c_new)), seed_roots=roots[1:], residual=cfg.root_residual)
        except NoConvergence:
            return None
        order = matching_order(new_roots[1:], roots[1:])
        new_roots = np.concatenate([[0j], new_roots[1:][order]])
        if np.max(np.abs(new_roots - roots)) > 0.1 * _min_separation(roots):
            return None
        if _min_separation(new_roots) <= cfg.tau_sep or _min_separation(np.concatenate([[0j], c_new])) <= cfg.tau_sep:
            return None
        return c_new, new_roots, iters


def _min_separation(z: np.ndarray) -> float:
    z = np.asarray(z, dtype=complex)
    if len(z) < 2:
        return float("inf")
    d = np.abs(np.subtract.outer(z, z))
    d[np.eye(len(z), dtype=bool)] = np.inf
    return float(d.min())


def lift_path(
    vpath: SampledPath,
    start: int,
    fiber: LabeledFiber,
    cfg: Optional[RunConfig] = None,
    end_fiber: Optional[LabeledFiber] = None,
) -> PolyPath:
    return PathLifter(fiber, cfg).lift(vpath, start, end_fiber)


def check_argument_monotone(vpath: SampledPath, tol: float = 1e-12) -> Tuple[str, ...]:
    """Per-strand sign of d arg(v_i)/dt from consecutive samples."""
    arr = vpath.array()
    verdicts = []
    for j in range(arr.shape[1]):
        col = arr[:, j]
        if np.any(np.abs(col) == 0):
            verdicts.append(FAILS)
            continue
        steps = np.angle(col[1:] / col[:-1])
        if np.all(np.abs(steps) <= tol):
            verdicts.append(CONSTANT)
        elif np.all(steps > tol):
            verdicts.append(INCREASING)
        elif np.all(steps < -tol):
            verdicts.append(DECREASING)
        else:
            verdicts.append(FAILS)
    return tuple(verdicts)
