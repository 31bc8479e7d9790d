"""
Fibers of θ_n: the n^(n-1) polynomials over a V_n point, and the labeled n^n
points over a base configuration in C_n.

Label convention: x_i (i = 1..n) is the set {z_k - z_i : k != i} of the base,
and the polynomials over x_i carry labels of residue i mod n. Strand s
(0-indexed) of the base therefore covers the residue class (s + 1) mod n.
"""
from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .braids import Perm
from .config import RunConfig
from .errors import FiberIncomplete, LeavesVn, NoConsistentMatching, NonGenericBase
from .jobs import parallel_map
from .logutil import get_logger
from .polyalg import ConfigPoint, MonicPoly, matching_order, newton_polish, set_distance
from .utils import content_hash, decode_points, encode_points

log = get_logger("fiber")


def lex_key(p: MonicPoly) -> Tuple[Tuple[float, float], ...]:
    cps = sorted(p.critical_points, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    return tuple((round(z.real, 9), round(z.imag, 9)) for z in cps)


def base_hash(base: Sequence[complex]) -> str:
    rounded = [[round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0] for z in map(complex, base)]
    return content_hash(rounded)[:16]


@dataclass(frozen=True)
class LabeledFiber:
    n: int
    base: ConfigPoint
    v_points: Tuple[ConfigPoint, ...]
    points: Tuple[MonicPoly, ...]
    provenance: Tuple[int, ...] = field(repr=False)

    @property
    def base_hash(self) -> str:
        return base_hash(self.base.points)

    def __len__(self) -> int:
        return len(self.points)

    def strand_of(self, label: int) -> int:
        """0-indexed base strand whose difference set this label covers."""
        return (label - 1) % self.n

    def labels_over(self, i: int) -> List[int]:
        """Labels covering x_i (1-indexed)."""
        return [label for label, cov in enumerate(self.provenance) if cov == i]

    def locate(self, crit_points: Sequence[complex], over: Optional[int] = None, tol: float = 1e-6) -> int:
        """Label whose critical-point set is nearest; raises KeyError beyond tolerance."""
        candidates = self.labels_over(over) if over is not None else range(len(self.points))
        best, best_dist = None, float("inf")
        for label in candidates:
            dist = set_distance(self.points[label].critical_points, crit_points)
            if dist < best_dist:
                best, best_dist = label, dist
        scale = 1.0 + max(abs(z) for z in crit_points) if len(crit_points) else 1.0
        if best is None or best_dist > tol * scale:
            raise KeyError(f"no fiber point within {tol:g} (nearest {best} at {best_dist:.3g})")
        return best

    def relabeled(self, relabel: Perm) -> "LabeledFiber":
        """relabel(a) is the new label of the point currently labeled a."""
        points: List[Optional[MonicPoly]] = [None] * len(self.points)
        prov = [0] * len(self.points)
        for a, b in enumerate(relabel.images):
            points[b] = self.points[a]
            prov[b] = self.provenance[a]
        return LabeledFiber(self.n, self.base, self.v_points, tuple(points), tuple(prov))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "base": encode_points(self.base.points),
            "base_hash": self.base_hash,
            "v_points": [encode_points(v.points) for v in self.v_points],
            "points": [
                dict(label=label, covers=self.provenance[label], **p.to_json())
                for label, p in enumerate(self.points)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LabeledFiber":
        base = ConfigPoint(decode_points(data["base"]), "C")
        v_points = tuple(ConfigPoint(decode_points(v), "V") for v in data["v_points"])
        points = tuple(
            MonicPoly(decode_points(p["critical_points"]), decode_points(p["roots"]))
            for p in data["points"]
        )
        prov = tuple(int(p["covers"]) for p in data["points"])
        return cls(int(data["n"]), base, v_points, points, prov)


def difference_points(base: Sequence[complex], tau_sep: float = 1e-8) -> Tuple[ConfigPoint, ...]:
    """x_i = (z_k - z_i for k != i), entries in increasing k."""
    out = []
    for i, zi in enumerate(base):
        out.append(ConfigPoint(tuple(zk - zi for k, zk in enumerate(base) if k != i), "V", tau_sep))
    return tuple(out)


def check_generic(base: Sequence[complex], tau_sep: float = 1e-8) -> None:
    reals = sorted(z.real for z in base)
    for a, b in zip(reals, reals[1:]):
        if b - a <= tau_sep:
            raise NonGenericBase(f"base points share a real part near {a:.6g}")


class FiberSolver:
    """Multi-start Newton on f_c(c_k) = v_k, closed under the e^(2πi/n) symmetry."""

    def __init__(self, cfg: Optional[RunConfig] = None) -> None:
        self.cfg = cfg or RunConfig()

    def solve(self, v: ConfigPoint, batch: int = 32) -> List[MonicPoly]:
        if not v.valid:
            raise LeavesVn(f"not a V_n point: {v.defect}")
        target = v.array()
        m = len(target)
        n = m + 1
        expected = n**m
        scale = 1.0 + float(np.max(np.abs(target)))
        radius = 3.0 * float(np.max(np.abs(target))) ** (1.0 / n)
        rng = np.random.default_rng(self.cfg.seed)
        orderings = list(permutations(range(m)))

        found: Dict[Tuple, MonicPoly] = {}
        attempts = 0
        while len(found) < expected and attempts < self.cfg.newton_starts:
            count = min(batch, self.cfg.newton_starts - attempts)
            radii = radius * np.sqrt(rng.random((count, m)))
            angles = 2 * np.pi * rng.random((count, m))
            starts = radii * np.exp(1j * angles)
            jobs = [
                (starts[k], orderings[(attempts + k) % len(orderings)])
                for k in range(count)
            ]
            results = parallel_map(lambda job: self._newton(job[0], target, job[1]), jobs, self.cfg.max_workers)
            attempts += count
            for c in results:
                if c is None:
                    continue
                for k in range(n):
                    p = MonicPoly(tuple(complex(z) for z in c)).rotated(k)
                    self._accept(p, target, scale, found)
                if len(found) >= expected:
                    break
        log.debug("solve_fiber: %d/%d points after %d starts", len(found), expected, attempts)
        if len(found) < expected:
            raise FiberIncomplete(len(found), expected, f"after {attempts} Newton starts")
        return sorted(found.values(), key=lex_key)[:expected]

    def _newton(self, start: np.ndarray, target: np.ndarray, ordering: Tuple[int, ...]) -> Optional[np.ndarray]:
        ordered = target[list(ordering)]
        c, ok, _ = newton_polish(start, ordered, residual=self.cfg.newton_residual)
        if not ok:
            return None
        # back to the caller's ordering of v
        restored = np.empty_like(c)
        for pos, idx in enumerate(ordering):
            restored[idx] = c[pos]
        return restored

    def _accept(self, p: MonicPoly, target: np.ndarray, scale: float, found: Dict[Tuple, MonicPoly]) -> None:
        vals = np.asarray(p.critical_values)
        if set_distance(vals, target) > 1e-8 * scale:
            return
        order = matching_order(p.critical_values, target)
        p = MonicPoly(tuple(p.critical_points[k] for k in order))
        try:
            if not p.in_Zn(self.cfg.tau_sep):
                return
        except Exception as exc:  # noqa: BLE001
            log.debug("rejecting candidate: %s", exc)
            return
        merge = max(1e3 * self.cfg.tau_sep, 1e-6) * scale
        for q in found.values():
            if np.max(np.abs(np.subtract(p.critical_points, q.critical_points))) <= merge:
                return
        found[lex_key(p)] = p


def solve_fiber(v: ConfigPoint, cfg: Optional[RunConfig] = None) -> List[MonicPoly]:
    return FiberSolver(cfg).solve(v)


def full_fiber(
    base: ConfigPoint,
    cfg: Optional[RunConfig] = None,
    reference: Optional[Sequence[Sequence[complex]]] = None,
) -> LabeledFiber:
    cfg = cfg or RunConfig()
    pts = base.points
    n = len(pts)
    check_generic(pts, cfg.tau_sep)
    if not base.valid:
        raise NonGenericBase(f"base is not a C_n point: {base.defect}")
    v_points = difference_points(pts, cfg.tau_sep)
    solver = FiberSolver(cfg)
    per_x = parallel_map(solver.solve, v_points, max(1, cfg.max_workers // 2))

    points: List[Optional[MonicPoly]] = [None] * n**n
    prov = [0] * n**n
    for i, polys in enumerate(per_x, start=1):
        residue = i % n
        for q, p in enumerate(polys):
            label = residue + n * q
            points[label] = p
            prov[label] = i
    fiber = LabeledFiber(n, ConfigPoint(tuple(pts), "C", cfg.tau_sep), v_points, tuple(points), tuple(prov))
    log.info("full_fiber: n=%d, %d points, base_hash=%s", n, len(points), fiber.base_hash)
    if reference is not None:
        relabel, deviation = match_to_reference(fiber, reference, cfg.reference_match)
        log.info("full_fiber: matched to reference, max deviation %.3g", deviation)
        fiber = fiber.relabeled(relabel)
    return fiber


def root_of_unity_orbit(p: MonicPoly) -> List[MonicPoly]:
    return [p.rotated(k) for k in range(p.degree)]


def _tuple_cost(a: Sequence[complex], b: Sequence[complex]) -> Tuple[float, float]:
    cost = np.abs(np.subtract.outer(np.asarray(a, complex), np.asarray(b, complex)))
    rows, cols = linear_sum_assignment(cost)
    matched = cost[rows, cols]
    return float(matched.sum()), float(matched.max()) if len(matched) else 0.0


def match_to_reference(
    fiber: LabeledFiber,
    reference: Sequence[Sequence[complex]],
    max_deviation: float = 1e-3,
) -> Tuple[Perm, float]:
    """Minimal-cost bijection between computed points and published nonzero-root tuples."""
    size = len(fiber.points)
    if len(reference) != size:
        raise NoConsistentMatching(f"reference has {len(reference)} points, fiber has {size}")
    total = np.zeros((size, size))
    worst = np.zeros((size, size))
    for a, p in enumerate(fiber.points):
        roots = p.nonzero_roots()
        for b, ref in enumerate(reference):
            total[a, b], worst[a, b] = _tuple_cost(roots, ref)
    rows, cols = linear_sum_assignment(total)
    images = [0] * size
    deviation = 0.0
    for a, b in zip(rows, cols):
        images[a] = int(b)
        deviation = max(deviation, worst[a, b])
        if a % fiber.n != b % fiber.n:
            raise NoConsistentMatching(f"label {a} matched to {b} across residue classes")
    if deviation > max_deviation:
        raise NoConsistentMatching(f"max deviation {deviation:.3g} exceeds {max_deviation:g}")
    return Perm(tuple(images)), deviation


@dataclass
class NegationReport:
    checked: int = 0
    partner_found: int = 0
    pair_found: int = 0
    pairs_checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.partner_found == self.checked and self.pair_found == self.pairs_checked

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "roots_checked": self.checked,
            "negated_root_partners": self.partner_found,
            "pairs_checked": self.pairs_checked,
            "negated_pair_points": self.pair_found,
            "failures": self.failures[:20],
        }


def negation_partners(root_tuples: Sequence[Sequence[complex]], tol: float = 1e-4) -> NegationReport:
    """
    Empirical check of the negation symmetry inside one fiber: for a point y and a
    root y_a, some other point y' has -y_a as a root; for n = 3, (-y_2, -y_2') is
    then also a point of the fiber.
    """
    report = NegationReport()
    tuples = [tuple(t) for t in root_tuples]

    def has_point(candidate: Sequence[complex]) -> bool:
        return any(set_distance(candidate, t) <= tol * (1 + max(abs(z) for z in t)) for t in tuples)

    for idx, y in enumerate(tuples):
        for a, ya in enumerate(y):
            report.checked += 1
            partners = [
                t for j, t in enumerate(tuples)
                if j != idx and min(abs(z + ya) for z in t) <= tol * (1 + abs(ya))
            ]
            if not partners:
                report.failures.append(f"point {idx}: no partner for -root {a}")
                continue
            report.partner_found += 1
            if len(y) != 2:
                continue
            other = y[1 - a]
            for t in partners:
                k = int(np.argmin([abs(z + ya) for z in t]))
                report.pairs_checked += 1
                if has_point((-other, -t[1 - k])):
                    report.pair_found += 1
                else:
                    report.failures.append(f"point {idx}: pair (-y, -y') missing for root {a}")
    return report


def fiber_over_point(v: ConfigPoint, cfg: Optional[RunConfig] = None) -> LabeledFiber:
    """The n^(n-1) points over a single V_n point, labeled lexicographically (every label covers it)."""
    polys = FiberSolver(cfg).solve(v)
    return LabeledFiber(len(v.points) + 1, v, (v,), tuple(polys), tuple(1 for _ in polys))
