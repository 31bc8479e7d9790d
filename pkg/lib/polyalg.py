"""
Monic polynomials with zero constant term, stored by their critical points.

A point of Z_n is f(u) = n * integral_0^u prod(w - c_i) dw; roots, coefficients
and critical values are derived and cached. Coefficient arrays use numpy's
increasing-degree convention (``numpy.polynomial.polynomial``).
"""
import cmath
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import linear_sum_assignment

from .errors import NoConvergence
from .logutil import get_logger
from .utils import encode_points

log = get_logger("polyalg")

DEFAULT_TAU_SEP = 1e-8
ROOT_RESIDUAL = 1e-10


@dataclass(frozen=True)
class ConfigPoint:
    """A point of C_n (kind "C") or V_n (kind "V"); entries are an unordered set."""

    points: Tuple[complex, ...]
    kind: str = "V"
    tau_sep: float = DEFAULT_TAU_SEP

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def defect(self) -> Optional[str]:
        for a, b in combinations(range(len(self.points)), 2):
            if abs(self.points[a] - self.points[b]) <= self.tau_sep:
                return f"entries {a} and {b} collide"
        if self.kind == "V":
            for a, z in enumerate(self.points):
                if abs(z) <= self.tau_sep:
                    return f"entry {a} vanishes"
        return None

    @property
    def valid(self) -> bool:
        return self.defect is None

    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex)

    def set_distance(self, other: "ConfigPoint") -> float:
        return set_distance(self.points, other.points)

    def to_json(self) -> dict:
        data = {"kind": self.kind, "points": encode_points(self.points)}
        if self.defect:
            data["defect"] = self.defect
        return data


def set_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Largest displacement under the best bijection between two unordered tuples."""
    if len(a) != len(b):
        return float("inf")
    if not len(a):
        return 0.0
    cost = np.abs(np.subtract.outer(np.asarray(a, complex), np.asarray(b, complex)))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def matching_order(source: Sequence[complex], target: Sequence[complex]) -> List[int]:
    """order[k] = index in source matched to target[k] (minimal summed distance)."""
    cost = np.abs(np.subtract.outer(np.asarray(target, complex), np.asarray(source, complex)))
    rows, cols = linear_sum_assignment(cost)
    order = [0] * len(target)
    for r, c in zip(rows, cols):
        order[r] = int(c)
    return order


def aberth_roots(
    coeffs: np.ndarray,
    *,
    seed_roots: Optional[Sequence[complex]] = None,
    residual: float = ROOT_RESIDUAL,
    max_iter: int = 500,
    restarts: int = 3,
) -> np.ndarray:
    """Simultaneous Aberth-Ehrlich iteration; coefficients in increasing degree."""
    coeffs = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    m = len(coeffs) - 1
    if m <= 0:
        return np.zeros(0, dtype=complex)
    if m == 1:
        return np.array([-coeffs[0] / coeffs[1]])
    dcoeffs = P.polyder(coeffs)
    scale = np.abs(coeffs[:-1] / coeffs[-1])
    radius = max(float(np.max(scale ** (1.0 / (m - np.arange(m))))), 1e-3)

    starts: List[np.ndarray] = []
    if seed_roots is not None and len(seed_roots) == m:
        starts.append(np.asarray(seed_roots, dtype=complex))
    for attempt in range(restarts):
        angles = 2 * np.pi * np.arange(m) / m + 0.4 + 0.7 * attempt
        starts.append(radius * np.exp(1j * angles))
    starts.append(P.polyroots(coeffs).astype(complex))

    for attempt, z0 in enumerate(starts):
        z = _aberth_iterate(coeffs, dcoeffs, z0.copy(), max_iter)
        if z is not None and _residual_ok(coeffs, z, residual):
            return z
        log.debug("aberth attempt %d failed (degree=%d)", attempt, m)
    raise NoConvergence(f"root finder failed for degree {m} after {len(starts)} starts")


def _aberth_iterate(coeffs: np.ndarray, dcoeffs: np.ndarray, z: np.ndarray, max_iter: int) -> Optional[np.ndarray]:
    m = len(z)
    eye = np.eye(m, dtype=bool)
    for _ in range(max_iter):
        p = P.polyval(z, coeffs)
        dp = P.polyval(z, dcoeffs)
        if np.any(dp == 0):
            dp = np.where(dp == 0, 1e-300, dp)
        ratio = p / dp
        diff = np.subtract.outer(z, z)
        diff[eye] = 1.0
        if np.any(diff == 0):
            return None
        inv = 1.0 / diff
        inv[eye] = 0.0
        corr = ratio / (1.0 - ratio * inv.sum(axis=1))
        if not np.all(np.isfinite(corr)):
            return None
        z = z - corr
        if np.all(np.abs(corr) <= 1e-14 * (1.0 + np.abs(z))):
            break
    return z


def _residual_ok(coeffs: np.ndarray, z: np.ndarray, residual: float) -> bool:
    m = len(coeffs) - 1
    lead = abs(coeffs[-1])
    values = np.abs(P.polyval(z, coeffs)) / lead
    return bool(np.all(values <= residual * (1.0 + np.abs(z) ** m)))


@dataclass(frozen=True)
class MonicPoly:
    critical_points: Tuple[complex, ...]
    known_roots: Optional[Tuple[complex, ...]] = field(default=None, compare=False, repr=False)

    @property
    def degree(self) -> int:
        return len(self.critical_points) + 1

    @cached_property
    def coefficients(self) -> np.ndarray:
        n = self.degree
        deriv = n * P.polyfromroots(np.asarray(self.critical_points, dtype=complex))
        return P.polyint(deriv)

    @cached_property
    def roots(self) -> Tuple[complex, ...]:
        if self.known_roots is not None:
            return tuple(self.known_roots)
        return tuple(all_roots(self))

    @cached_property
    def critical_values(self) -> Tuple[complex, ...]:
        c = np.asarray(self.critical_points, dtype=complex)
        return tuple(complex(v) for v in P.polyval(c, self.coefficients))

    def nonzero_roots(self) -> Tuple[complex, ...]:
        return self.roots[1:]

    def evaluate(self, u):
        return P.polyval(u, self.coefficients)

    def critical_value_point(self, tau_sep: float = DEFAULT_TAU_SEP) -> ConfigPoint:
        return ConfigPoint(self.critical_values, "V", tau_sep)

    def in_Zn(self, tau_sep: float = DEFAULT_TAU_SEP) -> bool:
        return ConfigPoint(self.roots, "C", tau_sep).valid and self.critical_value_point(tau_sep).valid

    def rotated(self, k: int) -> "MonicPoly":
        omega = cmath.exp(2j * cmath.pi * k / self.degree)
        roots = None
        if self.known_roots is not None:
            roots = tuple(omega * z for z in self.known_roots)
        return MonicPoly(tuple(omega * c for c in self.critical_points), roots)

    def to_json(self) -> dict:
        return {
            "critical_points": encode_points(self.critical_points),
            "roots": encode_points(self.roots),
            "critical_values": encode_points(self.critical_values),
        }


def poly_from_critical_points(c: Iterable[complex]) -> MonicPoly:
    return MonicPoly(tuple(complex(z) for z in c))


def all_roots(
    p: MonicPoly,
    seed_roots: Optional[Sequence[complex]] = None,
    residual: float = ROOT_RESIDUAL,
) -> np.ndarray:
    """All n roots of p with the exact root 0 first."""
    coeffs = p.coefficients
    if p.degree == 1:
        return np.zeros(1, dtype=complex)
    seed = None if seed_roots is None else list(seed_roots)[-(p.degree - 1):]
    # f(u) = u * g(u); the nonzero roots are those of g
    rest = aberth_roots(coeffs[1:], seed_roots=seed, residual=residual)
    z = np.concatenate([[0j], rest])
    if not _residual_ok(coeffs, z, residual):
        raise NoConvergence("roots of f fail the residual check")
    return z


def poly_from_roots(nonzero_roots: Sequence[complex], residual: float = ROOT_RESIDUAL) -> MonicPoly:
    """The Z_n point with roots {0} and the given entries."""
    roots = np.concatenate([[0j], np.asarray(nonzero_roots, dtype=complex)])
    n = len(roots)
    coeffs = P.polyfromroots(roots)
    crit = aberth_roots(P.polyder(coeffs) / n, residual=residual)
    return MonicPoly(tuple(complex(c) for c in crit), tuple(complex(z) for z in roots))


def critical_values(p: MonicPoly, tau_sep: float = DEFAULT_TAU_SEP) -> ConfigPoint:
    return p.critical_value_point(tau_sep)


def theta(points: Sequence[complex], mode: str = "roots") -> Tuple[complex, ...]:
    """θ_n on an arbitrary tuple, read as nonzero roots or as critical points."""
    if mode == "roots":
        p = poly_from_roots(points)
    elif mode == "critical_points":
        p = poly_from_critical_points(points)
    else:
        raise ValueError(f"unknown theta mode {mode!r}")
    return p.critical_values


def critical_value_system(c: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Residual F_k = f_c(c_k) - v_k and Jacobian dF_k/dc_j for the critical-point system."""
    c = np.asarray(c, dtype=complex)
    m = len(c)
    n = m + 1
    f = P.polyint(n * P.polyfromroots(c))
    residual = P.polyval(c, f) - v
    jac = np.empty((m, m), dtype=complex)
    for j in range(m):
        partial = P.polyint(n * P.polyfromroots(np.delete(c, j)))
        jac[:, j] = -P.polyval(c, partial)
    return residual, jac


def newton_polish(
    c: np.ndarray,
    v: np.ndarray,
    *,
    residual: float = 1e-10,
    max_iter: int = 50,
    damping: bool = True,
) -> Tuple[np.ndarray, bool, int]:
    """Newton on the critical-point system; returns (c, converged, iterations)."""
    c = np.asarray(c, dtype=complex).copy()
    v = np.asarray(v, dtype=complex)
    scale = 1.0 + float(np.max(np.abs(v))) if len(v) else 1.0
    F, J = critical_value_system(c, v)
    norm = float(np.max(np.abs(F))) if len(F) else 0.0
    for it in range(1, max_iter + 1):
        if norm <= residual * scale:
            return c, True, it - 1
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return c, False, it
        lam = 1.0
        while True:
            trial = c + lam * step
            F_t, J_t = critical_value_system(trial, v)
            norm_t = float(np.max(np.abs(F_t)))
            if not damping or norm_t < norm or lam < 1e-4:
                break
            lam *= 0.5
        if not np.all(np.isfinite(trial)):
            return c, False, it
        c, F, J, norm = trial, F_t, J_t, norm_t
    return c, norm <= residual * scale, max_iter
