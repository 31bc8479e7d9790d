"""
Iterated preimages and images of θ_n.

Preimage trees apply the fiber solver breadth first to nonzero-root tuples.
Forward orbits are iterated on tuples rescaled to max modulus 1; θ_n is
homogeneous of degree n, so the true scale is carried as a logarithm.
"""
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import RunConfig
from .errors import EnumerationBudgetExceeded, FiberIncomplete
from .fiber import FiberSolver
from .jobs import parallel_map
from .logutil import get_logger
from .polyalg import ConfigPoint, set_distance, theta
from .utils import encode_points, ensure_parent

log = get_logger("dynamics")

ROOTS_MODE = "roots"
CRITICAL_POINTS_MODE = "critical_points"


@dataclass
class PreimageTree:
    root: ConfigPoint
    nodes: List[List[Tuple[complex, ...]]] = field(default_factory=list)
    complete: bool = True

    @property
    def depth(self) -> int:
        return len(self.nodes) - 1

    def level_points(self, j: int) -> List[complex]:
        """Every entry of every depth-j tuple (the set Z_x^j)."""
        return [z for node in self.nodes[j] for z in node]

    def scatter(self, first: int = 1) -> List[Tuple[int, complex]]:
        return [(j, z) for j in range(first, len(self.nodes)) for z in self.level_points(j)]

    def to_json(self) -> dict:
        return {
            "root": encode_points(self.root.points),
            "complete": self.complete,
            "levels": [encode_points(self.level_points(j)) for j in range(len(self.nodes))],
            "modulus_range": [list(r) for r in modulus_range(self)],
        }


def preimage_tree(x: ConfigPoint, depth: int, cfg: Optional[RunConfig] = None) -> PreimageTree:
    cfg = cfg or RunConfig(n=len(x.points) + 1)
    n = len(x.points) + 1
    branching = n ** (n - 1)
    total = sum(branching**j for j in range(depth + 1))
    if total > cfg.tree_nodes:
        raise EnumerationBudgetExceeded(f"a depth-{depth} tree has {total} nodes, above the limit {cfg.tree_nodes}")
    tree = PreimageTree(x, [[tuple(x.points)]])
    solver = FiberSolver(cfg)
    for j in range(1, depth + 1):
        frontier = tree.nodes[-1]
        try:
            fibers = parallel_map(
                lambda node: solver.solve(ConfigPoint(node, "V", cfg.tau_sep)), frontier, cfg.max_workers
            )
        except FiberIncomplete as exc:
            tree.complete = False
            exc.partial = tree
            log.warning("preimage tree stopped at depth %d: %s", j, exc)
            raise
        tree.nodes.append([p.nonzero_roots() for polys in fibers for p in polys])
        log.debug("preimage tree depth %d: %d nodes", j, len(tree.nodes[-1]))
    return tree


def modulus_range(tree: PreimageTree) -> List[Tuple[float, float]]:
    out = []
    for j in range(len(tree.nodes)):
        mods = [abs(z) for z in tree.level_points(j)]
        out.append((min(mods), max(mods)) if mods else (math.nan, math.nan))
    return out


@dataclass
class ForwardOrbit:
    start: Tuple[complex, ...]
    mode: str
    tau_zero: float
    iterates: List[Tuple[complex, ...]] = field(default_factory=list)
    log_scales: List[float] = field(default_factory=list)
    zero_counts: List[int] = field(default_factory=list)
    in_Vn: List[bool] = field(default_factory=list)

    def true_iterate(self, j: int) -> Tuple[complex, ...]:
        """Unnormalized iterate j; overflows to inf once the scale leaves float range."""
        scale = math.exp(self.log_scales[j]) if self.log_scales[j] < 700 else math.inf
        return tuple(z * scale for z in self.iterates[j])

    @property
    def limit(self) -> Optional[int]:
        return self.zero_counts[-1] if self.zero_counts else None

    def to_json(self) -> dict:
        return {
            "start": encode_points(self.start),
            "mode": self.mode,
            "tau_zero": self.tau_zero,
            "iterates": [encode_points(it) for it in self.iterates],
            "log_scales": self.log_scales,
            "zero_counts": self.zero_counts,
            "in_Vn": self.in_Vn,
        }


def count_zeros(values: Sequence[complex], tau_zero: float) -> int:
    """Count entries with |v| <= tau_zero * max|v|. The threshold is relative to the largest modulus."""
    mods = np.abs(np.asarray(values, dtype=complex))
    top = float(mods.max()) if len(mods) else 0.0
    if top == 0.0:
        return len(mods)
    return int(np.sum(mods <= tau_zero * top))


def _normalize(values: np.ndarray) -> Tuple[np.ndarray, float]:
    top = float(np.max(np.abs(values))) if len(values) else 0.0
    if top == 0.0 or not math.isfinite(top):
        return values, 0.0
    return values / top, math.log(top)


def forward_orbit(
    start: Sequence[complex],
    steps: int,
    mode: str = ROOTS_MODE,
    tau_zero: float = 1e-7,
    tau_sep: float = 1e-8,
) -> ForwardOrbit:
    n = len(start) + 1
    current, log_scale = _normalize(np.asarray(start, dtype=complex))
    orbit = ForwardOrbit(tuple(complex(z) for z in start), mode, tau_zero)

    def record(values: np.ndarray, scale: float) -> None:
        orbit.iterates.append(tuple(complex(z) for z in values))
        orbit.log_scales.append(scale)
        orbit.zero_counts.append(count_zeros(values, tau_zero))
        top = float(np.max(np.abs(values))) if len(values) else 0.0
        orbit.in_Vn.append(ConfigPoint(tuple(values), "V", tau_sep * max(top, 1e-300)).valid)

    record(current, log_scale)
    for _ in range(steps):
        values = np.asarray(theta(tuple(current), mode), dtype=complex)
        current, step_scale = _normalize(values)
        # θ(λy) = λ^n θ(y)
        log_scale = n * log_scale + step_scale
        record(current, log_scale)
    return orbit


def export_plot(points: Sequence[Tuple[int, complex]], fmt: str, path: Path, title: str = "") -> Path:
    """Scatter of (depth, point) pairs as CSV (depth, re, im) or SVG."""
    path = Path(path)
    ensure_parent(path)
    fmt = fmt.lower()
    if fmt == "csv":
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["depth", "re", "im"])
            for depth, z in points:
                writer.writerow([depth, repr(float(z.real)), repr(float(z.imag))])
        return path
    if fmt != "svg":
        raise ValueError(f"unknown plot format {fmt!r}")

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "braidadic"
    fig, ax = plt.subplots(figsize=(6, 6))
    if points:
        depths = np.asarray([d for d, _ in points])
        zs = np.asarray([z for _, z in points], dtype=complex)
        ax.scatter(zs.real, zs.imag, c=depths, s=2, cmap="viridis")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    if title:
        ax.set_title(title)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def rotation_defect(points: Sequence[complex], angle: float) -> float:
    """Largest displacement between a point set and its rotation (set matching)."""
    pts = np.asarray(points, dtype=complex)
    return set_distance(pts, pts * np.exp(1j * angle))


def orbit_summary(orbit: ForwardOrbit) -> Dict[str, object]:
    return {
        "steps": len(orbit.iterates) - 1,
        "zero_counts": orbit.zero_counts,
        "limit": orbit.limit,
        "left_Vn_at": next((j for j, ok in enumerate(orbit.in_Vn) if not ok), None),
        "tau_zero": orbit.tau_zero,
    }
