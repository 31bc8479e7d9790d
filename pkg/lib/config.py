import cmath
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from threading import Lock
from typing import Dict, List, Optional, Tuple

from .errors import ConfigError
from .utils import decode_points, read_yaml

EMBEDDINGS = ("roots", "critical_points")


def default_base(n: int, epsilon: float = 0.8) -> Tuple[complex, ...]:
    """Base configurations used by the published tables; a staggered row otherwise."""
    if n == 2:
        half = 0.5 * cmath.exp(1j * epsilon)
        return (half, -half)
    if n == 3:
        return (0j, cmath.exp(1j * math.pi / 4), 2 + 0j)
    return tuple(complex(k, 0.25 * (k % 2)) for k in range(n))


@dataclass
class RunConfig:
    n: int = 3
    epsilon: float = 0.8
    base: Optional[Tuple[complex, ...]] = None
    embedding: str = "roots"
    samples: int = 100
    seed: int = 20240521
    max_workers: int = 4
    tau_sep: float = 1e-8
    tau_zero: float = 1e-7
    newton_residual: float = 1e-10
    root_residual: float = 1e-10
    fiber_match: float = 1e-6
    reference_match: float = 1e-3
    h_min: float = 1e-6
    newton_starts: int = 400
    phi_depth: Dict[int, int] = field(default_factory=lambda: {2: 3, 3: 2})
    rho_points: int = 10**6
    image_order_limit: int = 10**6
    tree_nodes: int = 10**6
    crossing_sign: int = 1
    cache_dir: str = "./data/cache"
    reference_dir: str = "./data/reference"
    debug_log_file: Optional[str] = None

    def base_points(self) -> Tuple[complex, ...]:
        if self.base is not None:
            return tuple(self.base)
        return default_base(self.n, self.epsilon)

    def max_phi_depth(self) -> int:
        return int(self.phi_depth.get(self.n, 1))

    def tolerances(self) -> Dict[str, float]:
        return {
            "tau_sep": self.tau_sep,
            "newton_residual": self.newton_residual,
            "root_residual": self.root_residual,
            "fiber_match": self.fiber_match,
            "h_min": self.h_min,
        }

    def validate(self) -> "RunConfig":
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")
        if self.embedding not in EMBEDDINGS:
            raise ConfigError(f"embedding must be one of {EMBEDDINGS}, got {self.embedding!r}")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")
        for name, value in self.tolerances().items():
            if not value > 0:
                raise ConfigError(f"tolerance {name} must be positive, got {value}")
        if self.tau_zero <= 0 or self.reference_match <= 0:
            raise ConfigError("tau_zero and reference_match must be positive")
        if self.crossing_sign not in (1, -1):
            raise ConfigError("crossing_sign must be 1 or -1")
        if self.base is not None and len(self.base) != self.n:
            raise ConfigError(f"base has {len(self.base)} points, expected {self.n}")
        return self

    def with_overrides(self, **overrides) -> "RunConfig":
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **clean).validate()


class ConfigStore:
    def __init__(self, app_config_path: Path) -> None:
        self.app_config_path = app_config_path
        self.lock = Lock()

    def load_run_config(self) -> RunConfig:
        with self.lock:
            raw = read_yaml(self.app_config_path)
        run = raw.get("run", {})
        tol = raw.get("tolerances", {})
        limits = raw.get("limits", {})
        lift = raw.get("lift", {})
        paths = raw.get("paths", {})
        base = run.get("base")
        phi_depth = limits.get("phi_depth", {2: 3, 3: 2})
        cfg = RunConfig(
            n=int(run.get("n", 3)),
            epsilon=float(run.get("epsilon", 0.8)),
            base=decode_points(base) if base else None,
            embedding=run.get("embedding", "roots"),
            samples=int(run.get("samples", 100)),
            seed=int(run.get("seed", 20240521)),
            max_workers=int(run.get("max_workers", 4)),
            tau_sep=float(tol.get("tau_sep", 1e-8)),
            tau_zero=float(tol.get("tau_zero", 1e-7)),
            newton_residual=float(tol.get("newton_residual", 1e-10)),
            root_residual=float(tol.get("root_residual", 1e-10)),
            fiber_match=float(tol.get("fiber_match", 1e-6)),
            reference_match=float(tol.get("reference_match", 1e-3)),
            h_min=float(tol.get("h_min", 1e-6)),
            newton_starts=int(limits.get("newton_starts", 400)),
            phi_depth={int(k): int(v) for k, v in phi_depth.items()},
            rho_points=int(limits.get("rho_points", 10**6)),
            image_order_limit=int(limits.get("image_order", 10**6)),
            tree_nodes=int(limits.get("tree_nodes", 10**6)),
            crossing_sign=int(lift.get("crossing_sign", 1)),
            cache_dir=paths.get("cache_dir", "./data/cache"),
            reference_dir=paths.get("reference_dir", "./data/reference"),
            debug_log_file=paths.get("debug_log_file") or None,
        )
        return cfg.validate()


def parse_base(values: List[str]) -> Tuple[complex, ...]:
    """CLI form: each point as a Python complex literal, e.g. '0', '0.7+0.7j', '2'."""
    try:
        return tuple(complex(v.replace(" ", "")) for v in values)
    except ValueError as exc:
        raise ConfigError(f"cannot parse base point: {exc}") from exc
