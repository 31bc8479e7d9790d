"""
Golden checks replayed by `verify`.

Each check returns CheckResult(name, passed, detail). Checks marked numeric
solve the n = 3 fiber or lift loops over it and are skipped in quick mode.
"""
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

from .action import PSI, image_order, orbit_partition, rho_level
from .braids import BraidWord, Perm, braids_equal, exponent_sum, free_reduce
from .cache import TableCache
from .config import RunConfig
from .dynamics import modulus_range, preimage_tree
from .errors import BraidAdicError
from .logutil import get_logger
from .polyalg import ConfigPoint, set_distance
from .realalg import (
    LOOP_POWERS,
    TheoremWord,
    beta_loop,
    certify_lift_loop,
    expand_theorem_word,
    homogeneity_obstruction,
    table_lift,
    w_word,
)
from .reference import load_reference, n2_fiber_roots
from .tables import TableService

log = get_logger("verify")

S1_LEVEL2_CYCLES = ((0, 1, 6, 7, 8, 9, 14, 15), (2, 3, 4, 5, 10, 11, 12, 13))
SIGMA1_12_CYCLES = tuple((i, i + 8) for i in range(8))
BETA_EXAMPLE = "s1^12 s2^12 s1^-12 s2^-12"
S_WORD = "s2^6 s1^6 s2^-6 s1^-6"
T_WORD = "s1^6 s2^6 s1^-6 s2^-6"
BETA_PATTERN = {2: "S", 5: "T", 8: "T", 11: "T", 14: "S", 17: "T", 20: "T", 23: "T", 26: "S"}
OBSTRUCTION_INDICES = (5, 5, 1, 5, 5, 1, 2)
OBSTRUCTION_CONWAY_DEGREE = 30
OBSTRUCTION_BOUND = 38


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def __post_init__(self) -> None:
        # numeric checks hand in numpy booleans
        object.__setattr__(self, "passed", bool(self.passed))

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _cycles(size: int, cycles) -> Perm:
    return Perm.from_cycles(size, cycles)


def obstruction_braid() -> BraidWord:
    """The fixed non-homogeneous example, spelled out from its nested powers."""
    inner = BraidWord.parse("s1^-1 s2^-2 s1^-1 s2 s1^-1 s2^-2 s1^-1", 3)
    return (inner.power(2) * BraidWord.parse("s1^-2", 3)).power(2)


class Verifier:
    def __init__(
        self,
        cfg: RunConfig,
        cache: Optional[TableCache] = None,
        reference_dir=None,
        quick: bool = False,
    ) -> None:
        self.quick = quick
        self.reference_dir = reference_dir
        self.n2 = TableService(replace(cfg, n=2, base=None).validate(), cache, reference_dir)
        self.n3 = TableService(replace(cfg, n=3, base=None).validate(), cache, reference_dir)

    def checks(self) -> List[Tuple[str, bool, Callable[[], List[CheckResult]]]]:
        """(group, numeric, runner) in acceptance order."""
        return [
            ("n2-fiber", False, self.n2_fiber),
            ("n2-tables", False, self.n2_tables),
            ("n3-fiber", True, self.n3_fiber),
            ("n3-tables", True, self.n3_tables),
            ("beta-example", False, self.beta_example),
            ("theorem-loops", False, self.theorem_loops_from_tables),
            ("theorem-loops-lifted", True, self.theorem_loops_lifted),
            ("obstruction", False, self.obstruction),
            ("properties", False, self.properties),
        ]

    def run(self) -> List[CheckResult]:
        results: List[CheckResult] = []
        for group, numeric, runner in self.checks():
            if numeric and self.quick:
                results.append(CheckResult(group, True, "skipped (quick)"))
                continue
            try:
                results.extend(runner())
            except BraidAdicError as exc:
                log.warning("check %s raised %s", group, exc)
                results.append(CheckResult(group, False, f"{type(exc).__name__}: {exc}"))
        return results

    def n2_fiber(self) -> List[CheckResult]:
        fiber = self.n2.fiber()
        expected = n2_fiber_roots(self.n2.cfg.epsilon)
        dev = max(set_distance(p.nonzero_roots(), ref) for p, ref in zip(fiber.points, expected))
        return [CheckResult("n2-fiber", dev <= 1e-8, f"max deviation {dev:.3g}")]

    def n2_tables(self) -> List[CheckResult]:
        tables = self.n2.tables(source="computed")
        s1 = BraidWord.generator(2, 1)
        level1 = tables.generator(1).perm
        level2 = rho_level(s1, 2, tables)
        power12 = rho_level(s1.power(12), 2, tables)
        return [
            CheckResult("n2-level1", level1 == _cycles(4, [(0, 1, 2, 3)]), level1.format()),
            CheckResult("n2-level2-s1", level2 == _cycles(16, S1_LEVEL2_CYCLES), level2.format()),
            CheckResult("n2-level2-s1^12", power12 == _cycles(16, SIGMA1_12_CYCLES), power12.format()),
        ]

    def n3_fiber(self) -> List[CheckResult]:
        fiber = self.n3.fiber()
        ref = load_reference(3, self.reference_dir)
        dev = max(set_distance(p.nonzero_roots(), r) for p, r in zip(fiber.points, ref.fiber))
        return [CheckResult("n3-fiber", dev <= 1e-4, f"{len(fiber)} points, max deviation {dev:.3g}")]

    def n3_tables(self) -> List[CheckResult]:
        out = []
        for embedding in ("roots", "critical_points"):
            computed = self.n3.tables(embedding, source="computed")
            published = self.n3.tables(embedding, source="published")
            for i in (1, 2):
                a, b = computed.generator(i), published.generator(i)
                perm_ok = a.perm == b.perm
                bad = [k for k in range(a.size) if not braids_equal(a.lifted[k], b.lifted[k])]
                out.append(
                    CheckResult(
                        f"n3-{embedding}-s{i}",
                        perm_ok and not bad,
                        f"perm {'equal' if perm_ok else a.perm.format()}, lifted mismatches {bad}",
                    )
                )
        return out

    def beta_example(self) -> List[CheckResult]:
        tables = self.n3.tables(source="published")
        beta = BraidWord.parse(BETA_EXAMPLE, 3)
        h = tables.evaluate(beta)
        words = {"S": BraidWord.parse(S_WORD, 3), "T": BraidWord.parse(T_WORD, 3)}
        e = BraidWord.identity(3)
        bad = []
        for k, lifted in enumerate(h.lifted):
            expected = words[BETA_PATTERN[k]] if k in BETA_PATTERN else e
            if not braids_equal(lifted, expected):
                bad.append(k)
        level1 = rho_level(beta, 1, tables)
        level2 = rho_level(beta, 2, tables)
        point = 27 * 2 + 2
        return [
            CheckResult("beta-pattern", not bad, f"mismatched entries {bad}"),
            CheckResult("beta-level1-identity", level1.is_identity(), level1.format()),
            CheckResult("beta-level2-56", level2(point) == 380, f"56 -> {level2(point)}"),
        ]

    def theorem_loops_from_tables(self) -> List[CheckResult]:
        tables = self.n3.tables(source="published")
        out = []
        for i in sorted(LOOP_POWERS):
            tl = table_lift(i, tables)
            ok = tl.power == LOOP_POWERS[i] and braids_equal(tl.braid, w_word(i))
            out.append(CheckResult(f"table-lift-{i}", ok, f"power {tl.power}, braid {tl.braid.format()}"))
        return out

    def theorem_loops_lifted(self) -> List[CheckResult]:
        fiber = self.n3.fiber()
        out = []
        for i in sorted(LOOP_POWERS):
            cert = certify_lift_loop(beta_loop(i), fiber, self.n3.cfg)
            ok = cert.certified and bool(cert.matches_expected)
            braid = cert.braid.format() if cert.braid is not None else None
            out.append(CheckResult(f"lifted-loop-{i}", ok, f"braid {braid}; {'; '.join(cert.reasons)}"))
        return out

    def obstruction(self) -> List[CheckResult]:
        w = obstruction_braid()
        expanded = free_reduce(expand_theorem_word(TheoremWord(-1, OBSTRUCTION_INDICES)).power(2))
        report = homogeneity_obstruction(w)
        lks = sorted(report.linking.values())
        return [
            CheckResult("obstruction-expansion", braids_equal(w, expanded), expanded.format()),
            CheckResult("obstruction-exponent-sum", exponent_sum(w) == -32, str(exponent_sum(w))),
            CheckResult("obstruction-linking", lks == [-10, -8, 2], f"{lks}, sum {sum(lks)}"),
            CheckResult(
                "obstruction-degree",
                report.conway_degree == OBSTRUCTION_CONWAY_DEGREE
                and report.bound == OBSTRUCTION_BOUND
                and report.violated,
                f"degree {report.conway_degree} < bound {report.bound}",
            ),
        ]

    def properties(self) -> List[CheckResult]:
        tables = self.n2.tables(source="computed")
        orbits = orbit_partition(2, PSI, tables)
        orders = (image_order(1, PSI, tables), image_order(2, PSI, tables))
        tree = preimage_tree(ConfigPoint((1 + 0j,), "V"), 10, self.n2.cfg)
        lo, hi = modulus_range(tree)[-1]
        drift = max(abs(4 - lo), abs(4 - hi))
        return [
            CheckResult(
                "psi2-level2-orbits",
                sorted(len(o) for o in orbits) == [8, 8],
                str([len(o) for o in orbits]),
            ),
            CheckResult("psi2-image-orders", orders == (4, 8), str(orders)),
            CheckResult("n2-modulus-depth10", drift <= 0.01, f"moduli in [{lo:.5f}, {hi:.5f}]"),
        ]


def run_checks(
    cfg: RunConfig,
    cache: Optional[TableCache] = None,
    reference_dir=None,
    quick: bool = False,
) -> List[CheckResult]:
    return Verifier(cfg, cache, reference_dir, quick).run()


def format_table(results: List[CheckResult]) -> str:
    width = max((len(r.name) for r in results), default=4)
    lines = [f"{'check'.ljust(width)}  result  detail"]
    for r in results:
        lines.append(f"{r.name.ljust(width)}  {'PASS' if r.passed else 'FAIL':6}  {r.detail}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines)
