import sys
from dataclasses import dataclass, replace
from functools import wraps
from pathlib import Path
from typing import Any, Optional, Sequence

import click

from lib.action import (
    PHI,
    PSI,
    AdicPrefix,
    action_kind,
    image_order,
    kernel_membership,
    orbit_partition,
    psi_apply,
    rho_level,
)
from lib.braids import BraidWord
from lib.cache import TableCache
from lib.config import EMBEDDINGS, ConfigStore, RunConfig, parse_base
from lib.dynamics import (
    CRITICAL_POINTS_MODE,
    ROOTS_MODE,
    export_plot,
    forward_orbit,
    orbit_summary,
    preimage_tree,
)
from lib.errors import ComputationError, ConfigError
from lib.invariants import BASE_INVARIANTS, conjugacy_sequence, distinguish, invariant_stream, lift_sequence, stream_to_json
from lib.lift import lift_path, project_to_V, word_loop
from lib.logutil import setup_app_logging
from lib.polyalg import ConfigPoint
from lib.realalg import (
    TheoremWord,
    beta_loop,
    certify_lift_loop,
    certify_theorem_word,
    check_theorem_condition,
    expand_theorem_word,
    homogeneity_obstruction,
    table_lift,
)
from lib.tables import SOURCES, TableService
from lib.utils import dump_json, write_json
from lib.verify import format_table, obstruction_braid, run_checks

BASE_DIR = Path(__file__).resolve().parent


def _resolve_app_path(path_str: str) -> Path:
    """Resolve config paths relative to the app root so the caller's cwd does not matter."""
    p = Path(path_str)
    return p.resolve() if p.is_absolute() else (BASE_DIR / p).resolve()


APP_CONFIG_PATH = BASE_DIR / "config" / "app.yml"


@dataclass
class AppContext:
    cfg: RunConfig

    def configure(self, **overrides: Any) -> RunConfig:
        base = overrides.pop("base", None)
        if base:
            overrides["base"] = parse_base(list(base))
        elif overrides.get("n") is not None and overrides["n"] != self.cfg.n:
            # the YAML base belongs to the YAML n
            return replace(self.cfg, base=None).with_overrides(**overrides)
        return self.cfg.with_overrides(**overrides)

    def service(self, cfg: RunConfig) -> TableService:
        return TableService(cfg, TableCache(_resolve_app_path(cfg.cache_dir)), _resolve_app_path(cfg.reference_dir))


def handles_errors(f):
    """ConfigError -> usage error (exit 2); ComputationError -> JSON on stderr, exit 1."""

    @wraps(f)
    def decorated(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ConfigError as exc:
            raise click.UsageError(f"{type(exc).__name__}: {exc}") from exc
        except ComputationError as exc:
            click.echo(dump_json(exc.to_dict()), err=True)
            sys.exit(1)

    return decorated


def run_options(f):
    """Flags shared by every computing command; unset flags keep the app.yml values."""
    options = [
        click.option("--n", "n", type=int, default=None, help="Number of strands."),
        click.option("--epsilon", type=float, default=None, help="Angle of the n=2 base point."),
        click.option("--base", multiple=True, help="Base point entry as a complex literal; repeat n times."),
        click.option("--samples", type=int, default=None, help="Samples per loop."),
        click.option("--seed", type=int, default=None),
        click.option("--workers", "max_workers", type=int, default=None),
        click.option("--crossing-sign", type=click.Choice(["1", "-1"]), default=None),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _run_cfg(app: AppContext, kwargs: dict) -> RunConfig:
    keys = ("n", "epsilon", "base", "samples", "seed", "max_workers", "crossing_sign", "embedding")
    overrides = {k: kwargs.pop(k, None) for k in keys}
    if overrides["crossing_sign"] is not None:
        overrides["crossing_sign"] = int(overrides["crossing_sign"])
    return app.configure(**overrides)


def emit(data: Any, out: Optional[str]) -> None:
    if out:
        write_json(Path(out), data)
        click.echo(f"wrote {out}", err=True)
    else:
        click.echo(dump_json(data))


def _word(text: str, n: int) -> BraidWord:
    return BraidWord.parse(text, n)


def _digits(text: str) -> tuple:
    try:
        return tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"cannot parse digits {text!r}") from exc


out_option = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write JSON here instead of stdout.")
embedding_option = click.option("--embedding", type=click.Choice(EMBEDDINGS), default=None)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="Alternative app.yml.")
@click.option("-v", "--verbose", is_flag=True, help="DEBUG logging on stderr.")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], verbose: bool) -> None:
    """Braid group actions on n-adic integers by lifting loops through θ_n."""
    store = ConfigStore(Path(config_path) if config_path else APP_CONFIG_PATH)
    try:
        cfg = store.load_run_config()
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc
    setup_app_logging(
        debug_log_file=str(_resolve_app_path(cfg.debug_log_file)) if cfg.debug_log_file else None,
        verbose=verbose,
    )
    ctx.obj = AppContext(cfg)


@cli.command()
@run_options
@out_option
@click.pass_obj
@handles_errors
def fiber(app: AppContext, out: Optional[str], **kwargs) -> None:
    """The n^n labeled polynomials over the base point."""
    cfg = _run_cfg(app, kwargs)
    emit(app.service(cfg).fiber().to_json(), out)


@cli.command()
@run_options
@embedding_option
@click.option("--word", required=True, help='Braid word, e.g. "s1 s2^-1".')
@click.option("--label", type=int, required=True, help="Fiber label to start from.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Also write the strands as CSV.")
@out_option
@click.pass_obj
@handles_errors
def lift(app: AppContext, word: str, label: int, csv_path: Optional[str], out: Optional[str], **kwargs) -> None:
    """Lift the loop of a braid from one fiber label and read the lifted braid."""
    cfg = _run_cfg(app, kwargs)
    svc = app.service(cfg)
    fib = svc.fiber()
    if not 0 <= label < len(fib):
        raise ConfigError(f"label {label} outside 0..{len(fib) - 1}")
    loop = word_loop(_word(word, cfg.n), svc.base, cfg.samples)
    vpath = project_to_V(loop, fib.strand_of(label), cfg.tau_sep)
    pp = lift_path(vpath, label, fib, cfg)
    if csv_path:
        pp.write_csv(Path(csv_path), cfg.embedding)
    emit(dict(word=word, base_hash=svc.base_hash, **pp.summary()), out)


@cli.group()
def action() -> None:
    """Wreath tables, level permutations and the adic actions."""


@action.command("table")
@run_options
@embedding_option
@click.option("--source", type=click.Choice(SOURCES), default="auto", show_default=True)
@out_option
@click.pass_obj
@handles_errors
def action_table(app: AppContext, source: str, out: Optional[str], **kwargs) -> None:
    cfg = _run_cfg(app, kwargs)
    emit(app.service(cfg).tables(source=source).to_json(), out)


@action.command("rho")
@run_options
@embedding_option
@click.option("--word", required=True)
@click.option("--level", type=int, required=True)
@click.option("--source", type=click.Choice(SOURCES), default="auto", show_default=True)
@out_option
@click.pass_obj
@handles_errors
def action_rho(app: AppContext, word: str, level: int, source: str, out: Optional[str], **kwargs) -> None:
    """Permutation of the level-j points."""
    cfg = _run_cfg(app, kwargs)
    tables = app.service(cfg).tables(source=source)
    perm = rho_level(_word(word, cfg.n), level, tables, cfg.rho_points)
    emit(
        {
            "word": word,
            "level": level,
            "cycles": perm.format(),
            "images": list(perm.images),
            "identity": perm.is_identity(),
            "source": tables.source,
        },
        out,
    )


@action.command("act")
@run_options
@embedding_option
@click.option("--word", required=True)
@click.option("--digits", required=True, help='Digit prefix, e.g. "1,0".')
@click.option("--kind", default="psi", show_default=True, help="psi (H) or phi (N).")
@click.option("--source", type=click.Choice(SOURCES), default="auto", show_default=True)
@out_option
@click.pass_obj
@handles_errors
def action_act(app: AppContext, word: str, digits: str, kind: str, source: str, out: Optional[str], **kwargs) -> None:
    """Apply ψ_n or φ_n to a finite digit prefix."""
    cfg = _run_cfg(app, kwargs)
    kind = action_kind(kind)
    svc = app.service(cfg)
    w = _word(word, cfg.n)
    prefix = AdicPrefix(kind, cfg.n, _digits(digits))
    if kind == PSI:
        image = psi_apply(w, prefix, svc.tables(source=source))
    else:
        image = svc.tower().apply(w, prefix)
    emit({"word": word, "input": prefix.to_json(), "output": image.to_json()}, out)


@action.command("image")
@run_options
@embedding_option
@click.option("--level", type=int, required=True)
@click.option("--kind", default="psi", show_default=True, help="psi (H) or phi (N).")
@click.option("--word", default=None, help="Also test this word for membership in the level kernel.")
@click.option("--source", type=click.Choice(SOURCES), default="auto", show_default=True)
@out_option
@click.pass_obj
@handles_errors
def action_image(
    app: AppContext, level: int, kind: str, word: Optional[str], source: str, out: Optional[str], **kwargs
) -> None:
    """Order and orbits of the finite image at one level."""
    cfg = _run_cfg(app, kwargs)
    kind = action_kind(kind)
    svc = app.service(cfg)
    tables = svc.tables(source=source) if kind == PSI else None
    tower = svc.tower() if kind == PHI else None
    data = {
        "kind": kind,
        "level": level,
        "order": image_order(level, kind, tables, tower, cfg.image_order_limit),
        "orbits": [list(o) for o in orbit_partition(level, kind, tables, tower, cfg.image_order_limit)],
    }
    if word:
        data["kernel"] = {"word": word, "member": kernel_membership(_word(word, cfg.n), level, kind, tables, tower)}
    emit(data, out)


@cli.command()
@run_options
@embedding_option
@click.option("--word", required=True)
@click.option("--depth", type=int, default=1, show_default=True)
@click.option("--base-invariant", type=click.Choice(BASE_INVARIANTS), default="exponent_sum", show_default=True)
@click.option("--compare", default=None, help="Second braid: report the first term separating the two.")
@click.option("--source", type=click.Choice(SOURCES), default="auto", show_default=True)
@out_option
@click.pass_obj
@handles_errors
def invariants(
    app: AppContext,
    word: str,
    depth: int,
    base_invariant: str,
    compare: Optional[str],
    source: str,
    out: Optional[str],
    **kwargs,
) -> None:
    """Lift sequence, conjugacy cycles and an invariant stream of a braid."""
    cfg = _run_cfg(app, kwargs)
    tables = app.service(cfg).tables(source=source)
    w = _word(word, cfg.n)
    data = {
        "sequence": lift_sequence(w, depth, tables, cfg.rho_points).to_json(),
        "conjugacy": [c.to_json() for c in conjugacy_sequence(w, depth, tables, cfg.rho_points)],
        "stream": {
            "base_invariant": base_invariant,
            "values": stream_to_json(invariant_stream(w, depth, base_invariant, tables, cfg.rho_points)),
        },
    }
    if compare:
        data["compare"] = dict(
            word=compare,
            **distinguish(w, _word(compare, cfg.n), depth, tables, limit=cfg.rho_points).to_json(),
        )
    emit(data, out)


@cli.group()
def dynamics() -> None:
    """Iterated preimages and forward images of θ_n."""


def _v_point(points: Sequence[str], cfg: RunConfig) -> ConfigPoint:
    if len(points) != cfg.n - 1:
        raise ConfigError(f"a V_{cfg.n} point has {cfg.n - 1} entries, got {len(points)}")
    v = ConfigPoint(parse_base(list(points)), "V", cfg.tau_sep)
    if not v.valid:
        raise ConfigError(f"not a V_{cfg.n} point: {v.defect}")
    return v


@dynamics.command("tree")
@run_options
@click.option("--point", "points", multiple=True, required=True, help="Entry of the V_n point; repeat n-1 times.")
@click.option("--depth", type=int, required=True)
@click.option("--plot", type=click.Path(dir_okay=False), default=None, help="Scatter of all depths >= 1.")
@click.option("--format", "fmt", type=click.Choice(["csv", "svg"]), default="csv", show_default=True)
@out_option
@click.pass_obj
@handles_errors
def dynamics_tree(
    app: AppContext, points: Sequence[str], depth: int, plot: Optional[str], fmt: str, out: Optional[str], **kwargs
) -> None:
    cfg = _run_cfg(app, kwargs)
    tree = preimage_tree(_v_point(points, cfg), depth, cfg)
    if plot:
        export_plot(tree.scatter(), fmt, Path(plot), title=f"n={cfg.n}, depth {depth}")
    emit(tree.to_json(), out)


@dynamics.command("orbit")
@run_options
@click.option("--point", "points", multiple=True, required=True)
@click.option("--steps", type=int, required=True)
@click.option("--mode", type=click.Choice([ROOTS_MODE, CRITICAL_POINTS_MODE]), default=ROOTS_MODE, show_default=True)
@out_option
@click.pass_obj
@handles_errors
def dynamics_orbit(app: AppContext, points: Sequence[str], steps: int, mode: str, out: Optional[str], **kwargs) -> None:
    cfg = _run_cfg(app, kwargs)
    orbit = forward_orbit(_v_point(points, cfg).points, steps, mode, cfg.tau_zero, cfg.tau_sep)
    emit({"summary": orbit_summary(orbit), "orbit": orbit.to_json()}, out)


@cli.group()
def realalg() -> None:
    """Theorem words, certified loops and the homogeneity obstruction (n = 3)."""


@realalg.command("check")
@click.option("--epsilon", "sign", type=click.Choice(["1", "-1"]), required=True)
@click.option("--indices", required=True, help='Indices in 1..5, e.g. "5,5,1,5,5,1,2".')
@out_option
@handles_errors
def realalg_check(sign: str, indices: str, out: Optional[str]) -> None:
    tw = TheoremWord.parse(int(sign), indices)
    emit(
        {
            "word": tw.to_json(),
            "braid": expand_theorem_word(tw).format(),
            "condition": check_theorem_condition(tw).to_json(),
        },
        out,
    )


def _n3_service(app: AppContext, kwargs: dict) -> TableService:
    kwargs.update(n=3, base=())
    cfg = replace(_run_cfg(app, kwargs), base=None).validate()
    return app.service(cfg)


@realalg.command("certify")
@run_options
@click.option("--loop", "loop_index", type=int, default=None, help="Certify one loop β_i (1..5).")
@click.option("--power", type=int, default=None, help="Override the loop power.")
@click.option("--start", type=int, default=1, show_default=True, help="Start label for --loop.")
@click.option("--epsilon-sign", type=click.Choice(["1", "-1"]), default=None, help="Certify a theorem word instead.")
@click.option("--indices", default=None)
@click.option("--from-tables", is_flag=True, help="Also derive the loop braid from the wreath tables.")
@out_option
@click.pass_obj
@handles_errors
def realalg_certify(
    app: AppContext,
    loop_index: Optional[int],
    power: Optional[int],
    start: int,
    epsilon_sign: Optional[str],
    indices: Optional[str],
    from_tables: bool,
    out: Optional[str],
    **kwargs,
) -> None:
    """Lift loops with argument-monotone critical values and report the certificate."""
    if (loop_index is None) == (indices is None):
        raise ConfigError("give exactly one of --loop or --indices")
    svc = _n3_service(app, kwargs)
    fib = svc.fiber()
    if loop_index is not None:
        bl = beta_loop(loop_index, power=power)
        data = {"loop": bl.to_json(), "certificate": certify_lift_loop(bl, fib, svc.cfg, start).to_json()}
        if from_tables:
            data["table_lift"] = table_lift(loop_index, svc.tables(source="auto"), start).to_json()
    else:
        tw = TheoremWord.parse(int(epsilon_sign or "1"), indices)
        data = {"certificate": certify_theorem_word(tw, fib, svc.cfg).to_json()}
    emit(data, out)


@realalg.command("obstruct")
@click.option("--word", default=None, help="Braid on 3 strands; defaults to the squared theorem-word example.")
@out_option
@handles_errors
def realalg_obstruct(word: Optional[str], out: Optional[str]) -> None:
    w = _word(word, 3) if word else obstruction_braid()
    emit(dict(word=w.format(), **homogeneity_obstruction(w).to_json()), out)


@cli.command("verify-paper")
@click.option("--quick", is_flag=True, help="Skip checks that solve or lift over the n=3 fiber.")
@out_option
@click.pass_obj
def verify(app: AppContext, quick: bool, out: Optional[str]) -> None:
    """Replay the golden checks; exit 1 when any fails."""
    cfg = app.cfg
    results = run_checks(
        cfg,
        TableCache(_resolve_app_path(cfg.cache_dir)),
        _resolve_app_path(cfg.reference_dir),
        quick=quick,
    )
    click.echo(format_table(results))
    if out:
        write_json(Path(out), [r.to_json() for r in results])
    if not all(r.passed for r in results):
        sys.exit(1)


cli.add_command(verify, "verify")


if __name__ == "__main__":
    cli()
