#!/usr/bin/env python3
"""CLI interface for handsoff.

Exit codes: 0 ok, 1 usage or input error, 2 initial state not reachable,
3 verification failure.
"""

import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import click
import numpy as np

from . import __version__
from .config import Settings, load_settings
from .core.signal import ControlSignal
from .core.system import LtiSystem
from .errors import ConfigError, HandsOffError, InfeasibleCandidateError, NotReachableError
from .io.checks import render_report, verify_control
from .io.plots import ControlPlotRenderer, PlotSeries
from .io.store import (
    RunManifest,
    input_hashes,
    load_system,
    read_control_csv,
    write_control_csv,
    write_controls_csv,
    write_json,
    write_manifest,
    write_value_csv,
)
from .oracle.double_integrator import DiInstance, analytic_handsoff, non_sparse_l1_control
from .pmp.certificate import find_certificate
from .solver.sparse import (
    SparseSolveResult,
    is_reachable,
    solve_l1,
    solve_max_handsoff,
    solve_reweighted_lp,
)
from .solver.transcription import transcribe
from .value_map.field import parse_grid_spec, sample_value_field
from .value_map.probes import convexity_probe

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_REACHABLE = 2
EXIT_VERIFY_FAILED = 3

_METHODS = ("handsoff", "l1", "reweighted")


class _HandsOffGroup(click.Group):
    """Group whose usage errors exit with 1; 2 is reserved for unreachable states."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as exc:
            exc.exit_code = EXIT_INPUT
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as exc:
            exc.exit_code = EXIT_INPUT
            raise


def _parse_xi(ctx: click.Context, param: click.Parameter, text: Optional[str]) -> Optional[np.ndarray]:
    if text is None:
        return None
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from None
    if not all(np.isfinite(values)):
        raise click.BadParameter("entries must be finite")
    return np.array(values)


def _positive(ctx: click.Context, param: click.Parameter, value):
    if value is not None and not value > 0:
        raise click.BadParameter(f"must be > 0, got {value}")
    return value


def _fail(message: str, code: int = EXIT_INPUT) -> None:
    click.echo(f"[ERROR] {message}", err=True)
    sys.exit(code)


def _settings(ctx: click.Context, **overrides) -> Settings:
    return ctx.obj["settings"].replace(**overrides)


def _check_dimension(system: LtiSystem, xi: np.ndarray) -> None:
    if xi.size != system.n:
        _fail(f"--xi has {xi.size} entries for an n = {system.n} system")


def _manifest(
    command: str,
    parameters: dict,
    settings: Settings,
    inputs: Sequence = (),
    outputs: Sequence[Path] = (),
) -> RunManifest:
    return RunManifest(
        command=command,
        parameters=parameters,
        settings=settings.as_dict(),
        version=__version__,
        inputs=input_hashes(inputs),
        outputs=sorted(p.name for p in outputs),
    )


def _norm_lines(label: str, u: ControlSignal, settings: Settings) -> str:
    norms = u.norm_report(settings.p, settings.zero_tol)
    return (
        f"  {label:<20} L0 {norms.l0:.6f}   L1 {norms.l1:.9f}   "
        f"Lp^p(p={norms.p:g}) {norms.lp:.6f}   max|u| {norms.linf:.6f}"
    )


@click.group(cls=_HandsOffGroup)
@click.version_option(version=__version__, prog_name="handsoff")
@click.option("-v", "--verbose", count=True, help="-v for INFO logs, -vv for DEBUG")
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Settings TOML file (default: ./handsoff.toml if present)",
)
@click.pass_context
def cli(ctx: click.Context, verbose: int, config_path: Optional[str]) -> None:
    """handsoff: maximum hands-off (sparsest) control of single-input LTI systems."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        settings = load_settings(Path(config_path) if config_path else None)
    except ConfigError as exc:
        _fail(str(exc))
    ctx.ensure_object(dict)
    ctx.obj["settings"] = settings


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


@cli.command("solve")
@click.option("--system", "system_path", type=click.Path(), required=True, help="System file (.json/.yaml)")
@click.option("--xi", callback=_parse_xi, required=True, help="Initial state, e.g. 1,-1")
@click.option("--horizon", type=float, required=True, callback=_positive, help="Horizon T > 0")
@click.option("--grid", type=click.IntRange(min=1), default=None, help="Number of intervals N [default: 500]")
@click.option("--method", type=click.Choice(_METHODS), default="handsoff", show_default=True)
@click.option("--p", "p", type=float, default=None, help="Lp exponent for reweighting and reports [default: 0.5]")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="handsoff-out", show_default=True)
@click.pass_context
def solve_command(
    ctx: click.Context,
    system_path: str,
    xi: np.ndarray,
    horizon: float,
    grid: Optional[int],
    method: str,
    p: Optional[float],
    out_dir: str,
) -> None:
    """Find a sparse control steering XI to the origin at time T.

    Writes control.csv (t_start,u), report.json (norms, certificate) and
    manifest.json to --out.

    Example:

        handsoff solve --system di.json --xi 1,-1 --horizon 5 --grid 500
    """
    try:
        settings = _settings(ctx, n_intervals=grid, p=p)
        system = load_system(Path(system_path))
    except (HandsOffError, ValueError) as exc:
        _fail(str(exc))
    _check_dimension(system, xi)

    try:
        problem = transcribe(system, xi, horizon, settings.n_intervals)
        if method == "handsoff":
            result: SparseSolveResult = solve_max_handsoff(problem, settings)
        elif method == "l1":
            result = solve_l1(problem, settings)
        else:
            result = solve_reweighted_lp(problem, p=settings.p, settings=settings)
    except NotReachableError as exc:
        _fail(str(exc), EXIT_NOT_REACHABLE)
    except HandsOffError as exc:
        _fail(str(exc))

    try:
        certificate = find_certificate(
            problem,
            result.control,
            tol=settings.certificate_tol,
            zero_tol=settings.zero_tol,
            feasibility_tol=settings.feasibility_tol,
        )
    except InfeasibleCandidateError as exc:
        click.echo(f"[WARN] Certificate search skipped: {exc}", err=True)
        certificate = None

    out = Path(out_dir)
    control_path = write_control_csv(out / "control.csv", result.control)
    norms = result.control.norm_report(settings.p, settings.zero_tol)
    report_path = write_json(
        out / "report.json",
        {
            "summary": result.summary(),
            "norms": norms,
            "support": result.support,
            "certificate": None if certificate is None else certificate.to_dict(),
        },
    )
    parameters = {
        "system": str(system_path),
        "xi": [float(v) for v in xi],
        "horizon": horizon,
        "grid": settings.n_intervals,
        "method": method,
        "p": settings.p,
    }
    write_manifest(
        out / "manifest.json",
        _manifest("solve", parameters, settings, [("system", Path(system_path))], [control_path, report_path]),
    )

    click.echo(f"[Solve] {system.label or 'system'} xi={list(map(float, xi))} T={horizon:g} N={settings.n_intervals}")
    click.echo(_norm_lines(result.method.value, result.control, settings))
    click.echo(f"  V1 (L1 optimum)      {result.l1_value:.9f}")
    support = ", ".join(f"[{a:.6g}, {b:.6g})" for a, b in result.support) or "empty"
    click.echo(f"  support              {support}")
    if certificate is None:
        click.echo("  certificate          none found")
    else:
        q0 = ", ".join(f"{v:.6g}" for v in certificate.q0)
        click.echo(f"  certificate          q0=({q0}) violation {certificate.max_violation:.2e}")
    click.echo(f"[Solve] Wrote {control_path}")
    sys.exit(EXIT_OK)


# ---------------------------------------------------------------------------
# demo-di
# ---------------------------------------------------------------------------


@cli.command("demo-di")
@click.option("--xi", callback=_parse_xi, default="1,-1", show_default=True, help="Initial state (xi1,xi2)")
@click.option("--horizon", type=float, default=5.0, show_default=True, callback=_positive)
@click.option("--grid", type=click.IntRange(min=1), default=None, help="Number of intervals N [default: 500]")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="handsoff-demo", show_default=True)
@click.pass_context
def demo_di(ctx: click.Context, xi: np.ndarray, horizon: float, grid: Optional[int], out_dir: str) -> None:
    """Double-integrator demo: sparse u2 against a non-sparse L1-optimal u1.

    Writes demo.csv (t_start,u_handsoff,u_l1), demo.svg and manifest.json.

    Example:

        handsoff demo-di --out ./demo
    """
    if xi.size != 2:
        _fail(f"--xi needs two entries, got {xi.size}")
    try:
        settings = _settings(ctx, n_intervals=grid)
        inst = DiInstance(float(xi[0]), float(xi[1]), horizon)
        t1, t2 = analytic_handsoff(inst)
        u1 = non_sparse_l1_control(inst, settings.n_intervals)
        problem = transcribe(inst.system(), inst.xi, horizon, settings.n_intervals)
        result = solve_max_handsoff(problem, settings)
    except HandsOffError as exc:
        _fail(str(exc))
    u2 = result.control

    out = Path(out_dir)
    csv_path = write_controls_csv(out / "demo.csv", horizon, {"u_handsoff": u2, "u_l1": u1})
    svg_path = ControlPlotRenderer().render(
        [PlotSeries("u2 max hands-off", u2), PlotSeries("u1 L1-optimal", u1, dashed=True)],
        out / "demo.svg",
        title=f"double integrator, xi=({xi[0]:g}, {xi[1]:g}), T={horizon:g}",
    )
    parameters = {"xi": [float(v) for v in xi], "horizon": horizon, "grid": settings.n_intervals}
    write_manifest(out / "manifest.json", _manifest("demo-di", parameters, settings, (), [csv_path, svg_path]))

    click.echo(f"[Demo] double integrator xi=({xi[0]:g}, {xi[1]:g}) T={horizon:g} N={settings.n_intervals}")
    click.echo(f"  analytic switch times  t1={t1:.6g}  t2={t2:.6g}")
    support = ", ".join(f"[{a:.6g}, {b:.6g})" for a, b in u2.support_intervals(settings.zero_tol))
    click.echo(f"  computed support       {support or 'empty'}")
    click.echo(_norm_lines("u2 (max hands-off)", u2, settings))
    click.echo(_norm_lines("u1 (L1, non-sparse)", u1, settings))
    click.echo(f"[Demo] Wrote {csv_path} and {svg_path}")
    sys.exit(EXIT_OK)


# ---------------------------------------------------------------------------
# value-map
# ---------------------------------------------------------------------------


@cli.command("value-map")
@click.option("--system", "system_path", type=click.Path(), default=None, help="System file [default: double integrator]")
@click.option("--range", "range_spec", required=True, help="Grid lo:hi:count per axis (one axis for n = 1, two for n = 2), e.g. -3:3:61,-3:3:61")
@click.option("--horizon", type=float, required=True, callback=_positive)
@click.option("--grid", type=click.IntRange(min=1), default=None, help="Number of intervals N [default: 500]")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Parallel solves [default: 1]")
@click.option("--probe", is_flag=True, help="Also run the seeded convexity probe")
@click.option("--trials", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="handsoff-value-map", show_default=True)
@click.pass_context
def value_map(
    ctx: click.Context,
    system_path: Optional[str],
    range_spec: str,
    horizon: float,
    grid: Optional[int],
    workers: Optional[int],
    probe: bool,
    trials: int,
    seed: int,
    out_dir: str,
) -> None:
    """Sample the value function V over a 1-D or 2-D state grid.

    Writes value.csv (xi1,xi2,value for n = 2, xi1,value for n = 1; empty
    value where unreachable) and manifest.json; --probe adds probe.json.
    Systems with n > 2 are rejected.

    Example:

        handsoff value-map --range -3:3:61,-3:3:61 --horizon 5 --workers 4
    """
    try:
        settings = _settings(ctx, n_intervals=grid, workers=workers)
        system = load_system(Path(system_path)) if system_path else LtiSystem.double_integrator()
        axes = parse_grid_spec(range_spec)
        field = sample_value_field(
            system, axes, horizon, settings.n_intervals, workers=settings.workers, settings=settings
        )
    except (HandsOffError, ValueError) as exc:
        _fail(str(exc))

    out = Path(out_dir)
    outputs = [write_value_csv(out / "value.csv", field)]
    click.echo(
        f"[ValueMap] {int(field.reachable.sum())} of {field.values.size} point(s) reachable "
        f"at T={horizon:g} (N={settings.n_intervals})"
    )
    if probe:
        report = convexity_probe(field, trials=trials, seed=seed)
        outputs.append(write_json(out / "probe.json", report))
        click.echo(
            f"[ValueMap] convexity probe: {report.trials} trial(s), "
            f"max violation {report.max_violation:.3e}"
        )

    parameters = {
        "system": system_path,
        "range": range_spec,
        "horizon": horizon,
        "grid": settings.n_intervals,
        "probe": probe,
        "trials": trials,
        "seed": seed,
    }
    inputs = [("system", Path(system_path))] if system_path else []
    write_manifest(out / "manifest.json", _manifest("value-map", parameters, settings, inputs, outputs))
    click.echo(f"[ValueMap] Wrote {outputs[0]}")
    sys.exit(EXIT_OK)


# ---------------------------------------------------------------------------
# reachable
# ---------------------------------------------------------------------------


@cli.command("reachable")
@click.option("--system", "system_path", type=click.Path(), required=True)
@click.option("--xi", callback=_parse_xi, required=True)
@click.option("--horizon", type=float, required=True, callback=_positive)
@click.option("--grid", type=click.IntRange(min=1), default=None, help="Number of intervals N [default: 500]")
@click.pass_context
def reachable(ctx: click.Context, system_path: str, xi: np.ndarray, horizon: float, grid: Optional[int]) -> None:
    """Report whether XI can be steered to the origin by time T.

    Exits 0 when reachable, 2 when not.
    """
    try:
        settings = _settings(ctx, n_intervals=grid)
        system = load_system(Path(system_path))
    except (HandsOffError, ValueError) as exc:
        _fail(str(exc))
    _check_dimension(system, xi)

    try:
        ok = is_reachable(system, xi, horizon, settings.n_intervals, settings)
    except HandsOffError as exc:
        _fail(str(exc))
    state = ", ".join(f"{v:g}" for v in xi)
    if ok:
        click.echo(f"[Reachable] xi=({state}) is reachable at T={horizon:g}")
        sys.exit(EXIT_OK)
    click.echo(f"[Reachable] xi=({state}) is not reachable at T={horizon:g}")
    sys.exit(EXIT_NOT_REACHABLE)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


@cli.command("verify")
@click.option("--control", "control_path", type=click.Path(), required=True, help="Control CSV")
@click.option("--column", default="u", show_default=True, help="Control column in the CSV")
@click.option("--system", "system_path", type=click.Path(), required=True)
@click.option("--xi", callback=_parse_xi, required=True)
@click.option("--horizon", type=float, required=True, callback=_positive)
@click.option("--json", "json_output", is_flag=True, help="Output as JSON")
@click.pass_context
def verify(
    ctx: click.Context,
    control_path: str,
    column: str,
    system_path: str,
    xi: np.ndarray,
    horizon: float,
    json_output: bool,
) -> None:
    """Check a control: feasibility, |u| <= 1, norms and a costate certificate.

    Exits 0 if every blocking check passes, 3 otherwise.

    Example:

        handsoff verify --control out/control.csv --system di.json --xi 1,-1 --horizon 5
    """
    settings = ctx.obj["settings"]
    try:
        system = load_system(Path(system_path))
        u = read_control_csv(Path(control_path), horizon, column)
    except (HandsOffError, ValueError) as exc:
        _fail(str(exc))
    _check_dimension(system, xi)

    try:
        problem = transcribe(system, xi, horizon, u.n_intervals)
        report = verify_control(problem, u, settings)
    except HandsOffError as exc:
        _fail(str(exc))

    if json_output:
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        click.echo(render_report(report), nl=False)
    sys.exit(EXIT_OK if report.passed else EXIT_VERIFY_FAILED)


if __name__ == "__main__":
    cli()
