"""paritylab CLI: main entry point.

Usage:
    paritylab run --d 4 --m 3 --sign +
    paritylab run --d 4 --m 1 --sign - --noise calibrated --shots 100000
    paritylab --format csv sweep --noise calibrated --repeats 20
    paritylab sweep --d-range 3:12
    paritylab hom --delays -300:300:10 --tau-c 100
    paritylab lower-bound --d 4
    paritylab tomo --simulate --noise calibrated --resamples 20
    paritylab tomo --counts counts.json
    paritylab explore-cnot --hwp2 22.5
"""

import functools
import logging
import math
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np
from click.core import ParameterSource
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

# Library package lives at the repository root, next to cli/
sys.path.insert(0, str(Path(__file__).resolve().parents[2]))
from paritylab.config import (  # noqa: E402
    REFERENCE_BELL_FIDELITY,
    REFERENCE_BELL_FIDELITY_STD,
    REFERENCE_HOM_VISIBILITY_STD,
    REFERENCE_SUCCESS_MEAN,
    REFERENCE_SUCCESS_STD,
    settings,
)
from paritylab.errors import ParityLabError, ParseError, SelfCheckError  # noqa: E402
from paritylab.models import RunConfig  # noqa: E402
from paritylab.seeding import derive_seed  # noqa: E402
from paritylab.serialization import encode_complex, round_probs  # noqa: E402
from paritylab.services import algorithm, tomography, two_photon  # noqa: E402
from paritylab.services.qudit import PermutationSpec, TOLERANCE  # noqa: E402

from . import __version__, files  # noqa: E402

console = Console(stderr=True)
logger = logging.getLogger("paritylab_cli")

PROB_DECIMALS = 6
FORMATS = click.Choice(["json", "csv"])
LOG_LEVELS = click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False)


# ── Helpers ─────────────────────────────────────────────────


def _handle_errors(fn):
    """Report library errors in red and exit with their code."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ParityLabError as e:
            console.print(f"[red]✗ {e}[/]")
            sys.exit(e.exit_code)

    return wrapper


def _convert(ptype: click.ParamType, value, where: str, ctx: Optional[click.Context] = None,
             param: Optional[click.Parameter] = None):
    """Run a config file value through the same click type as its command-line option."""
    if value is None:
        return None
    # click truncates floats and accepts booleans as integers
    if isinstance(ptype, click.types.IntParamType) and (
        isinstance(value, bool) or (isinstance(value, float) and not value.is_integer())
    ):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    try:
        return ptype.convert(value, param, ctx)
    except click.BadParameter as e:
        raise ParseError(f"{where}: {e.message}") from None


def _merge_config(ctx: click.Context, command: str, params: dict) -> dict:
    """Fill parameters left at their defaults from the config file section."""
    section = ctx.obj["config"].get(command, {})
    if not isinstance(section, dict):
        raise ParseError(f"Config section '{command}' must be an object")
    merged = dict(params)
    options = {opt.name: opt for opt in ctx.command.params}
    for name, value in section.items():
        if name not in params:
            raise ParseError(f"Unknown option '{name}' in config section '{command}'")
        if ctx.get_parameter_source(name) in (ParameterSource.DEFAULT, ParameterSource.DEFAULT_MAP, None):
            opt = options[name]
            if name == "noise" and isinstance(value, dict):
                # inline noise parameters, validated by files.load_noise
                merged[name] = value
            else:
                merged[name] = _convert(opt.type, value, f"Config {command}.{name}", ctx, opt)
    return merged


def _run_config(ctx: click.Context, command: str, params: dict) -> RunConfig:
    return RunConfig(
        command=command,
        seed=ctx.obj["seed"],
        out=ctx.obj["out"],
        format=_format(ctx, "json"),
        params=params,
    )


def _format(ctx: click.Context, default: str) -> str:
    return ctx.obj["format"] or default


def _emit(ctx: click.Context, config: RunConfig, payload: dict, header: list[str], rows: list[list]) -> None:
    if config.format == "csv":
        text = files.render_csv(header, rows, config)
    else:
        text = files.render_json(payload, config)
    files.write_artifact(text, ctx.obj["out"])
    if ctx.obj["out"]:
        console.print(f"[green]✓[/] Wrote {config.format.upper()} to {ctx.obj['out']}")


def _parse_range(value: str, what: str) -> tuple[float, ...]:
    try:
        parts = tuple(float(p) for p in value.split(":"))
    except ValueError:
        raise ParseError(f"{what} must look like start:stop[:step], got {value!r}") from None
    if len(parts) not in (2, 3):
        raise ParseError(f"{what} must look like start:stop[:step], got {value!r}")
    return parts


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise SelfCheckError(f"Self-check failed: {message}")


# ── CLI group ───────────────────────────────────────────────


@click.group()
@click.version_option(version=__version__)
@click.option("--seed", type=int, default=None, help="RNG seed (default: config file, then PARITYLAB_SEED)")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="JSON run configuration")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the artifact here instead of stdout")
@click.option("--format", "fmt", type=FORMATS, default=None, help="Artifact format")
@click.option("--log-level", type=LOG_LEVELS,
              default=None, help="Log level (default: PARITYLAB_LOG_LEVEL)")
@click.pass_context
@_handle_errors
def cli(ctx, seed: Optional[int], config_path: Optional[str], out: Optional[str], fmt: Optional[str],
        log_level: Optional[str]):
    """paritylab: single-qudit parity determination and its photonic model."""
    config = files.load_config(config_path)
    level = log_level or _convert(LOG_LEVELS, config.get("log_level"), "Config log_level") or settings.log_level
    level = level.upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )
    ctx.ensure_object(dict)
    ctx.obj.update(
        config=config,
        seed=seed if seed is not None else _convert(click.INT, config.get("seed", settings.default_seed), "Config seed"),
        out=out or config.get("out"),
        format=fmt or _convert(FORMATS, config.get("format"), "Config format"),
    )
    logger.debug("Global options: %s", {k: v for k, v in ctx.obj.items() if k != "config"})


# ── RUN command ─────────────────────────────────────────────


@cli.command()
@click.option("--d", "d", type=int, default=4, help="Qudit dimension")
@click.option("--m", "m", type=int, default=0, help="Offset m of f_m^±")
@click.option("--sign", default="+", help="Permutation sign: + or -")
@click.option("--noise", default=None, help="ideal, calibrated, or a noise JSON file (photonic d=4 run)")
@click.option("--shots", type=int, default=None, help="Shots for the photonic run")
@click.option("--labels", type=click.Choice(["encoding", "figure"]), default=None, help="Detector label preset")
@click.pass_context
@_handle_errors
def run(ctx, **params):
    """Run the parity algorithm on one permutation.

    Without --noise the exact algorithm is evaluated for any d >= 3; with
    --noise the d = 4 photonic model is sampled.
    """
    p = _merge_config(ctx, "run", params)
    config = _run_config(ctx, "run", p)
    spec = PermutationSpec(int(p["m"]), p["sign"], int(p["d"]))
    noise = files.load_noise(p["noise"])
    expected = algorithm.expected_parity(spec)

    if noise is None:
        final_state, outcome, queries = algorithm.run_ideal(spec)
        dist = np.abs(final_state.amps) ** 2
        _check(outcome.parity == expected, f"{spec.label} decided {outcome.parity.value}")
        _check(abs(outcome.success_prob - 1) <= TOLERANCE, f"{spec.label} success {outcome.success_prob}")
        payload = {
            "spec": {"d": spec.dim, "m": spec.m, "sign": spec.sign.symbol, "label": spec.label},
            "final_state": encode_complex(final_state.amps),
            "distribution": round_probs(dist, PROB_DECIMALS),
            "parity": outcome.parity.value,
            "success_prob": round(outcome.success_prob, PROB_DECIMALS),
            "queries_used": queries,
        }
        labels = [str(j) for j in range(spec.dim)]
    else:
        shots = settings.default_shots if p["shots"] is None else int(p["shots"])
        labels = list(two_photon.readout_labels(p["labels"]))
        result = algorithm.run_noisy(spec, noise, shots, ctx.obj["seed"], labels)
        exact = two_photon.photonic_outcome_distribution(spec, noise)
        dist = result.dist.probs
        if noise.is_ideal:
            _check(result.outcome.parity == expected, f"ideal photonic run of {spec.label} failed")
        _check(result.queries_used == 1, f"photonic run of {spec.label} used {result.queries_used} queries")
        payload = {
            "spec": {"d": spec.dim, "m": spec.m, "sign": spec.sign.symbol, "label": spec.label},
            "noise": noise.model_dump(),
            "counts": result.record.model_dump(),
            "labels": labels,
            "distribution": round_probs(dist, PROB_DECIMALS),
            "exact_distribution": round_probs(exact.probs, PROB_DECIMALS),
            "parity": result.outcome.parity.value,
            "success_prob": round(float(dist[algorithm.correct_index(spec)]), PROB_DECIMALS),
            "queries_used": result.queries_used,
        }

    console.print(Panel.fit(
        f"[bold cyan]{spec.label}[/] (d={spec.dim})\n\n"
        f"  Parity:   {payload['parity']}\n"
        f"  Success:  {payload['success_prob']:.6f}\n"
        f"  Queries:  {payload['queries_used']}",
        border_style="cyan",
    ))
    rows = [[j, labels[j], f"{prob:.6f}"] for j, prob in enumerate(dist)]
    _emit(ctx, config, payload, ["outcome", "label", "probability"], rows)


# ── SWEEP command ───────────────────────────────────────────


@cli.command()
@click.option("--d-range", default=None, help="Ideal sweep over d_min:d_max instead of the eight d=4 permutations")
@click.option("--noise", default="calibrated", help="ideal, calibrated, or a noise JSON file")
@click.option("--shots", type=int, default=None, help="Shots per run")
@click.option("--repeats", type=int, default=20, help="Independently seeded runs per permutation")
@click.option("--labels", type=click.Choice(["encoding", "figure"]), default=None, help="Detector label preset")
@click.pass_context
@_handle_errors
def sweep(ctx, **params):
    """Outcome probabilities of every permutation, one row per (permutation, outcome)."""
    p = _merge_config(ctx, "sweep", params)
    ctx.obj["format"] = _format(ctx, "csv")
    config = _run_config(ctx, "sweep", p)

    if p["d_range"]:
        d_min, d_max = (int(v) for v in _parse_range(p["d_range"], "--d-range")[:2])
        summary = algorithm.sweep_ideal(d_min, d_max)
        _check(all(abs(r.success_mean - 1) <= TOLERANCE for r in summary.results), "ideal sweep not deterministic")
        labels = None
    else:
        noise = files.load_noise(p["noise"])
        shots = settings.default_shots if p["shots"] is None else int(p["shots"])
        labels = list(two_photon.readout_labels(p["labels"]))
        summary = algorithm.sweep_hardware(noise, shots, ctx.obj["seed"], int(p["repeats"]), labels)
        if noise.is_ideal:
            _check(all(r.success_mean >= 1 - TOLERANCE for r in summary.results), "ideal photonic sweep not deterministic")

    table = Table(title="Parity success per permutation", show_lines=False)
    table.add_column("Spec", style="cyan")
    table.add_column("d", justify="right")
    table.add_column("Success", justify="right")
    table.add_column("± std", justify="right", style="dim")
    table.add_column("Majority", justify="right")
    for r in summary.results:
        table.add_row(r.spec, str(r.d), f"{r.success_mean:.6f}", f"{r.success_std:.6f}", f"{r.majority_success_rate:.3f}")
    console.print(table)
    if summary.reference_average_success is not None:
        console.print(
            f"  Average success [bold]{summary.average_success:.5f}[/] ± {summary.average_success_std:.5f}"
            f"  (measured reference {summary.reference_average_success:.5f} ± {summary.reference_average_success_std:.5f})"
        )

    rows = []
    for r in summary.results:
        for j, (ideal, measured) in enumerate(zip(r.ideal_probs, r.measured_probs)):
            label = labels[j] if labels else str(j)
            rows.append([r.spec, r.d, j, label, f"{ideal:.6f}", f"{measured:.6f}",
                         f"{r.success_mean:.6f}", f"{r.success_std:.6f}", f"{r.majority_success_rate:.6f}"])
    rows.append(["average", "", "", "", "", "", f"{summary.average_success:.6f}",
                 f"{summary.average_success_std:.6f}", f"{summary.average_majority_success:.6f}"])
    if summary.reference_average_success is not None:
        rows.append(["reference", "", "", "", "", "", f"{REFERENCE_SUCCESS_MEAN:.6f}",
                     f"{REFERENCE_SUCCESS_STD:.6f}", ""])
    header = ["spec", "d", "outcome", "label", "ideal", "measured", "success_mean", "success_std", "majority_rate"]
    _emit(ctx, config, summary.model_dump(), header, rows)


# ── HOM command ─────────────────────────────────────────────


@cli.command()
@click.option("--delays", default="-300:300:10", help="Delay grid start:stop:step (same unit as --tau-c)")
@click.option("--tau-c", type=float, default=100.0, help="Coherence time of the Gaussian overlap")
@click.option("--beta0", type=float, default=None, help="Peak overlap (default: sqrt of PARITYLAB_HOM_VISIBILITY)")
@click.pass_context
@_handle_errors
def hom(ctx, **params):
    """Hong-Ou-Mandel dip: coincidence probability versus delay."""
    p = _merge_config(ctx, "hom", params)
    ctx.obj["format"] = _format(ctx, "csv")
    config = _run_config(ctx, "hom", p)
    grid = _parse_range(p["delays"], "--delays")
    start, stop = grid[0], grid[1]
    step = grid[2] if len(grid) == 3 else (stop - start) / 100
    if step <= 0 or stop < start:
        raise ParseError(f"--delays needs start <= stop and a positive step, got {p['delays']!r}")
    beta0 = math.sqrt(settings.hom_visibility) if p["beta0"] is None else float(p["beta0"])

    delays = np.arange(start, stop + step / 2, step)
    scan = two_photon.hom_dip_scan(delays, float(p["tau_c"]), beta0)
    visibility = two_photon.hom_visibility(beta0)
    _check(abs(visibility - beta0 ** 2) <= 1e-6, f"visibility {visibility} differs from beta0^2 {beta0 ** 2}")

    console.print(
        f"  HOM visibility [bold]{visibility:.5f}[/]  (measured reference "
        f"{settings.hom_visibility:.5f} ± {REFERENCE_HOM_VISIBILITY_STD:.5f})"
    )
    payload = {
        "beta0": beta0,
        "tau_c": float(p["tau_c"]),
        "visibility": round(visibility, PROB_DECIMALS),
        "scan": [{"delay": tau, "coincidence": round(prob, PROB_DECIMALS)} for tau, prob in scan],
    }
    rows = [[f"{tau:g}", f"{prob:.6f}"] for tau, prob in scan]
    _emit(ctx, config, payload, ["delay", "coincidence"], rows)


# ── LOWER-BOUND command ─────────────────────────────────────


@cli.command("lower-bound")
@click.option("--d", "d", type=int, default=4, help="Qudit dimension (3..8)")
@click.pass_context
@_handle_errors
def lower_bound(ctx, **params):
    """Exhaustive certificate that one classical query cannot decide parity."""
    p = _merge_config(ctx, "lower-bound", params)
    config = _run_config(ctx, "lower-bound", p)
    report = algorithm.classical_one_query_lower_bound(int(p["d"]))
    _check(report.best_one_query_worst_case == 0.5, "one-query worst case is not 1/2")
    _check(report.two_query_success == 1.0, "two-query strategy failed")
    speedup = algorithm.speedup_table(report.d, report.d)[0]

    console.print(Panel.fit(
        f"[bold cyan]Classical query bound, d={report.d}[/]\n\n"
        f"  Strategies enumerated:      {report.strategies_enumerated}\n"
        f"  Best one-query worst case:  {report.best_one_query_worst_case:.6f}\n"
        f"  Best one-query average:     {report.best_one_query_average:.6f}\n"
        f"  Two-query success:          {report.two_query_success:.6f}\n"
        f"  Queries quantum/classical:  {speedup['quantum_queries']}/{speedup['classical_queries']}",
        border_style="cyan",
    ))
    rows = [[w.x, w.y, w.positive_m, w.negative_m] for w in report.witness_pairs]
    _emit(ctx, config, {**report.model_dump(), "speedup": speedup}, ["x", "y", "positive_m", "negative_m"], rows)


# ── TOMO command ────────────────────────────────────────────


@cli.command()
@click.option("--counts", type=click.Path(exists=True, dir_okay=False), default=None, help="Counts JSON file")
@click.option("--simulate", is_flag=True, help="Simulate counts from the CNOT Bell test")
@click.option("--noise", default="calibrated", help="Noise for --simulate: ideal, calibrated, or a JSON file")
@click.option("--settings", "settings_set", type=click.Choice(["pauli", "minimal"]), default="pauli",
              help="Measurement settings for --simulate")
@click.option("--shots", type=int, default=None, help="Shots per setting for --simulate")
@click.option("--resamples", type=int, default=0, help="Re-simulate with N derived seeds and report the spread")
@click.option("--target", type=click.Choice(["bell", "none"]), default="bell", help="Pure target for fidelity")
@click.pass_context
@_handle_errors
def tomo(ctx, **params):
    """Reconstruct a two-photon state by maximum likelihood and report its fidelity."""
    p = _merge_config(ctx, "tomo", params)
    config = _run_config(ctx, "tomo", p)
    seed = ctx.obj["seed"]
    target = two_photon.BELL_TARGET if p["target"] == "bell" else None

    if p["counts"]:
        counts = files.load_counts(p["counts"])
        truth = None
    elif p["simulate"]:
        noise = files.load_noise(p["noise"])
        truth = two_photon.cnot_bell_test(noise)
        choice = tomography.pauli_settings() if p["settings_set"] == "pauli" else tomography.minimal_settings()
        shots = settings.tomo_shots_per_setting if p["shots"] is None else int(p["shots"])
        counts = tomography.simulate_counts(truth, choice, shots, seed)
    else:
        raise click.UsageError("Pass --counts FILE or --simulate")

    linear = tomography.linear_inversion(counts)
    result = tomography.mle_reconstruct(counts)
    _check(result.rho.is_physical(), "reconstruction is not physical")

    payload = {
        "rho": encode_complex(result.rho.mat, PROB_DECIMALS),
        "iterations": result.diagnostics.iterations,
        "converged": result.diagnostics.converged,
        "log_likelihood": result.diagnostics.log_likelihood,
        "dilution_events": result.diagnostics.dilution_events,
        "purity": round(tomography.purity(result.rho), PROB_DECIMALS),
        "linear_inversion_physical": linear.is_physical(),
    }
    if target is not None:
        payload["fidelity"] = round(tomography.fidelity(result.rho, target), PROB_DECIMALS)
        payload["reference_fidelity"] = REFERENCE_BELL_FIDELITY
        payload["reference_fidelity_std"] = REFERENCE_BELL_FIDELITY_STD
    if truth is not None:
        payload["true_fidelity"] = round(tomography.fidelity(truth, two_photon.BELL_TARGET), PROB_DECIMALS)
        payload["trace_distance_to_truth"] = round(tomography.trace_distance(result.rho, truth), PROB_DECIMALS)
        if p["resamples"] and target is not None:
            seeds = [derive_seed(seed, i) for i in range(int(p["resamples"]))]
            mean, std = tomography.fidelity_spread(truth, target, counts.settings, shots, seeds)
            payload["fidelity_spread"] = {"mean": round(mean, PROB_DECIMALS), "std": round(std, PROB_DECIMALS),
                                          "resamples": len(seeds)}

    summary = [f"  Iterations:  {payload['iterations']} ({'converged' if payload['converged'] else 'NOT converged'})",
               f"  Purity:      {payload['purity']:.6f}"]
    if "fidelity" in payload:
        summary.append(f"  Fidelity:    {payload['fidelity']:.6f}  (measured reference "
                       f"{REFERENCE_BELL_FIDELITY:.5f} ± {REFERENCE_BELL_FIDELITY_STD:.5f})")
    console.print(Panel.fit("[bold cyan]State tomography[/]\n\n" + "\n".join(summary), border_style="cyan"))

    rows = [[i, j, f"{result.rho.mat[i, j].real:.6f}", f"{result.rho.mat[i, j].imag:.6f}"]
            for i in range(4) for j in range(4)]
    _emit(ctx, config, payload, ["row", "col", "re", "im"], rows)


# ── EXPLORE-CNOT command ────────────────────────────────────


@cli.command("explore-cnot")
@click.option("--hwp2", type=float, default=None, help="HWP2 angle in degrees (default: PARITYLAB_CNOT_ANGLE_DEG)")
@click.option("--network", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Custom network JSON [{kind, theta_deg, mode}, ...] instead of the BD submodule")
@click.pass_context
@_handle_errors
def explore_cnot(ctx, **params):
    """Post-selected two-qubit map of the BD submodule at any HWP2 angle."""
    p = _merge_config(ctx, "explore-cnot", params)
    config = _run_config(ctx, "explore-cnot", p)
    network = files.load_network(p["network"]) if p["network"] else None
    report = two_photon.explore_submodule(p["hwp2"], network)

    console.print(
        f"  Overlap with CNOT [bold]{report.cnot_overlap:.6f}[/], with X⊗X [bold]{report.xx_overlap:.6f}[/]"
    )
    rows = [[i, j, f"{re:.6f}", f"{im:.6f}"] for i, row in enumerate(report.matrix) for j, (re, im) in enumerate(row)]
    _emit(ctx, config, report.model_dump(), ["out", "in", "re", "im"], rows)


if __name__ == "__main__":
    cli()
