"""Commands built on the two-mode propagators: steady, trace, scan, optimize."""
import json
import logging
import math

import click
import numpy as np
import pandas as pd

from optomech.src.data_analyzer import curve_frame, sequence_frame, trace_frame
from optomech.src.errors import NoRealSolutionError
from optomech.src.evolution import PhaseSequence, describe, trace as trace_numbers
from optomech.src.model import check_red_detuned
from optomech.src.optimizer import find_sequence, half_width, optimal_phase, robustness_scan
from runner.commands.options import common_options, prepare, resolve_phases, single_n
from runner.schemas import parse_grid, parse_phases

logger = logging.getLogger(__name__)

DEFAULT_TRACE_POINTS = 1201


@click.command()
@common_options
def steady(**kwargs):
    """Print the steady state and effective-model constants."""
    run = prepare("steady", **kwargs)
    d = run.derived
    try:
        phase = optimal_phase(d.loss_asymmetry)
    except NoRealSolutionError:
        phase = math.nan

    values = {
        "name": run.params.name,
        "alpha_re": d.alpha.real,
        "alpha_im": d.alpha.imag,
        "beta_re": d.beta.real,
        "beta_im": d.beta.imag,
        "photon_number": d.photon_number,
        "coupling": d.enhanced_coupling,
        "detuning": d.detuning,
        "loss_asymmetry": d.loss_asymmetry,
        "mean_decay": d.mean_decay,
        "rabi": d.rabi,
        "swap_time": d.swap_time,
        "optimal_phase": phase,
    }
    if run.config.format == "json":
        click.echo(json.dumps(values, indent=2))
        return
    for key, value in values.items():
        click.echo(f"{key:>16}: {value:.9g}" if isinstance(value, float) else f"{key:>16}: {value}")


@click.command()
@common_options
@click.option("--N", "n_segments", type=int, multiple=True, help="Number of segments.")
@click.option("--phase", "phases", default=None, help="'optimal', 'zero'/'0' or comma-separated radians.")
@click.option("--timing", type=float, default=None, help="Segment length in units of tau0.")
@click.option("--t", "times", default=None, help="Time grid start:stop:step, 'tau' units allowed.")
@click.option("--reoptimize/--no-reoptimize", default=None, help="Optimize N >= 5 phases at this Gamma.")
def trace(**kwargs):
    """Mean occupations along a phase sequence."""
    kwargs["phases"] = parse_phases(kwargs["phases"])
    run = prepare("trace", **kwargs)
    d, config = run.derived, run.config

    if config.phases == "zero":
        check_red_detuned(d)
        default_end = single_n(config) * config.timing * d.swap_time
        grid = parse_grid(config.times, d.swap_time) if config.times else None
        end = max(default_end, float(grid[-1])) if grid is not None else default_end
        seq = PhaseSequence.constant(end)
    else:
        seq = PhaseSequence.for_params(resolve_phases(config, single_n(config), d), d, timing=config.timing)
        grid = None

    if grid is None:
        if config.times:
            grid = parse_grid(config.times, d.swap_time)
        else:
            grid = np.linspace(0.0, seq.total_duration, DEFAULT_TRACE_POINTS)
    logger.info("tracing %s over %d points", describe(seq, d), len(grid))
    numbers = trace_numbers(seq, grid, d, run.params)
    final = numbers[-1]
    run.emit(trace_frame(grid, numbers), summary={"final_photons": final.photons, "final_phonons": final.phonons})


@click.command()
@common_options
@click.option("--N", "n_segments", type=int, multiple=True, help="Segment count(s); repeat for several curves.")
@click.option("--phase", "phases", default=None, help="'optimal', 'zero'/'0' or comma-separated radians.")
@click.option("--dev", "deviations", default=None, help="Area deviation grid start:stop:step.")
@click.option("--reoptimize/--no-reoptimize", default=None, help="Optimize N >= 5 phases at this Gamma.")
def scan(**kwargs):
    """Final phonon number against the interaction-area deviation."""
    kwargs["phases"] = parse_phases(kwargs["phases"])
    run = prepare("scan", **kwargs)
    d, config = run.derived, run.config
    grid = parse_grid(config.deviations, key="deviations")
    counts = [len(config.phases)] if isinstance(config.phases, list) else config.n_segments

    curves, widths = [], {}
    covers_zero = grid[0] <= 0 <= grid[-1]
    if not covers_zero:
        click.echo("⚠ deviation grid does not contain zero; half-widths skipped")
    for n in counts:
        seq = PhaseSequence.for_params(resolve_phases(config, n, d), d, timing=config.timing)
        curve = robustness_scan(seq, grid, d, run.params, label=f"N={n}")
        curves.append(curve)
        if covers_zero:
            widths[curve.label] = half_width(curve)
            click.echo(f"  N={n}: {curve.value_at(0.0):.6g} phonons at zero deviation, "
                       f"10% half-width {widths[curve.label]:.4g}")
    run.emit(curve_frame(curves), summary={"half_width_10pct": widths})


@click.command()
@common_options
@click.option("--N", "n_segments", type=int, multiple=True, help="Odd segment count(s).")
def optimize(**kwargs):
    """Numerically optimized symmetric phases."""
    run = prepare("optimize", **kwargs)
    frames, residuals = [], {}
    for n in run.config.n_segments:
        result = find_sequence(n, run.derived.loss_asymmetry)
        residuals[f"N={n}"] = result.residual
        frames.append(sequence_frame(result.phases))
        click.echo(f"  N={n}: " + ", ".join(f"{phase:+.6f}" for phase in result.phases)
                   + f"  (residual {result.residual:.2e})")
    run.emit(pd.concat(frames, ignore_index=True), summary={"residuals": residuals})
