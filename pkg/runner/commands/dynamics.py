"""Time-domain checks: master equation and classical amplitudes."""
import click

from optomech.src.config import SMOOTH_WIDTH_FRACTION
from optomech.src.data_analyzer import CLASSICAL_COLUMNS, LINDBLAD_COLUMNS, rows_frame
from optomech.src.lindblad import noisy_trajectory, oracle_discrepancy, run_transfer_demo, schwinger_expectations
from optomech.src.semiclassical import default_targets, integrate_classical, smooth_profile
from runner.commands.options import common_options, prepare, resolve_phases, single_n
from runner.schemas import parse_phases


@click.command()
@common_options
@click.option("--N", "n_segments", type=int, multiple=True, help="Odd segment count (first value is used).")
@click.option("--phase", "phases", default=None, help="'optimal', 'zero'/'0' or comma-separated radians.")
@click.option("--timing", type=float, default=None, help="Segment length in units of tau0 (0.9 = -10%).")
@click.option("--cutoff", type=int, default=None, help="Highest Fock level kept per mode.")
@click.option("--noise-seed", type=int, default=None, help="Add smooth parameter noise drawn from this seed.")
@click.option("--thermal/--no-thermal", default=None, help="Include thermal bath dissipators.")
def lindblad(**kwargs):
    """Master-equation run of a composite transfer (three segments by default) with Bloch-sphere observables."""
    kwargs["phases"] = parse_phases(kwargs["phases"])
    run = prepare("lindblad", **kwargs)
    d, config = run.derived, run.config
    phases = resolve_phases(config, single_n(config), d)

    noise = None
    if config.noise_seed is not None:
        noise = noisy_trajectory(config.noise_seed, len(phases) * config.timing * d.swap_time)

    traj = run_transfer_demo(d, run.params, phases, timing=config.timing, noise=noise,
                             cutoff=config.cutoff, thermal=config.thermal)
    final = schwinger_expectations(traj.final_state)
    summary = {"final_Jx": final.jx, "final_Jy": final.jy, "final_Jz": final.jz}
    click.echo(f"  final (Jx, Jy, Jz) = ({final.jx:+.4f}, {final.jy:+.4f}, {final.jz:+.4f})")
    if noise is None:
        summary["oracle_discrepancy"] = oracle_discrepancy(traj, d, run.params)
        click.echo(f"  master equation vs Langevin: {summary['oracle_discrepancy']:.3e}")
    run.emit(rows_frame(traj.to_rows(), LINDBLAD_COLUMNS), seed=config.noise_seed, summary=summary)


@click.command()
@common_options
@click.option("--N", "n_segments", type=int, multiple=True, help="Odd segment count (3 or 7 for the standard sets).")
@click.option("--phase", "phases", default=None, help="Comma-separated target averages; default negative optimal branch.")
@click.option("--width-fraction", type=float, default=None, help="Bump edge width in units of tau0.")
def smooth(**kwargs):
    """Classical amplitudes under an erf-smoothed phase sequence."""
    kwargs["phases"] = parse_phases(kwargs["phases"])
    run = prepare("smooth", **kwargs)
    d, config = run.derived, run.config

    if isinstance(config.phases, list):
        targets = tuple(config.phases)
    else:
        targets = default_targets(single_n(config), d)
    fraction = config.width_fraction or SMOOTH_WIDTH_FRACTION
    profile = smooth_profile(targets, d, width=fraction * d.swap_time)
    traj = integrate_classical(run.params, profile)

    metrics = traj.metrics.to_dict()
    for key, value in metrics.items():
        click.echo(f"  {key:>24}: {value:.4g} %")
    run.emit(rows_frame(traj.to_rows(), CLASSICAL_COLUMNS),
             summary={"metrics": metrics, "factor": profile.factor, "heights": list(profile.amplitudes)})
