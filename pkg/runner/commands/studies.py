"""Monte Carlo robustness study command."""
import click

from optomech.src.config import DrivingMode
from optomech.src.data_analyzer import generate_robustness_table, instances_frame, study_frame
from optomech.src.montecarlo import sweep_levels
from runner.commands.options import common_options, prepare
from runner.schemas import require_seed


@click.command()
@common_options
@click.option("--level", "levels", type=float, multiple=True, help="Relative standard deviation in percent (repeatable).")
@click.option("--mode", type=click.Choice(["constant", "composite", "both"]), default=None)
@click.option("--instances", type=int, default=None, help="Parameter draws per (level, mode).")
@click.option("--seed", type=int, default=None, help="Required: root seed of the per-instance streams.")
@click.option("--save-instances", is_flag=True, default=None, help="Also write every per-instance value.")
def montecarlo(**kwargs):
    """Mean and spread of the final phonon number under random g, kappa, gamma."""
    run = prepare("montecarlo", **kwargs)
    config = run.config
    seed = require_seed(config)
    modes = DrivingMode.ALL if config.mode == "both" else (config.mode,)

    reports = sweep_levels(run.derived, run.params, config.levels, modes, config.instances, seed)
    for report in reports:
        click.echo(f"  {report.rel_std:g}% {report.mode:>9}: mean {report.sample_mean:.6g}  std {report.sample_std:.4g}")

    table = generate_robustness_table(reports)
    extra = {"instances": instances_frame(reports)} if config.save_instances else None
    run.emit(study_frame(reports), seed=seed, summary=table, extra_frames=extra, document=table)
