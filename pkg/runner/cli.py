import logging
import sys

import click
from pydantic import ValidationError

from optomech.src.data_loader import list_presets, load_preset
from optomech.src.errors import NumericalError, OptomechError
from optomech.src.model import derive
from runner.commands.dynamics import lindblad, smooth
from runner.commands.sequences import optimize, scan, steady, trace
from runner.commands.studies import montecarlo

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

EXIT_USER_ERROR = 1
EXIT_NUMERICAL_ERROR = 2


class ExperimentGroup(click.Group):
    """Click group mapping failures to exit codes: 1 for input problems, 2 for numerical ones."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except NumericalError as exc:
            click.echo(f"Error: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL_ERROR)
        except (OptomechError, ValidationError) as exc:
            click.echo(f"Error: {exc}", err=True)
            sys.exit(EXIT_USER_ERROR)
        except click.ClickException as exc:
            exc.show()
            sys.exit(EXIT_USER_ERROR)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USER_ERROR)


@click.group(cls=ExperimentGroup)
def main():
    """Composite phase sequences for robust photon-phonon transfer."""


@main.command()
def presets():
    """List the bundled parameter sets."""
    for name in list_presets():
        params = load_preset(name)
        d = derive(params)
        click.echo(f"  {name:<14} kappa={params.cavity_decay:.4g} gamma={params.mech_decay:.4g} "
                   f"g={d.enhanced_coupling:.4g} Gamma={d.loss_asymmetry:+.4f}")


for command in (steady, trace, scan, optimize, montecarlo, lindblad, smooth):
    main.add_command(command)


def run():
    """Console entry point."""
    main()


if __name__ == "__main__":
    run()
