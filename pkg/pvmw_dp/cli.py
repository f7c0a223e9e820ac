#!/usr/bin/env python3
import logging
import sys
from functools import update_wrapper

import click

from pvmw_dp import VERSION
from pvmw_dp.config import DEFAULT_CONFIG_FILE, parse_value
from pvmw_dp.core import Dataset
from pvmw_dp.errors import InvalidSpec, PvmwError
from pvmw_dp.experiments import EXPERIMENTS, experiment_tags, get_experiment
from pvmw_dp.experiments.base import ExperimentSpec
from pvmw_dp.helper import initialize_data_folders
from pvmw_dp.runner import Runner
from pvmw_dp.ui import alert, configfile, verbose

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2

# Flag name -> option key, where they differ from the dashes-to-underscores rule
FLAG_KEYS = {'family': 'query_family'}

# Initialize data folders
initialize_data_folders()


def experiment_options(f):
    """Flags shared by every experiment command. Flags win over config file values."""
    options = [
        click.option('--n', default=None, help='Dataset sizes, comma separated'),
        click.option('--k', default=None, help='Private domain sizes, comma separated'),
        click.option('--d', default=None, help='Query dimensions, comma separated'),
        click.option('--rho', default=None, help='zCDP budgets, comma separated'),
        click.option('--eps', default=None, help='Target epsilons, comma separated; needs --delta'),
        click.option('--delta', default=None, help='Target delta'),
        click.option('--seeds', default=None, help='Distinct seeds, comma separated'),
        click.option('--out', default=None, help='CSV output path, "-" for stdout'),
        click.option(
            '--debug-nonprivate/--no-debug-nonprivate',
            default=None,
            help='Measure errors against exact answers; the output is NOT private',
        ),
        click.option('--workers', default=None, help='Worker pool size'),
        click.option('--q-cap', default=None, help='Upper limit for the default convex step count'),
        click.option('--T', 'T', default=None, help='Queries per session'),
        click.option('--beta', default=None, help='Failure probability of the accuracy guarantee'),
        click.option('--m', default=None, help='Problems per session'),
        click.option('--transcript', default=None, help='JSON-lines transcript of every answer'),
        click.option('--replicate', default=None, help='Repeat every example r times'),
        click.option('--family', default=None, help='Query family of the workload'),
        click.option('--set', 'overrides', multiple=True, metavar='KEY=VALUE', help='Set any experiment option'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def collect_options(ctx, command, flags):
    """Merge config file values, then flags, then --set pairs."""
    known = {element.key for element in get_experiment(command).configure()}
    section = ctx.config.get(command)
    section = section if isinstance(section, dict) else {}
    # Shared top-level values only apply where the command knows them; the command section is taken as is
    options = {key: value for key, value in ctx.config.options_for(command).items() if key in known or key in section}

    overrides = flags.pop('overrides', ())
    for name, value in flags.items():
        if value is None:
            continue
        key = FLAG_KEYS.get(name, name)
        options[key] = value if isinstance(value, bool) else parse_value(value)

    for pair in overrides:
        if '=' not in pair:
            raise click.BadParameter('expected KEY=VALUE, got {!r}'.format(pair), param_hint='--set')
        key, value = pair.split('=', 1)
        options[key.strip().replace('-', '_')] = parse_value(value)
    return options


def run_experiment(ctx, command, flags):
    spec = ExperimentSpec.from_options(get_experiment(command), collect_options(ctx, command, flags))
    result = Runner(spec).run()
    if result.failures:
        return EXIT_FAILED
    return EXIT_OK


def experiment_command(tag):
    """Register a harness command running the experiment ``tag``."""

    def decorator(f):
        def new_func(ctx, **flags):
            return run_experiment(ctx, tag, flags)

        command = update_wrapper(new_func, f)
        return main.command(name=tag)(experiment_options(click.pass_context(configfile(verbose(command)))))

    return decorator


@click.group()
@click.option('--config', 'configfile', default=None, help='Config file, YAML or key=value lines')
@click.option(
    '--logfile',
    default=None,
    type=click.Path(dir_okay=False, writable=True),
    help='Override logfile location (example: ~/pvmw-dp.log)',
)
@click.option('--verbose', '-v', type=int, default=3, help='Verbosity (0-4)')
@click.version_option(VERSION)
@click.pass_context
def main(ctx, **kwargs):
    ctx.obj = {}
    for k, v in kwargs.items():
        ctx.obj[k] = v
    ctx.obj['configfile_given'] = kwargs['configfile'] is not None
    if not kwargs['configfile']:
        ctx.obj['configfile'] = DEFAULT_CONFIG_FILE


@experiment_command('olvq-sweep')
def olvq_sweep():
    """Answer query workloads with private sessions over a grid of n, k, d and budgets."""


@experiment_command('erm-convex')
def erm_convex():
    """Private projected subgradient descent on the convex hard instance."""


@experiment_command('erm-strongly-convex')
def erm_strongly_convex():
    """Private inexact gradient method on the strongly convex hard instance."""


@experiment_command('verify-lemma1')
def verify_lemma1():
    """Monte-Carlo check of the clipped-mean concentration bound."""


@experiment_command('mwu-props')
def mwu_props():
    """Potential decrease and update count of constructed updates."""


@experiment_command('audit')
def audit():
    """Write the privacy ledger of a session as CSV."""


@main.command(name='list')
@click.argument('command', required=False, type=click.Choice(experiment_tags()))
def list_experiments(command):
    """List the experiments, or the options of one experiment."""
    if command is None:
        for experiment in EXPERIMENTS:
            click.echo('{:<22}{}'.format(experiment['tag'], experiment['name']))
        return EXIT_OK
    for element in get_experiment(command).configure():
        click.echo('{:<18}{:<12}{!s:<16}{}'.format(element.key, element.type, element.default, element.description))
    return EXIT_OK


@main.command(name='make-dataset')
@click.option('--n', type=int, required=True, help='Number of examples')
@click.option('--k', type=int, required=True, help='Size of the private domain')
@click.option('--d-pub', type=int, default=0, help='Public features per example')
@click.option('--seed', type=int, default=0)
@click.option('--out', required=True, type=click.Path(dir_okay=False, writable=True), help='JSON-lines file')
def make_dataset(n, k, d_pub, seed, out):
    """Write a synthetic dataset with uniform private values as JSON lines."""
    Dataset.synthetic(n, k, d_pub, seed).to_jsonl(out)
    log.info('wrote {} examples to {}'.format(n, out))
    return EXIT_OK


def entrypoint():
    """Console entry point: 0 on success, 1 on usage errors, 2 when a session or check failed."""
    try:
        code = main(standalone_mode=False)
    except click.exceptions.Abort:
        code = EXIT_USAGE
    except click.ClickException as e:
        e.show()
        code = EXIT_USAGE
    except InvalidSpec as e:
        for field in e.fields:
            alert('{}: {}'.format(field, e.messages.get(field, 'invalid')))
        code = EXIT_USAGE
    except (PvmwError, ValueError) as e:
        alert(str(e))
        code = EXIT_USAGE
    except OSError as e:
        alert(str(e))
        code = EXIT_USAGE
    sys.exit(code if isinstance(code, int) else EXIT_OK)


if __name__ == '__main__':
    entrypoint()
