import logging
import os
import os.path
from functools import update_wrapper

import click

from pvmw_dp import VERSION
from pvmw_dp.config import Config
from pvmw_dp.helper import get_user_data_directory, mkdir

log = logging.getLogger(__name__)

VERBOSITY = ["critical", "error", "warn", "info", "debug"]


def _reset_handlers(logger):
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


def verbose(f):
    @click.pass_context
    def new_func(ctx, *args, **kwargs):
        verbosity = VERBOSITY[int(min(max(ctx.obj.get("verbose", 0), 0), 4))]
        if verbosity == "debug":
            # When debugging: log where the log call came from
            formatter1 = logging.Formatter('%(asctime)s (%(module)s:%(lineno)d) - %(levelname)s - %(message)s')
            formatter2 = logging.Formatter(
                '%(asctime)s (%(module)s:%(lineno)d) - %(session_name)s - %(levelname)s - %(message)s'
            )
        else:
            formatter1 = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
            formatter2 = logging.Formatter(
                '%(asctime)s - %(session_name)s on n=%(n)s k=%(k)s - %(levelname)s - %(message)s'
            )

        # Use special format for special sessions logger
        logger = logging.getLogger("pvmw_dp.per_session")
        _reset_handlers(logger)
        logger.setLevel(getattr(logging, verbosity.upper()))
        ch = logging.StreamHandler()
        ch.setFormatter(formatter2)
        logger.addHandler(ch)

        # Logging to a file
        filename = ctx.obj.get('logfile')
        if not filename:
            # By default, log to a user data dir
            log_dir = os.path.join(get_user_data_directory(), 'logs')
            mkdir(log_dir)
            filename = os.path.join(log_dir, 'pvmw-dp.log')

        fh = logging.FileHandler(filename)
        fh.setFormatter(formatter2)
        logger.addHandler(fh)

        logger.propagate = False  # Don't double up with root logger
        # Configure root logger
        root_logger = logging.getLogger("pvmw_dp")
        _reset_handlers(root_logger)
        ch = logging.StreamHandler()
        ch.setFormatter(formatter1)
        root_logger.addHandler(ch)
        fh = logging.FileHandler(filename)
        fh.setFormatter(formatter1)
        root_logger.addHandler(fh)
        root_logger.setLevel(getattr(logging, verbosity.upper()))
        logging.getLogger("").handlers = []

        # Print logfile using main logger
        root_logger.info('pvmw-dp version {}, logfile: {}'.format(VERSION, filename))

        return ctx.invoke(f, *args, **kwargs)

    return update_wrapper(new_func, f)


def configfile(f):
    @click.pass_context
    def new_func(ctx, *args, **kwargs):
        path = ctx.obj["configfile"]
        if path and os.path.isfile(path):
            ctx.config = Config(path=path)
        elif ctx.obj.get("configfile_given"):
            raise click.BadParameter('config file {} does not exist'.format(path), param_hint='--config')
        else:
            ctx.config = Config(path=path)
        return ctx.invoke(f, *args, **kwargs)

    return update_wrapper(new_func, f)


def alert(msg):
    click.echo("[" + click.style("Alert", fg="red") + "] " + msg, err=True)
