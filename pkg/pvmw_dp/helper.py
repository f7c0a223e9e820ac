import hashlib
import json
import logging
import os

from appdirs import user_data_dir

from pvmw_dp import APP_NAME, AUTHOR

TRANSCRIPT_LOGGER = 'pvmw_dp.transcript'


def mkdir(d):
    try:
        os.makedirs(d)
    except FileExistsError:
        return
    except OSError:
        raise


def get_user_data_directory():
    """Returns the user data directory path which contains logs and transcripts."""
    return user_data_dir(APP_NAME, AUTHOR)


def initialize_data_folders():
    """Creates folders for logs and transcripts."""
    user_data_directory = get_user_data_directory()
    mkdir(os.path.join(user_data_directory, 'logs'))
    mkdir(os.path.join(user_data_directory, 'transcripts'))


def ensure_parent_dir(path):
    parent = os.path.dirname(os.path.abspath(path))
    mkdir(parent)


def initialize_transcript_log(filename):
    """
    Route session transcript records into a JSON-lines file.

    Records are emitted by :class:`pvmw_dp.pvmw.PvmwSession` on the ``pvmw_dp.transcript`` logger, one JSON object per
    answered query. Calling this again with another file replaces the previous handler.

    :param str filename: path of the .jsonl file, appended to if it exists
    :return: the configured logger
    """
    ensure_parent_dir(filename)
    formatter = logging.Formatter('%(message)s')
    logger = logging.getLogger(TRANSCRIPT_LOGGER)

    for handler in list(logger.handlers):
        if isinstance(handler, logging.FileHandler):
            logger.removeHandler(handler)
            handler.close()

    file_handler = logging.FileHandler(filename)
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)
    logger.setLevel(logging.INFO)
    logger.propagate = False
    return logger


def close_transcript_log():
    logger = logging.getLogger(TRANSCRIPT_LOGGER)
    for handler in list(logger.handlers):
        if isinstance(handler, logging.FileHandler):
            logger.removeHandler(handler)
            handler.close()


def canonical_json(data):
    return json.dumps(data, sort_keys=True, separators=(',', ':'), default=_json_default)


def config_hash(data):
    """
    Short stable digest of an experiment configuration.

    The digest is taken over canonical JSON (sorted keys, no whitespace), so two runs with the same options and seed
    get the same hash regardless of dict ordering.
    """
    return hashlib.sha256(canonical_json(data).encode('utf-8')).hexdigest()[:16]


def _json_default(value):
    # numpy scalars and arrays
    if hasattr(value, 'tolist'):
        return value.tolist()
    raise TypeError('not JSON serializable: {!r}'.format(type(value)))
