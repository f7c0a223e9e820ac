import io
import os
import pathlib
import re
from collections.abc import MutableMapping

import appdirs
from ruamel.yaml import YAML

from pvmw_dp import APP_NAME, AUTHOR

DEFAULT_CONFIG_DIR = appdirs.user_config_dir(APP_NAME, appauthor=AUTHOR)
DEFAULT_CONFIG_FILE = os.path.join(DEFAULT_CONFIG_DIR, 'config.yml')

KEY_VALUE_LINE = re.compile(r'^\s*([A-Za-z_][\w\-]*)\s*=(.*)$')


def _yaml():
    yaml = YAML(typ='safe', pure=True)
    yaml.default_flow_style = False
    return yaml


def parse_scalar(text):
    """Parse one value: ``1`` -> int, ``0.5`` -> float, ``true`` -> bool, anything else stays the given str."""
    text = text.strip()
    if not text:
        return None
    try:
        value = _yaml().load(text)
    except Exception:
        return text
    if isinstance(value, (bool, int, float)):
        return value
    return text


def parse_value(text):
    """Parse a flag or key=value value; comma separated values become a list."""
    if ',' in text:
        return [parse_scalar(part) for part in text.split(',') if part.strip()]
    return parse_scalar(text)


class Config(MutableMapping):
    """
    Experiment configuration loaded from a file.

    Two formats are accepted: a YAML mapping, or ``key=value`` lines where comma separated values become lists.
    Top-level keys apply to every command; a mapping stored under a command name applies to that command only.

    :param dict config: data written to ``path`` before loading it
    :param str path: path to the config file, defaults to ``config.yml`` in the user config dir
    """

    def __init__(self, config=None, path=None):
        self.config_file = path or DEFAULT_CONFIG_FILE
        if config:
            write_config_file(config, self.config_file)
        self.refresh_config()

    def __getitem__(self, key):
        return self._config[key]

    def __setitem__(self, key, value):
        self._config[key] = value

    def __delitem__(self, key):
        del self._config[key]

    def __iter__(self):
        return iter(self._config)

    def __len__(self):
        return len(self._config)

    def dict(self):
        """Returns a dict instance of the stored data."""
        return self._config

    def options_for(self, command):
        """Options for one command: the shared top-level values overridden by the command's own section."""
        options = {key: value for key, value in self._config.items() if not isinstance(value, dict)}
        section = self._config.get(command)
        if isinstance(section, dict):
            options.update(section)
        return options

    def save_config(self):
        write_config_file(self._config, self.config_file)

    def refresh_config(self):
        """(Re)read the file; a missing file is an empty config."""
        if os.path.isfile(self.config_file):
            self._config = read_config_file(self.config_file)
        else:
            self._config = {}


def write_config_file(config, path):
    pathlib.Path(os.path.dirname(path) or '.').mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        _yaml().dump(dict(config), f)


def read_config_file(path):
    with open(path, 'r') as f:
        return parse_config_text(f.read())


def parse_config_text(text):
    lines = [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith('#')]
    if lines and all(KEY_VALUE_LINE.match(line) for line in lines):
        data = {}
        for line in lines:
            key, value = KEY_VALUE_LINE.match(line).groups()
            data[key.replace('-', '_')] = parse_value(value)
        return data

    data = _yaml().load(io.StringIO(text))
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError('config file must hold a mapping, got {}'.format(type(data).__name__))
    return dict(data)
