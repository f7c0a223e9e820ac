import collections

""" Experiments need to specify their own configuration values, so each experiment has a class method 'configure'
    which returns a list of ConfigElement named tuples.

    Tuple fields as follows:
        - Key: The option name, as used in config files and on the command line (dashes become underscores)
        - Type: "int", "float", "bool", "string", "choice", "int_list" or "float_list"
        - Default: The default value, must be same type as the Type defined; None means "not set"
        - Title: Name shown to the user, preferably not too long
        - Description: Comments to user, full sentences encouraged
        - Extra:
              :int, int_list: a (min, max, suffix) tuple
              :float, float_list: a (min, max, precision, suffix) tuple
              :string: a regular expression, entries must match it, can be None which equivalent to .*
              :bool, ignored
              :choice: a list of choices, choices are in turn (tag, label) tuples.
              NOTE: 'labels' get presented to user, and 'tag' is used as the value!
"""
ConfigElement = collections.namedtuple('ConfigElement', 'key type default title description extra')


class BaseConfig:
    @classmethod
    def configure(cls, return_base_config=True):
        """
        Return a list of ConfigElement objects defining the configuration values for this class.

        NOTE: When overriding you almost certainly will want to call the ancestor and then
        add your config values to the list.

        :param return_base_config: bool:
        :return: Returns a list of config elements
        """

        # Common configs
        base_config = [
            ConfigElement(
                'seeds', 'int_list', [0], 'Seeds', 'Distinct seeds; every grid point runs once per seed', (0, None, '')
            ),
            ConfigElement('out', 'string', '-', 'Output', 'CSV output path, "-" writes to stdout', None),
            ConfigElement(
                'debug_nonprivate',
                'bool',
                False,
                'Non-private debug',
                'Measure errors against the exact answers; the CSV is marked NONPRIVATE_DEBUG=1',
                None,
            ),
            ConfigElement('workers', 'int', 1, 'Workers', 'Size of the worker pool', (1, 256, '')),
            ConfigElement(
                'transcript', 'string', '', 'Transcript', 'JSON-lines file receiving one record per answer', None
            ),
        ]

        if return_base_config:
            return base_config
        return []


class BudgetConfig(BaseConfig):
    """Privacy budget options shared by the experiments that open private sessions."""

    @classmethod
    def configure(cls, return_base_config=True):
        config = [
            ConfigElement('rho', 'float_list', [1.0], 'rho', 'zCDP budgets to sweep', (0, None, 6, '')),
            ConfigElement(
                'eps',
                'float_list',
                None,
                'epsilon',
                'Target epsilons; when set, rho is derived per epsilon for the given delta',
                (0, None, 6, ''),
            ),
            ConfigElement('delta', 'float', None, 'delta', 'Target delta, in (0, 1/2)', (0, 0.5, 12, '')),
            ConfigElement(
                'replicate',
                'int',
                1,
                'Replication',
                'Repeat every example r times, report group privacy; 0 derives r = floor(ln k / eps)',
                (0, 10 ** 6, ''),
            ),
        ]
        return BaseConfig.configure(return_base_config) + config
