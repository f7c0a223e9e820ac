from pvmw_dp.erm.solvers import DEFAULT_Q_CAP
from pvmw_dp.experiments.config_parts.base_config import BudgetConfig, ConfigElement


class ErmConfig(BudgetConfig):
    """Options shared by both ERM experiments."""

    @classmethod
    def configure(cls, return_base_config=True):
        config = [
            ConfigElement('n', 'int_list', [256], 'Examples', 'Dataset sizes to sweep', (1, None, '')),
            ConfigElement('k', 'int_list', [4], 'Private domain', 'Sizes of the private value domain', (2, None, '')),
            ConfigElement('m', 'int', 1, 'Problems', 'Problems solved against one shared session', (1, None, '')),
            ConfigElement(
                'q',
                'int',
                None,
                'Steps',
                'Gradient steps per problem, defaults to the step count of the analysis',
                (1, None, ''),
            ),
            ConfigElement('G', 'float', 1.0, 'Lipschitz constant', 'Bound on the gradient norms', (0, None, 6, '')),
            ConfigElement(
                'beta', 'float', None, 'Failure probability', 'Defaults to min(1/n, 0.4)', (0, 1, 6, '')
            ),
            ConfigElement(
                'exact',
                'bool',
                False,
                'Exact gradients',
                'Use exact gradients instead of a private session; NOT private, implies non-private debug',
                None,
            ),
        ]
        return BudgetConfig.configure(return_base_config) + config


class ErmConvexConfig(ErmConfig):
    @classmethod
    def configure(cls, return_base_config=True):
        config = [
            ConfigElement('R', 'float', 1.0, 'Radius', 'Radius of the feasible ball', (0, None, 6, '')),
            ConfigElement(
                'q_cap', 'int', DEFAULT_Q_CAP, 'Step cap', 'Upper limit for the default step count n^2', (1, None, '')
            ),
        ]
        return ErmConfig.configure(return_base_config) + config


class ErmStronglyConvexConfig(ErmConfig):
    @classmethod
    def configure(cls, return_base_config=True):
        config = [
            ConfigElement('mu', 'float', 1.0, 'Strong convexity', 'Strong convexity constant', (0, None, 6, '')),
        ]
        return ErmConfig.configure(return_base_config) + config
