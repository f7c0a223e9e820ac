from pvmw_dp.experiments.config_parts.base_config import BaseConfig, BudgetConfig, ConfigElement
from pvmw_dp.mechanisms import MIN_CONCENTRATION_TRIALS


class ClipConcentrationConfig(BaseConfig):
    @classmethod
    def configure(cls, return_base_config=True):
        config = [
            ConfigElement(
                'sigma_z', 'float_list', [0.1, 0.15, 0.2], 'Noise levels', 'Standard deviations of Z', (0, 1, 6, '')
            ),
            ConfigElement('d', 'int_list', [8], 'Dimension', 'Dimensions of the support points', (1, None, '')),
            ConfigElement('support', 'int', 32, 'Support size', 'Number of support points of P', (1, None, '')),
            ConfigElement(
                'trials', 'int', 10 ** 5, 'Trials', 'Monte-Carlo trials per point', (MIN_CONCENTRATION_TRIALS, None, '')
            ),
        ]
        return BaseConfig.configure(return_base_config) + config


class MwuPropertiesConfig(BaseConfig):
    @classmethod
    def configure(cls, return_base_config=True):
        config = [
            ConfigElement('instances', 'int', 500, 'Instances', 'Random instances checked per seed', (1, None, '')),
            ConfigElement('n_max', 'int', 16, 'Largest n', 'Upper limit for the random dataset size', (1, None, '')),
            ConfigElement('k_max', 'int', 8, 'Largest k', 'Upper limit for the private domain size', (2, None, '')),
            ConfigElement('d_max', 'int', 8, 'Largest d', 'Upper limit for the query dimension', (1, None, '')),
            ConfigElement(
                'max_steps', 'int', 10 ** 4, 'Step limit', 'Limit for one update sequence', (1, None, '')
            ),
        ]
        return BaseConfig.configure(return_base_config) + config


class AuditConfig(BudgetConfig):
    @classmethod
    def configure(cls, return_base_config=True):
        config = [
            ConfigElement('n', 'int_list', [2048], 'Examples', 'Dataset sizes', (1, None, '')),
            ConfigElement('k', 'int_list', [16], 'Private domain', 'Sizes of the private value domain', (2, None, '')),
            ConfigElement('T', 'int', 64, 'Queries', 'Query budget of the audited session', (1, None, '')),
            ConfigElement(
                'beta', 'float', 0.1, 'Failure probability', 'Chance the accuracy guarantee fails', (0, 1, 6, '')
            ),
            ConfigElement(
                'zeta', 'float', 0.5, 'Budget split', 'Share of rho spent on the threshold tests', (0, 1, 6, '')
            ),
            ConfigElement(
                'eta', 'float', None, 'Learning rate override', 'Audit a session with this rate', (0, None, 12, '')
            ),
        ]
        return BudgetConfig.configure(return_base_config) + config
