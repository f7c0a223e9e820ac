from pvmw_dp.experiments.config_parts.base_config import BudgetConfig, ConfigElement
from pvmw_dp.workloads import QueryFamily


class OlvqConfig(BudgetConfig):
    @classmethod
    def configure(cls, return_base_config=True):
        config = [
            ConfigElement('n', 'int_list', [1024], 'Examples', 'Dataset sizes to sweep', (1, None, '')),
            ConfigElement('k', 'int_list', [16], 'Private domain', 'Sizes of the private value domain', (2, None, '')),
            ConfigElement('d', 'int_list', [32], 'Dimension', 'Output dimensions of the queries', (1, None, '')),
            ConfigElement('T', 'int', 64, 'Queries', 'Number of queries answered per session', (1, None, '')),
            ConfigElement(
                'beta', 'float', 0.1, 'Failure probability', 'Chance the accuracy guarantee fails', (0, 1, 6, '')
            ),
            ConfigElement(
                'zeta', 'float', 0.5, 'Budget split', 'Share of rho spent on the threshold tests', (0, 1, 6, '')
            ),
            ConfigElement('c', 'float', 3.0, 'Clip constant', 'Truncation of the update step', (0, None, 6, '')),
            ConfigElement(
                'eta',
                'float',
                None,
                'Learning rate override',
                'Use this learning rate instead of the solved one; the privacy accounting follows it',
                (0, None, 12, ''),
            ),
            ConfigElement(
                'query_family',
                'choice',
                QueryFamily.RANDOM_TABLE.value,
                'Query family',
                'Workload answered by every session',
                [
                    (QueryFamily.RANDOM_TABLE.value, 'Random unit vector per cell'),
                    (QueryFamily.CONSTANT_PUBLIC.value, 'Depends on public features only'),
                    (QueryFamily.GRADIENT.value, 'Softmax regression gradients'),
                ],
            ),
        ]
        return BudgetConfig.configure(return_base_config) + config
