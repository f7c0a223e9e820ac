import logging

import numpy as np

from pvmw_dp.experiments.base import ExperimentBase
from pvmw_dp.experiments.config_parts.verify_config import ClipConcentrationConfig
from pvmw_dp.mechanisms import NoiseRole, NoiseSource, verify_clip_concentration

log = logging.getLogger(__name__)

INSTANCE_STREAM = 2000
STANDARD_ERRORS = 3.0
MAX_MEAN_NORM = 2.0


def random_instance(rng, support, d):
    """
    A finite distribution inside the unit ball and a Gaussian mean of norm at most 2.

    :return: tuple (support points, weights, mu_z)
    """
    points = rng.standard_normal((support, d))
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    points *= rng.random(support)[:, None] ** (1.0 / d)
    weights = rng.dirichlet(np.ones(support))
    mu_z = rng.standard_normal(d)
    mu_z *= MAX_MEAN_NORM * rng.random() / np.linalg.norm(mu_z)
    return points, weights, mu_z


def instance_rng(seed, d):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(INSTANCE_STREAM, int(d)))))


class Experiment(ExperimentBase):
    """
    Monte-Carlo check of the clipped-mean concentration bound on random instances.

    A row fails when the measured failure rate exceeds the closed-form bound by more than three standard errors.
    """

    command = 'verify-lemma1'
    title = 'Clipped-mean concentration check'
    grid_keys = ('sigma_z', 'd')
    columns = [
        'sigma_z',
        'd',
        'support',
        'mu_norm',
        'trials',
        'seed',
        'failures',
        'failure_rate',
        'bound',
        'standard_error',
        'limit',
        'failed',
    ]

    @classmethod
    def configure(cls, return_base_config=True):
        return ClipConcentrationConfig.configure(return_base_config)

    @classmethod
    def validate(cls, values, errors):
        super().validate(values, errors)
        if any(s <= 0 for s in values.get('sigma_z') or []):
            errors['sigma_z'] = 'sigma_z must be in (0, 1]'

    def run_task(self, point, seed):
        sigma_z, d = point['sigma_z'], point['d']
        support, weights, mu_z = random_instance(instance_rng(seed, d), self.options['support'], d)
        result = verify_clip_concentration(
            support, weights, mu_z, sigma_z, self.options['trials'], NoiseSource(seed, NoiseRole.GAUSSIAN)
        )
        limit = result.bound + STANDARD_ERRORS * result.standard_error
        failed = result.failure_rate > limit
        if failed:
            log.error(
                'sigma_z={} d={} seed={}: failure rate {:.6f} above {:.6f}'.format(
                    sigma_z, d, seed, result.failure_rate, limit
                )
            )
        return [
            {
                'sigma_z': sigma_z,
                'd': d,
                'support': self.options['support'],
                'mu_norm': float(np.linalg.norm(mu_z)),
                'trials': result.trials,
                'seed': seed,
                'failures': result.failures,
                'failure_rate': result.failure_rate,
                'bound': result.bound,
                'standard_error': result.standard_error,
                'limit': limit,
                'failed': failed,
            }
        ]
