"""
Property checks of the truncated multiplicative weight update on constructed instances.

Instances are built so that the update preconditions are likely to hold; every instance is still evaluated with
:func:`pvmw_dp.mwu.check_condition1` and only the ones that pass count. For those, one update must lower the
potential by at least eta^2, and a chain of qualifying updates from uniform beliefs must stop before ln k / eta^2
steps.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from pvmw_dp.core import BeliefState, Dataset, Example, TabularQuery, table_belief_mean, table_true_mean
from pvmw_dp.experiments.base import ExperimentBase
from pvmw_dp.experiments.config_parts.verify_config import MwuPropertiesConfig
from pvmw_dp.mwu import MwuParams, check_condition1, mwu_update, potential

log = logging.getLogger(__name__)

PROPERTY_STREAM = 3000
CLIP_CONSTANT = 3.0
DROP_TOLERANCE = 1e-12
RATIO_TOLERANCE = 1e-6
SEQUENCE_ETA_RANGE = (0.005, 0.04)
INSTANCES_PER_SEQUENCE = 25


@dataclass
class UpdateInstance:
    dataset: Dataset
    query: TabularQuery
    beliefs: BeliefState
    v: np.ndarray
    iota: float
    params: MwuParams

    def condition(self):
        return check_condition1(self.beliefs, self.query, self.v, self.iota, self.params, self.dataset)

    def potential_drop(self):
        updated = mwu_update(self.beliefs, self.query, self.v, self.iota, self.params, self.dataset)
        return potential(self.beliefs, self.dataset) - potential(updated, self.dataset)


def property_rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(PROPERTY_STREAM,))))


def _indexed_dataset(rng, n, k):
    return Dataset([Example((i,), int(y)) for i, y in enumerate(rng.integers(0, k, size=n))], k)


def _unit_ball_values(rng, shape):
    values = rng.standard_normal(shape)
    values /= np.linalg.norm(values, axis=-1, keepdims=True)
    return values * rng.random(shape[:-1] + (1,)) ** (1.0 / shape[-1])


def potential_decrease_instance(rng, n_max=16, k_max=8, d_max=8, c=CLIP_CONSTANT):
    """
    One random update instance sized up to ``n_max x k_max`` with queries in dimension up to ``d_max``.

    The learning rate is set just below ``gap / (2c^2 + 7)``, the estimate ``v`` lies within ``eta / 2`` of the true
    mean and the norm bound within a factor two of the gap.

    :return: an :class:`UpdateInstance`, or None when beliefs and truth already agree
    """
    n = int(rng.integers(1, n_max + 1))
    k = int(rng.integers(2, k_max + 1))
    d = int(rng.integers(1, d_max + 1))
    dataset = _indexed_dataset(rng, n, k)
    query = TabularQuery(_unit_ball_values(rng, (n, k, d)))
    if rng.random() < 0.5:
        beliefs = BeliefState.uniform(n, k)
    else:
        beliefs = BeliefState(rng.dirichlet(np.ones(k), size=n))

    table = query.table(dataset)
    true_mean = table_true_mean(table, dataset.private_values)
    gap = float(np.linalg.norm(true_mean - table_belief_mean(table, beliefs.probs)))
    if gap == 0:
        return None

    eta = gap / (2 * c ** 2 + 7 + 5 * rng.random())
    noise = rng.standard_normal(d)
    noise *= 0.5 * eta * rng.random() / np.linalg.norm(noise)
    iota = gap * rng.uniform(0.5, 2.0)
    return UpdateInstance(dataset, query, beliefs, true_mean + noise, iota, MwuParams(eta, c))


def update_sequence(rng, n_max=16, k_max=8, max_steps=10 ** 4, c=CLIP_CONSTANT):
    """
    Chain qualifying updates from uniform beliefs until the preconditions stop holding.

    The query scores +1 on every example's true value and -1 elsewhere, so each update moves the beliefs toward the
    truth and the gap shrinks until it is too small for another update.

    :return: tuple (steps taken, ln k / eta^2, smallest potential drop divided by eta^2)
    """
    n = int(rng.integers(1, n_max + 1))
    k = int(rng.integers(2, k_max + 1))
    eta = float(rng.uniform(*SEQUENCE_ETA_RANGE))
    params = MwuParams(eta, c)
    dataset = _indexed_dataset(rng, n, k)
    values = -np.ones((n, k, 1))
    values[np.arange(n), dataset.private_values, 0] = 1.0
    query = TabularQuery(values, name='truth indicator')
    table = query.table(dataset)
    true_mean = table_true_mean(table, dataset.private_values)

    beliefs = BeliefState.uniform(n, k)
    steps = 0
    min_ratio = math.inf
    while steps < max_steps:
        gap = float(np.linalg.norm(true_mean - table_belief_mean(table, beliefs.probs)))
        instance = UpdateInstance(dataset, query, beliefs, true_mean, gap, params)
        if gap == 0 or not instance.condition().holds:
            break
        min_ratio = min(min_ratio, instance.potential_drop() / eta ** 2)
        beliefs = mwu_update(beliefs, query, true_mean, gap, params, dataset, table=table)
        steps += 1
    return steps, math.log(k) / eta ** 2, min_ratio


class Experiment(ExperimentBase):
    """Potential decrease and update count checks, one row per seed."""

    command = 'mwu-props'
    title = 'Multiplicative weight update properties'
    columns = [
        'seed',
        'instances',
        'accepted',
        'decrease_failures',
        'min_drop_ratio',
        'sequences',
        'max_sequence_steps',
        'max_sequence_ratio',
        'sequence_failures',
        'failed',
    ]

    @classmethod
    def configure(cls, return_base_config=True):
        return MwuPropertiesConfig.configure(return_base_config)

    def run_task(self, point, seed):
        options = self.options
        rng = property_rng(seed)

        accepted = 0
        decrease_failures = 0
        min_drop_ratio = math.inf
        for _ in range(options['instances']):
            instance = potential_decrease_instance(rng, options['n_max'], options['k_max'], options['d_max'])
            if instance is None or not instance.condition().holds:
                continue
            accepted += 1
            drop = instance.potential_drop()
            eta = instance.params.eta
            min_drop_ratio = min(min_drop_ratio, drop / eta ** 2)
            if drop < eta ** 2 - DROP_TOLERANCE:
                decrease_failures += 1
                log.error('potential dropped by {:.6g}, below eta^2 = {:.6g}'.format(drop, eta ** 2))

        sequences = max(1, options['instances'] // INSTANCES_PER_SEQUENCE)
        sequence_failures = 0
        max_steps = 0
        max_ratio = 0.0
        for _ in range(sequences):
            steps, bound, ratio = update_sequence(rng, options['n_max'], options['k_max'], options['max_steps'])
            max_steps = max(max_steps, steps)
            max_ratio = max(max_ratio, steps / bound)
            if steps >= bound or ratio < 1.0 - RATIO_TOLERANCE:
                sequence_failures += 1
                log.error('update sequence of {} steps against a limit of {:.1f}'.format(steps, bound))

        return [
            {
                'seed': seed,
                'instances': options['instances'],
                'accepted': accepted,
                'decrease_failures': decrease_failures,
                'min_drop_ratio': min_drop_ratio if accepted else None,
                'sequences': sequences,
                'max_sequence_steps': max_steps,
                'max_sequence_ratio': max_ratio,
                'sequence_failures': sequence_failures,
                'failed': bool(decrease_failures or sequence_failures),
            }
        ]
