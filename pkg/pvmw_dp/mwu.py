"""
Truncated multiplicative weight update over per-example beliefs.

Besides the update itself this module holds the potential and the clipped means the update analysis is stated in,
plus :func:`check_condition1`, which evaluates the analysis' preconditions exactly. That check reads the true
dataset mean, so it is a test and diagnostics helper and must never feed a released answer.
"""
import logging
from dataclasses import dataclass, fields

import numpy as np

from pvmw_dp.core import (
    BeliefState,
    enforce_unit_ball,
    one_hot_weights,
    table_belief_mean,
    table_true_mean,
)
from pvmw_dp.errors import DimensionMismatch, PotentialDiverged
from pvmw_dp.mechanisms import ZERO_INNER_PRODUCT, trunc

log = logging.getLogger(__name__)

ETA_C_SLACK = 1e-12


@dataclass(frozen=True)
class MwuParams:
    eta: float
    c: float = 3.0

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError('learning rate must be positive, got {}'.format(self.eta))
        if not self.c > 0:
            raise ValueError('truncation bound must be positive, got {}'.format(self.c))
        if self.eta * self.c > 1.0 + ETA_C_SLACK:
            raise ValueError('learning rate {} exceeds 1/c = {}'.format(self.eta, 1.0 / self.c))


def _query_table(f, dataset, table):
    if table is None:
        table, _ = enforce_unit_ball(f.table(dataset), f.name)
    return table


def _check_vector(v, dim, what):
    v = np.asarray(v, dtype=float).ravel()
    if v.shape != (dim,):
        raise DimensionMismatch('{} has dimension {}, query has {}'.format(what, v.size, dim))
    return v


def mwu_update(p, f, v, iota, params, dataset, table=None):
    """
    One multiplicative weight step toward the estimated value ``v``.

    :param BeliefState p: current beliefs, left untouched
    :param f: the query, ignored when a precomputed ``table`` is given
    :param v: estimated value of the query on the dataset
    :param float iota: positive norm bound the direction is divided by
    :param MwuParams params: learning rate and truncation bound
    :return: the updated :class:`BeliefState`
    """
    if not iota > 0:
        raise ValueError('norm bound must be positive, got {}'.format(iota))
    p.check_matches(dataset)
    table = _query_table(f, dataset, table)
    v = _check_vector(v, table.dim, 'estimated value')

    phi = (v - table_belief_mean(table, p.probs)) / iota
    exponents = params.eta * trunc(table.dot(phi), params.c)
    exponents -= exponents.max(axis=1, keepdims=True)
    weights = p.probs * np.exp(exponents)
    weights /= weights.sum(axis=1, keepdims=True)
    return BeliefState(weights)


def potential(p, dataset):
    """Average negative log-belief of the true private values."""
    p.check_matches(dataset)
    truth = p.probs[np.arange(dataset.n), dataset.private_values]
    zero = np.flatnonzero(truth <= 0)
    if zero.size:
        raise PotentialDiverged(int(zero[0]))
    return float(np.mean(-np.log(truth)))


def _clip_factors(table, phi, c):
    inner = np.abs(table.dot(phi))
    factors = np.ones_like(inner)
    active = inner >= ZERO_INNER_PRODUCT
    factors[active] = np.minimum(1.0, c / inner[active])
    return factors


def clipped_true_mean(f, dataset, phi, c, table=None):
    table = _query_table(f, dataset, table)
    phi = _check_vector(phi, table.dim, 'direction')
    weights = one_hot_weights(dataset.private_values, dataset.k) * _clip_factors(table, phi, c)
    return table.weighted_sum(weights) / dataset.n


def clipped_belief_mean(f, p, dataset, phi, c, table=None):
    p.check_matches(dataset)
    table = _query_table(f, dataset, table)
    phi = _check_vector(phi, table.dim, 'direction')
    return table.weighted_sum(p.probs * _clip_factors(table, phi, c)) / dataset.n


@dataclass(frozen=True)
class Condition1Report:
    overall_error_large: bool
    noise_direction_small: bool
    clip_error_true: bool
    clip_error_beliefs: bool
    norm_bound_lower: bool
    norm_bound_accurate: bool

    @property
    def holds(self):
        return all(getattr(self, item.name) for item in fields(self))

    def failed_items(self):
        return [item.name for item in fields(self) if not getattr(self, item.name)]


def check_condition1(p_prev, f, v, iota, params, dataset, table=None):
    """Evaluate the six preconditions under which one update lowers the potential by at least eta^2."""
    p_prev.check_matches(dataset)
    table = _query_table(f, dataset, table)
    v = _check_vector(v, table.dim, 'estimated value')
    eta, c = params.eta, params.c

    true_mean = table_true_mean(table, dataset.private_values)
    belief_mean = table_belief_mean(table, p_prev.probs)
    gap = true_mean - belief_mean
    gap_norm = float(np.linalg.norm(gap))
    direction = v - belief_mean
    phi = direction / iota if iota > 0 else np.zeros_like(direction)

    clip_true = clipped_true_mean(f, dataset, phi, c, table=table)
    clip_beliefs = clipped_belief_mean(f, p_prev, dataset, phi, c, table=table)

    return Condition1Report(
        overall_error_large=gap_norm >= (2 * c ** 2 + 7) * eta,
        noise_direction_small=float(np.dot(true_mean - v, belief_mean - true_mean)) <= eta * gap_norm,
        clip_error_true=abs(float(np.dot(direction, clip_true - true_mean))) <= eta ** 2,
        clip_error_beliefs=abs(float(np.dot(direction, clip_beliefs - belief_mean))) <= eta ** 2,
        norm_bound_lower=iota >= eta,
        norm_bound_accurate=iota <= 2 * gap_norm,
    )
