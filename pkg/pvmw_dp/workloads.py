"""
Built-in query families for the experiment harness.

Every family is deterministic in ``(seed, t)``: query ``t`` draws its randomness from its own numpy stream, so
workloads of different lengths agree on their common prefix. Tables are keyed by the public index (the first
public coordinate), so replicated examples get identical query values.
"""
import enum
import logging

import numpy as np

from pvmw_dp.core import LinearVectorQuery, QueryTable

log = logging.getLogger(__name__)

WORKLOAD_STREAM = 1000


class QueryFamily(enum.Enum):
    RANDOM_TABLE = 'RANDOM_TABLE'
    CONSTANT_PUBLIC = 'CONSTANT_PUBLIC'
    GRADIENT = 'GRADIENT'

    @classmethod
    def choices(cls):
        return [member.value for member in cls]


def query_rng(seed, t):
    seed_sequence = np.random.SeedSequence(int(seed), spawn_key=(WORKLOAD_STREAM, int(t)))
    return np.random.Generator(np.random.PCG64(seed_sequence))


def public_index(dataset):
    return np.fromiter((int(x.public_payload[0]) for x in dataset), dtype=np.int64, count=dataset.n)


def public_features(dataset):
    return np.array([x.public_payload[1:] for x in dataset], dtype=float).reshape(dataset.n, -1)


def _unit_vectors(rng, shape):
    vectors = rng.standard_normal(shape)
    vectors /= np.linalg.norm(vectors, axis=-1, keepdims=True)
    return vectors


def random_table_query(d, seed, t):
    """A fixed random unit vector for every (public index, private value) cell."""

    def build(dataset):
        index = public_index(dataset)
        values = _unit_vectors(query_rng(seed, t), (int(index.max()) + 1, dataset.k, d))
        return QueryTable(values[index].reshape(dataset.n * dataset.k, d), dataset.n, dataset.k)

    return LinearVectorQuery(d, table_builder=build, name='random-table[{}]'.format(t))


def constant_public_query(d, seed, t):
    """A random unit vector per public index, the same for every private value."""

    def build(dataset):
        index = public_index(dataset)
        values = _unit_vectors(query_rng(seed, t), (int(index.max()) + 1, d))[index]
        return QueryTable(np.repeat(values, dataset.k, axis=0), dataset.n, dataset.k)

    return LinearVectorQuery(d, table_builder=build, name='constant-public[{}]'.format(t))


def gradient_query(k, d_features, seed, t):
    """
    Cross-entropy gradient of a random linear softmax model, divided by sqrt(2).

    For features x and label y the gradient with respect to the ``k x d_features`` weights is
    ``(softmax(Wx) - e_y) x^T``, whose norm is at most ``sqrt(2) ||x||``.
    """
    d = k * d_features

    def build(dataset):
        features = public_features(dataset)
        if features.shape[1] != d_features:
            raise ValueError(
                'gradient queries need {} public features, dataset has {}'.format(d_features, features.shape[1])
            )
        weights = query_rng(seed, t).standard_normal((k, d_features))
        logits = features @ weights.T
        logits -= logits.max(axis=1, keepdims=True)
        probs = np.exp(logits)
        probs /= probs.sum(axis=1, keepdims=True)
        # residual[i, y] = softmax(W x_i) - e_y, shape (n, k_label, k_class)
        residual = probs[:, None, :] - np.eye(k)[None, :, :]
        values = residual[:, :, :, None] * features[:, None, None, :]
        return QueryTable(values.reshape(dataset.n * k, d) / np.sqrt(2.0), dataset.n, dataset.k)

    return LinearVectorQuery(d, table_builder=build, name='gradient[{}]'.format(t))


def feature_dimension(family, d, k):
    """Number of public features a synthetic dataset needs for a family at output dimension d."""
    if QueryFamily(family) is QueryFamily.GRADIENT:
        return max(1, d // k)
    return 0


def make_workload(family, dataset, d, T, seed):
    """Yield the ``T`` queries of a family in order."""
    family = QueryFamily(family)
    for t in range(T):
        if family is QueryFamily.RANDOM_TABLE:
            yield random_table_query(d, seed, t)
        elif family is QueryFamily.CONSTANT_PUBLIC:
            yield constant_public_query(d, seed, t)
        else:
            yield gradient_query(dataset.k, feature_dimension(family, d, dataset.k), seed, t)
