"""
Benchmark instances with closed-form optima.

Both instances use the public payload ``(i,)`` and put example ``i`` with private value ``y`` on coordinate
``j = i * k + y`` of a ``d = n * k`` dimensional space. Their gradient queries are sparse tables, so they stay cheap
at sizes where a dense ``(n * k) x d`` table would not fit in memory.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from pvmw_dp.core import Dataset, Example, LinearVectorQuery, QueryTable
from pvmw_dp.erm.problem import ErmProblem
from pvmw_dp.errors import MemoryGuardExceeded

log = logging.getLogger(__name__)

MAX_DIMENSION = 2 ** 24


@dataclass
class HardInstance:
    problem: ErmProblem
    dataset: Dataset
    optimum_w: np.ndarray
    optimum_value: float

    def excess_risk(self, w):
        return self.problem.loss(w, self.dataset) - self.optimum_value


def _check_size(n, k, max_dimension):
    if n < 1 or k < 2:
        raise ValueError('need n >= 1 and k >= 2, got n={} k={}'.format(n, k))
    if n * k > max_dimension:
        raise MemoryGuardExceeded(
            'hard instance needs d = n*k = {} dimensions, above the guard of {}'.format(n * k, max_dimension)
        )


def _indexed_dataset(n, k, seed):
    rng = np.random.default_rng(seed)
    private_values = rng.integers(0, k, size=n)
    return Dataset([Example((i,), int(y)) for i, y in enumerate(private_values)], k)


def coordinates(dataset):
    """Coordinate ``j(x) = i * k + y`` of every example."""
    index = np.fromiter((int(x.public_payload[0]) for x in dataset), dtype=np.int64, count=dataset.n)
    return index * dataset.k + dataset.private_values


def _cell_indicators(dataset, dim, value):
    """Sparse ``(n * k) x dim`` table with ``value`` at column ``j(x_i, y)`` of every cell."""
    index = np.fromiter((int(x.public_payload[0]) for x in dataset), dtype=np.int64, count=dataset.n)
    columns = (index[:, None] * dataset.k + np.arange(dataset.k)[None, :]).ravel()
    rows = np.arange(dataset.n * dataset.k)
    data = np.full(rows.size, float(value))
    return sparse.csr_matrix((data, (rows, columns)), shape=(dataset.n * dataset.k, dim))


def _indicator_mean(dataset, dim):
    mean = np.zeros(dim)
    np.add.at(mean, coordinates(dataset), 1.0 / dataset.n)
    return mean


def hard_instance_convex(n, k, R=1.0, G=1.0, seed=0, max_dimension=MAX_DIMENSION):
    """
    Linear loss ``-G <w, e_j(x)>`` over the ball of radius R.

    The optimum is ``(R / sqrt(n)) sum_i e_j(x_i)`` with value ``-RG / sqrt(n)``.
    """
    _check_size(n, k, max_dimension)
    dim = n * k
    dataset = _indexed_dataset(n, k, seed)
    tables = {}

    def j(x):
        return int(x.public_payload[0]) * k + x.private_value

    def per_example_loss(w, x):
        return -G * float(w[j(x)])

    def per_example_gradient(w, x):
        g = np.zeros(dim)
        g[j(x)] = -G
        return g

    def mean_loss(w, data):
        return -G * float(np.mean(np.asarray(w)[coordinates(data)]))

    def mean_gradient(w, data):
        return -G * _indicator_mean(data, dim)

    def gradient_query(w, scale):
        # The gradient does not depend on w, so one table per (dataset, scale) serves every step
        def build(data):
            key = (id(data), scale)
            if key not in tables:
                tables.clear()
                tables[key] = (data, QueryTable(_cell_indicators(data, dim, -G / scale), data.n, data.k))
            return tables[key][1]

        return LinearVectorQuery(dim, table_builder=build, name='convex hard instance gradient')

    problem = ErmProblem(
        per_example_gradient,
        per_example_loss,
        G=G,
        dim=dim,
        R=R,
        name='convex-hard',
        gradient_query=gradient_query,
        mean_gradient=mean_gradient,
        mean_loss=mean_loss,
    )
    optimum_w = (R / np.sqrt(n)) * np.bincount(coordinates(dataset), minlength=dim).astype(float)
    optimum_value = -R * G / np.sqrt(n)
    return HardInstance(problem, dataset, optimum_w, float(optimum_value))


def hard_instance_strongly_convex(n, k, G=1.0, mu=1.0, seed=0, max_dimension=MAX_DIMENSION):
    """
    Squared loss ``(mu / 2) ||w - R e_j(x)||^2`` with ``R = G / (2 mu)``.

    The loss is mu-strongly convex, mu-smooth and G-Lipschitz on the ball of radius R. The optimum is the mean target
    ``(R / n) sum_i e_j(x_i)`` and ``L(w) - L(w*) = (mu / 2) ||w - w*||^2``.
    """
    _check_size(n, k, max_dimension)
    if not mu > 0:
        raise ValueError('strong convexity constant must be positive, got {}'.format(mu))
    dim = n * k
    R = 0.5 * G / mu
    dataset = _indexed_dataset(n, k, seed)
    tables = {}

    def j(x):
        return int(x.public_payload[0]) * k + x.private_value

    def per_example_loss(w, x):
        diff = np.array(w, dtype=float)
        diff[j(x)] -= R
        return 0.5 * mu * float(diff @ diff)

    def per_example_gradient(w, x):
        g = mu * np.array(w, dtype=float)
        g[j(x)] -= mu * R
        return g

    def mean_loss(w, data):
        w = np.asarray(w, dtype=float)
        return 0.5 * mu * (float(w @ w) - 2.0 * R * float(np.mean(w[coordinates(data)])) + R ** 2)

    def mean_gradient(w, data):
        return mu * (np.asarray(w, dtype=float) - R * _indicator_mean(data, dim))

    def gradient_query(w, scale):
        offset = (mu / scale) * w

        def build(data):
            key = (id(data), scale)
            if key not in tables:
                tables.clear()
                tables[key] = (data, _cell_indicators(data, dim, -mu * R / scale))
            return QueryTable(tables[key][1], data.n, data.k, offset=offset)

        return LinearVectorQuery(dim, table_builder=build, name='strongly convex hard instance gradient')

    problem = ErmProblem(
        per_example_gradient,
        per_example_loss,
        G=G,
        dim=dim,
        R=R,
        mu=mu,
        lam=mu,
        name='strongly-convex-hard',
        gradient_query=gradient_query,
        mean_gradient=mean_gradient,
        mean_loss=mean_loss,
    )
    optimum_w = R * _indicator_mean(dataset, dim)
    optimum_value = mean_loss(optimum_w, dataset)
    return HardInstance(problem, dataset, optimum_w, float(optimum_value))


def replicate_examples(dataset, r):
    """Repeat every example ``r`` times in place: AB becomes AAABBB for r = 3."""
    if int(r) != r or r < 1:
        raise ValueError('replication factor must be a positive integer, got {}'.format(r))
    if r == 1:
        return dataset
    return Dataset([x for x in dataset for _ in range(int(r))], dataset.k)
