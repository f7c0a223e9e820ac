"""
Domain types shared by every other module.

A :class:`Dataset` holds ``n`` examples, each made of an opaque public payload and a private value in ``[0, k)``.
A :class:`LinearVectorQuery` maps every (public payload, private value) pair into the Euclidean unit ball of
dimension ``d``. Evaluating a query against a dataset materializes a :class:`QueryTable` with one row per
(example, private value) cell, so the true mean, the belief-weighted mean and the MWU update all become two matrix
products over the same table.
"""
import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Tuple

import numpy as np
from scipy import sparse

from pvmw_dp.errors import DimensionMismatch, InvalidDataset, UnitBallViolation

log = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-9
UNIT_BALL_SLACK = 1e-12


@dataclass(frozen=True)
class Example:
    public_payload: Tuple[Any, ...]
    private_value: int


def _private_value(raw, where):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise InvalidDataset('{}: "priv" must be an integer, got {!r}'.format(where, raw))
    if isinstance(raw, float) and not raw.is_integer():
        raise InvalidDataset('{}: "priv" must be an integer, got {!r}'.format(where, raw))
    return int(raw)


class Dataset:
    """
    Ordered, immutable collection of examples over a private domain of size ``k``.

    :param examples: iterable of :class:`Example` or ``(public_payload, private_value)`` pairs
    :param int k: size of the private domain, at least 2
    """

    def __init__(self, examples, k):
        k = int(k)
        if k < 2:
            raise InvalidDataset('private domain size k must be at least 2, got {}'.format(k))

        items = []
        for position, item in enumerate(examples):
            if not isinstance(item, Example):
                pub, priv = item
                item = Example(tuple(pub), int(priv))
            if not 0 <= item.private_value < k:
                raise InvalidDataset(
                    'example {} has private value {} outside [0, {})'.format(position, item.private_value, k)
                )
            items.append(item)

        if not items:
            raise InvalidDataset('dataset must contain at least one example')

        self._examples = tuple(items)
        self._k = k
        private_values = np.fromiter((e.private_value for e in items), dtype=np.int64, count=len(items))
        private_values.setflags(write=False)
        self._private_values = private_values

    @property
    def n(self):
        return len(self._examples)

    @property
    def k(self):
        return self._k

    @property
    def examples(self):
        return self._examples

    @property
    def private_values(self):
        """Read-only array of the private values. Only the private answer paths may look at it."""
        return self._private_values

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self._examples)

    def __getitem__(self, index):
        return self._examples[index]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._k == other._k and self._examples == other._examples

    def __hash__(self):
        return hash((self._k, self._examples))

    def __repr__(self):
        return 'Dataset(n={}, k={})'.format(self.n, self.k)

    def with_private_value(self, index, value):
        """Return the neighboring dataset where example ``index`` carries private value ``value``."""
        examples = list(self._examples)
        examples[index] = Example(examples[index].public_payload, int(value))
        return Dataset(examples, self._k)

    @classmethod
    def synthetic(cls, n, k, d_pub=0, seed=0):
        """
        Generate a dataset with uniform private values.

        The first public coordinate is the example index, followed by ``d_pub`` features drawn uniformly from the
        unit ball.
        """
        rng = np.random.default_rng(seed)
        private_values = rng.integers(0, k, size=n)
        if d_pub:
            directions = rng.standard_normal((n, d_pub))
            directions /= np.linalg.norm(directions, axis=1, keepdims=True)
            radii = rng.random(n) ** (1.0 / d_pub)
            features = directions * radii[:, None]
        else:
            features = np.empty((n, 0))
        examples = [
            Example((i,) + tuple(float(x) for x in features[i]), int(private_values[i])) for i in range(n)
        ]
        return cls(examples, k)

    @classmethod
    def from_jsonl(cls, path, k=None):
        """
        Load a dataset from a JSON-lines file.

        The optional first line is a header ``{"n": int, "k": int}``, every other line is an example
        ``{"pub": [...], "priv": int}``. An explicit ``k`` wins over the header.
        """
        header = {}
        examples = []
        with open(path, 'r') as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except ValueError as e:
                    raise InvalidDataset('{}:{}: {}'.format(path, lineno, e))
                if 'priv' not in record:
                    if examples or header:
                        raise InvalidDataset('{}:{}: example without "priv"'.format(path, lineno))
                    header = record
                    continue
                where = '{}:{}'.format(path, lineno)
                examples.append(Example(tuple(record.get('pub', ())), _private_value(record['priv'], where)))

        k = k if k is not None else header.get('k')
        if k is None:
            raise InvalidDataset('{}: k is neither in the header nor given explicitly'.format(path))
        if 'n' in header and int(header['n']) != len(examples):
            raise InvalidDataset(
                '{}: header says n={} but file has {} examples'.format(path, header['n'], len(examples))
            )
        return cls(examples, k)

    def to_jsonl(self, path):
        with open(path, 'w') as f:
            f.write(json.dumps({'n': self.n, 'k': self.k}) + '\n')
            for example in self._examples:
                f.write(json.dumps({'pub': list(example.public_payload), 'priv': example.private_value}) + '\n')


class QueryTable:
    """
    Values of a query on every (example, private value) cell.

    Row ``j = i * k + y`` holds ``scale[j] * (offset + rows[j])``. ``rows`` is a dense array or a scipy sparse
    matrix of shape ``(n * k, d)``; the shared ``offset`` lets queries with a dense common part and a sparse
    per-cell part stay sparse.
    """

    def __init__(self, rows, n, k, offset=None, scale=None):
        if rows.shape[0] != n * k:
            raise DimensionMismatch('query table has {} rows, expected n*k = {}'.format(rows.shape[0], n * k))
        self.n = n
        self.k = k
        self.dim = rows.shape[1]
        if sparse.issparse(rows):
            self.rows = sparse.csr_matrix(rows, dtype=float)
        else:
            self.rows = np.asarray(rows, dtype=float)
        self.offset = np.zeros(self.dim) if offset is None else np.asarray(offset, dtype=float)
        self.scale = np.ones(n * k) if scale is None else np.asarray(scale, dtype=float)
        if self.offset.shape != (self.dim,):
            raise DimensionMismatch('offset has shape {}, expected ({},)'.format(self.offset.shape, self.dim))
        if self.scale.shape != (n * k,):
            raise DimensionMismatch('scale has shape {}, expected ({},)'.format(self.scale.shape, n * k))

    @property
    def is_sparse(self):
        return sparse.issparse(self.rows)

    def dot(self, phi):
        """Inner products of every cell with ``phi`` as an ``(n, k)`` array."""
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.dim,):
            raise DimensionMismatch('direction has shape {}, expected ({},)'.format(phi.shape, self.dim))
        inner = np.asarray(self.rows @ phi).ravel() + float(self.offset @ phi)
        return (self.scale * inner).reshape(self.n, self.k)

    def weighted_sum(self, weights):
        """Sum of cell values weighted by an ``(n, k)`` array."""
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (self.n, self.k):
            raise DimensionMismatch('weights have shape {}, expected ({}, {})'.format(weights.shape, self.n, self.k))
        w = weights.ravel() * self.scale
        return np.asarray(self.rows.T @ w).ravel() + w.sum() * self.offset

    def row_norms(self):
        if self.is_sparse:
            squared = np.asarray(self.rows.multiply(self.rows).sum(axis=1)).ravel()
            cross = np.asarray(self.rows @ self.offset).ravel()
            total = squared + 2.0 * cross + float(self.offset @ self.offset)
            return np.abs(self.scale) * np.sqrt(np.maximum(total, 0.0))
        return np.abs(self.scale) * np.linalg.norm(self.rows + self.offset, axis=1)

    def rescaled(self, factors):
        return QueryTable(self.rows, self.n, self.k, offset=self.offset, scale=self.scale * np.asarray(factors))

    def row(self, i, y):
        j = i * self.k + y
        values = self.rows[j].toarray().ravel() if self.is_sparse else self.rows[j]
        return self.scale[j] * (self.offset + values)

    def to_dense(self):
        """All cell values as an ``(n, k, d)`` array. Only meant for small tables."""
        rows = self.rows.toarray() if self.is_sparse else self.rows
        return (self.scale[:, None] * (rows + self.offset)).reshape(self.n, self.k, self.dim)


class LinearVectorQuery:
    """
    A map ``(public_payload, private_value) -> R^dim`` into the unit ball.

    Queries that know their structure pass ``table_builder``, a callable returning the :class:`QueryTable` for a
    dataset. Otherwise the table is built by calling ``fn`` on every cell.
    """

    def __init__(self, dim, fn=None, table_builder=None, name=None):
        if dim < 1:
            raise ValueError('query dimension must be at least 1')
        if fn is None and table_builder is None:
            raise ValueError('either fn or table_builder is required')
        self.dim = int(dim)
        self.fn = fn
        self.table_builder = table_builder
        self.name = name or 'query'

    def __call__(self, public_payload, private_value):
        if self.fn is None:
            raise TypeError('{} is only defined through its table'.format(self.name))
        value = np.asarray(self.fn(public_payload, private_value), dtype=float).ravel()
        if value.shape != (self.dim,):
            raise DimensionMismatch('{} returned {} values, expected {}'.format(self.name, value.size, self.dim))
        return value

    def __repr__(self):
        return '{}(dim={}, name={!r})'.format(type(self).__name__, self.dim, self.name)

    def table(self, dataset):
        if self.table_builder is not None:
            table = self.table_builder(dataset)
            if table.dim != self.dim or table.n != dataset.n or table.k != dataset.k:
                raise DimensionMismatch('{} built a table that does not match the dataset'.format(self.name))
            return table

        rows = np.empty((dataset.n * dataset.k, self.dim))
        for i, example in enumerate(dataset):
            for y in range(dataset.k):
                rows[i * dataset.k + y] = self(example.public_payload, y)
        return QueryTable(rows, dataset.n, dataset.k)


class TabularQuery(LinearVectorQuery):
    """
    Query given by an explicit ``(n, k, d)`` array of values.

    Tables address examples by position; the per-example call reads the position from the first public coordinate.
    """

    def __init__(self, values, name=None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 3:
            raise DimensionMismatch('tabular query needs an (n, k, d) array, got shape {}'.format(values.shape))
        self.values = values
        super().__init__(values.shape[2], fn=self._lookup, name=name or 'tabular')

    def _lookup(self, public_payload, private_value):
        return self.values[int(public_payload[0]), private_value]

    def table(self, dataset):
        n, k, d = self.values.shape
        if (n, k) != (dataset.n, dataset.k):
            raise DimensionMismatch('tabular query is {}x{}, dataset is {}x{}'.format(n, k, dataset.n, dataset.k))
        return QueryTable(self.values.reshape(n * k, d), n, k)

    @classmethod
    def combine(cls, alpha, first, second):
        """The query ``alpha * first + (1 - alpha) * second``."""
        return cls(alpha * first.values + (1.0 - alpha) * second.values, name='combination')


def enforce_unit_ball(table, where='query'):
    """
    Rescale every cell whose norm exceeds 1 back onto the unit sphere.

    :return: tuple (table, number of rescaled cells)
    """
    norms = table.row_norms()
    over = norms > 1.0 + UNIT_BALL_SLACK
    count = int(np.count_nonzero(over))
    if count:
        UnitBallViolation(count, where)
        factors = np.ones_like(norms)
        factors[over] = 1.0 / norms[over]
        table = table.rescaled(factors)
    return table, count


def one_hot_weights(private_values, k):
    n = len(private_values)
    weights = np.zeros((n, k))
    weights[np.arange(n), private_values] = 1.0
    return weights


def table_true_mean(table, private_values):
    return table.weighted_sum(one_hot_weights(private_values, table.k)) / table.n


def table_belief_mean(table, probs):
    return table.weighted_sum(probs) / table.n


class BeliefState:
    """
    Row-stochastic ``n x k`` matrix of beliefs over the private values.

    The matrix is read-only; updates produce a new state.
    """

    def __init__(self, probs, validate=True):
        probs = np.array(probs, dtype=float)
        if probs.ndim != 2:
            raise DimensionMismatch('beliefs must be an n x k matrix, got shape {}'.format(probs.shape))
        if validate:
            if np.any(probs < 0) or not np.all(np.isfinite(probs)):
                raise ValueError('beliefs must be finite and nonnegative')
            drift = np.abs(probs.sum(axis=1) - 1.0)
            if np.any(drift > ROW_SUM_TOLERANCE):
                raise ValueError('belief rows must sum to 1, worst row is off by {:.3g}'.format(drift.max()))
        probs.setflags(write=False)
        self.probs = probs

    @property
    def n(self):
        return self.probs.shape[0]

    @property
    def k(self):
        return self.probs.shape[1]

    def check_matches(self, dataset):
        if self.probs.shape != (dataset.n, dataset.k):
            raise DimensionMismatch(
                'beliefs are {}x{} but dataset is {}x{}'.format(self.n, self.k, dataset.n, dataset.k)
            )

    @classmethod
    def uniform(cls, n, k):
        return cls(np.full((n, k), 1.0 / k), validate=False)

    @classmethod
    def point_mass(cls, private_values, k):
        return cls(one_hot_weights(np.asarray(private_values), k), validate=False)


class AnswerStatus(enum.Enum):
    OK = 'OK'
    FAIL = 'FAIL'


@dataclass(frozen=True)
class QueryAnswer:
    estimate: Optional[np.ndarray]
    updates_consumed: int
    status: AnswerStatus = AnswerStatus.OK
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.status is AnswerStatus.FAIL and self.estimate is not None:
            raise ValueError('a FAIL answer carries no estimate')
        if self.status is AnswerStatus.OK and self.estimate is None:
            raise ValueError('an OK answer needs an estimate')

    @property
    def ok(self):
        return self.status is AnswerStatus.OK

    @classmethod
    def fail(cls, updates_consumed):
        return cls(None, updates_consumed, AnswerStatus.FAIL)


def query_true_mean(f: LinearVectorQuery, dataset: Dataset) -> np.ndarray:
    """``(1/n) sum_i f(x_i)``."""
    table, _ = enforce_unit_ball(f.table(dataset), f.name)
    return table_true_mean(table, dataset.private_values)


def query_belief_mean(f: LinearVectorQuery, beliefs: BeliefState, dataset: Dataset) -> np.ndarray:
    """``(1/n) sum_i sum_y p_i(y) f(x_i^pub, y)``."""
    beliefs.check_matches(dataset)
    table, _ = enforce_unit_ball(f.table(dataset), f.name)
    return table_belief_mean(table, beliefs.probs)

