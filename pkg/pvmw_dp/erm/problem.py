import logging
import math

import numpy as np

from pvmw_dp.core import Example, LinearVectorQuery
from pvmw_dp.errors import SessionFailed

log = logging.getLogger(__name__)

LIPSCHITZ_SLACK = 1e-9


def project_ball(w, R):
    """Euclidean projection onto the ball of radius ``R`` around the origin."""
    if not R > 0:
        raise ValueError('radius must be positive, got {}'.format(R))
    w = np.asarray(w, dtype=float)
    norm = float(np.linalg.norm(w))
    if norm <= R:
        return w
    return w * (R / norm)


class ErmProblem:
    """
    Empirical risk minimization problem over a Euclidean ball.

    :param per_example_gradient: ``(w, Example) -> gradient``
    :param per_example_loss: ``(w, Example) -> loss``
    :param float G: Lipschitz constant; gradients longer than G are clipped with a warning
    :param int dim: dimension of the parameters
    :param float R: radius of the feasible ball, defaults to 2G/mu for strongly convex problems
    :param float mu: strong convexity constant, 0 for merely convex losses
    :param float lam: smoothness constant, ``inf`` for nonsmooth losses
    :param gradient_query: optional ``(w, scale) -> LinearVectorQuery`` for ``x -> grad(w; x) / scale``; structured
        problems use it to keep the query table sparse
    :param mean_gradient: optional closed form ``(w, Dataset) -> gradient of the empirical loss``
    :param mean_loss: optional closed form ``(w, Dataset) -> empirical loss``
    """

    def __init__(
        self,
        per_example_gradient,
        per_example_loss,
        G,
        dim,
        R=None,
        mu=0.0,
        lam=math.inf,
        name='problem',
        gradient_query=None,
        mean_gradient=None,
        mean_loss=None,
    ):
        if not G > 0:
            raise ValueError('Lipschitz constant must be positive, got {}'.format(G))
        if dim < 1:
            raise ValueError('dimension must be positive, got {}'.format(dim))
        if mu < 0:
            raise ValueError('strong convexity constant must be nonnegative, got {}'.format(mu))
        if math.isfinite(lam) and lam < mu:
            raise ValueError('smoothness {} is below strong convexity {}'.format(lam, mu))
        if R is None:
            if mu <= 0:
                raise ValueError('convex problems need a feasible radius R')
            R = 2.0 * G / mu
        if not R > 0:
            raise ValueError('feasible radius must be positive, got {}'.format(R))

        self.per_example_gradient = per_example_gradient
        self.per_example_loss = per_example_loss
        self.G = float(G)
        self.dim = int(dim)
        self.R = float(R)
        self.mu = float(mu)
        self.lam = float(lam)
        self.name = name
        self.gradient_query = gradient_query
        self.mean_gradient = mean_gradient
        self.mean_loss = mean_loss
        self.lipschitz_warnings = 0

    def __repr__(self):
        return 'ErmProblem(name={!r}, dim={}, G={}, R={}, mu={}, lam={})'.format(
            self.name, self.dim, self.G, self.R, self.mu, self.lam
        )

    @property
    def strongly_convex(self):
        return self.mu > 0 and math.isfinite(self.lam)

    def clip_gradient(self, g):
        g = np.asarray(g, dtype=float)
        norm = float(np.linalg.norm(g))
        if norm > self.G * (1.0 + LIPSCHITZ_SLACK):
            self.lipschitz_warnings += 1
            log.warning('{}: gradient norm {:.6g} exceeds G={:.6g}, clipped'.format(self.name, norm, self.G))
            return g * (self.G / norm)
        return g

    def loss(self, w, dataset):
        if self.mean_loss is not None:
            return float(self.mean_loss(w, dataset))
        return float(np.mean([self.per_example_loss(w, x) for x in dataset]))

    def gradient(self, w, dataset):
        if self.mean_gradient is not None:
            return np.asarray(self.mean_gradient(w, dataset), dtype=float)
        total = np.zeros(self.dim)
        for x in dataset:
            total += self.clip_gradient(self.per_example_gradient(w, x))
        return total / dataset.n

    def query(self, w, scale=None):
        """The linear vector query ``x -> grad(w; x) / scale``; ``scale`` defaults to G."""
        scale = self.G if scale is None else scale
        if self.gradient_query is not None:
            return self.gradient_query(np.asarray(w, dtype=float), scale)
        w = np.array(w, dtype=float)

        def fn(public_payload, private_value):
            return self.clip_gradient(self.per_example_gradient(w, Example(public_payload, private_value))) / scale

        return LinearVectorQuery(self.dim, fn=fn, name='{} gradient'.format(self.name))


class ExactGradientOracle:
    """Exact empirical gradient. Not private: for debugging and reference runs only."""

    def __init__(self, problem, dataset):
        self.problem = problem
        self.dataset = dataset
        self.queries = 0

    def __call__(self, w):
        self.queries += 1
        return self.problem.gradient(w, self.dataset)


class PvmwGradientOracle:
    """
    Gradient estimates answered by a private session.

    Each call asks the session for the mean of ``grad(w; x) / scale`` and scales the estimate back.

    :raises SessionFailed: when the session answers FAIL
    """

    def __init__(self, session, problem, scale=None):
        self.session = session
        self.problem = problem
        self.scale = problem.G if scale is None else float(scale)
        self.queries = 0

    def __call__(self, w):
        answer = self.session.answer(self.problem.query(w, self.scale))
        self.queries += 1
        if not answer.ok:
            raise SessionFailed('gradient query {} of {} failed'.format(self.queries, self.problem.name))
        return self.scale * answer.estimate


def pvmw_gradient_oracle(session, problem, w):
    return PvmwGradientOracle(session, problem)(w)
