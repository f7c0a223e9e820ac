"""
Noise primitives, the AboveThreshold test and the trunc/clip operators.

Every random number comes from a :class:`NoiseSource`: a PCG64 stream keyed by ``(seed, stream_id)``. Each sample
consumes exactly one 64-bit draw, so the n-th sample of a stream is the same on every run and platform, and streams
for different roles never shift each other.
"""
import enum
import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

log = logging.getLogger(__name__)

TWO_POW_53 = float(2 ** 53)
ZERO_INNER_PRODUCT = 1e-300
CLIP_CONCENTRATION_C = 3.0
MIN_CONCENTRATION_TRIALS = 10 ** 4

Draw = namedtuple('Draw', 'index kind scale count')


class NoiseRole(enum.IntEnum):
    """Stream ids of the independent noise streams a private session uses."""

    THRESHOLD = 0
    QUERY = 1
    NORM_ESTIMATE = 2
    GAUSSIAN = 3


class NoiseSource:
    """
    Seeded, single-consumer stream of noise.

    :param int seed: 64-bit experiment seed
    :param int stream_id: index of the independent stream, usually a :class:`NoiseRole`
    """

    def __init__(self, seed, stream_id=0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        seed_sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self._bit_generator = np.random.PCG64(seed_sequence)
        self.draws = 0
        # One entry per sampling call: where it started, what it sampled and with which scale
        self.history = []

    def __repr__(self):
        return 'NoiseSource(seed={}, stream_id={}, draws={})'.format(self.seed, self.stream_id, self.draws)

    def _uniform(self, count):
        """Uniforms in the open interval (0, 1), one raw 64-bit draw each."""
        raw = self._bit_generator.random_raw(count)
        self.draws += count
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) / TWO_POW_53

    def _record(self, kind, scale, count):
        self.history.append(Draw(self.draws - count, kind, scale, count))

    def uniform(self, size=None):
        count = 1 if size is None else int(np.prod(size))
        u = self._uniform(count)
        self._record('uniform', 1.0, count)
        return float(u[0]) if size is None else u.reshape(size)

    def laplace(self, scale, size=None):
        if not scale > 0:
            raise ValueError('Laplace scale must be positive, got {}'.format(scale))
        count = 1 if size is None else int(np.prod(size))
        x = self._uniform(count) - 0.5
        samples = -scale * np.sign(x) * np.log1p(-2.0 * np.abs(x))
        self._record('laplace', float(scale), count)
        return float(samples[0]) if size is None else samples.reshape(size)

    def gaussian(self, sigma, size=None):
        if not sigma > 0:
            raise ValueError('Gaussian sigma must be positive, got {}'.format(sigma))
        count = 1 if size is None else int(np.prod(size))
        samples = sigma * ndtri(self._uniform(count))
        self._record('gaussian', float(sigma), count)
        return float(samples[0]) if size is None else samples.reshape(size)

    def scales(self, kind):
        return [draw.scale for draw in self.history if draw.kind == kind]


def sample_laplace(scale, src):
    """One sample of Lap(scale) by inverse CDF."""
    return src.laplace(scale)


def sample_gaussian_vector(d, sigma, src):
    """``d`` i.i.d. N(0, sigma^2) coordinates."""
    if int(d) != d or d < 1:
        raise ValueError('dimension must be a positive integer, got {}'.format(d))
    return src.gaussian(sigma, size=int(d))


def laplace_tail_bound(t, scale):
    """Upper bound on P(|X| >= t) for X ~ Lap(scale)."""
    return 2.0 * math.exp(-t / scale)


def gaussian_tail_bound(t, sigma):
    """Upper bound on P(|X| >= t) for X ~ N(0, sigma^2)."""
    return 2.0 * math.exp(-0.5 * (t / sigma) ** 2)


def trunc(b, c):
    """Rescale ``b`` so that its absolute value is at most ``c``. Works elementwise on arrays."""
    if not c > 0:
        raise ValueError('truncation bound must be positive, got {}'.format(c))
    if np.ndim(b):
        return np.clip(b, -c, c)
    return float(min(max(b, -c), c))


def clip(u, phi, c):
    """Scale ``u`` so that its phi-semi-norm ``|<phi, u>|`` is at most ``c``."""
    if not c > 0:
        raise ValueError('clip bound must be positive, got {}'.format(c))
    u = np.asarray(u, dtype=float)
    inner = float(np.dot(phi, u))
    if abs(inner) < ZERO_INNER_PRODUCT:
        return u.copy()
    return u * min(1.0, c / abs(inner))


def above_threshold_step(noisy_query_value, tau, chi, nu):
    return noisy_query_value + nu >= tau + chi


def above_threshold(values, tau, epsilon, threshold_src, query_src, sensitivity=1.0):
    """
    Run AboveThreshold over a stream of query values.

    The threshold noise is drawn once from ``threshold_src`` with scale ``2 * sensitivity / epsilon``; every value
    gets fresh noise from ``query_src`` with scale ``4 * sensitivity / epsilon``.

    :return: index of the first value that tested above the threshold, or None when the stream ran out
    """
    if not epsilon > 0:
        raise ValueError('epsilon must be positive, got {}'.format(epsilon))
    chi = threshold_src.laplace(2.0 * sensitivity / epsilon)
    for index, value in enumerate(values):
        nu = query_src.laplace(4.0 * sensitivity / epsilon)
        if above_threshold_step(value, tau, chi, nu):
            return index
    return None


def clip_concentration_bound(sigma_z):
    return 2.0 * math.exp(-0.1 / sigma_z ** 2)


@dataclass(frozen=True)
class ClipConcentrationResult:
    failure_rate: float
    bound: float
    failures: int
    trials: int

    @property
    def standard_error(self):
        return math.sqrt(min(self.bound, 1.0) / self.trials)


def verify_clip_concentration(support, weights, mu_z, sigma_z, trials, src, batch_size=10000):
    """
    Monte-Carlo check of the clipped-mean concentration bound.

    For ``Z ~ N(mu_z, sigma_z^2 I)`` it measures how often ``|<Z, E_U[clip(U, Z, 3)] - E_U[U]>|`` exceeds
    ``2 exp(-0.1 / sigma_z^2)``, with ``U`` drawn from the finite distribution ``(support, weights)``.

    :param support: (m, d) array, every row inside the unit ball
    :param weights: m probabilities summing to 1
    """
    support = np.atleast_2d(np.asarray(support, dtype=float))
    weights = np.asarray(weights, dtype=float).ravel()
    mu_z = np.asarray(mu_z, dtype=float).ravel()
    m, d = support.shape

    if weights.shape != (m,):
        raise ValueError('need one weight per support point, got {} for {}'.format(weights.size, m))
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError('P is not normalized: weights sum to {}'.format(weights.sum()))
    if np.any(np.linalg.norm(support, axis=1) > 1.0 + 1e-9):
        raise ValueError('support of P must lie in the unit ball')
    if mu_z.shape != (d,):
        raise ValueError('mu_Z has dimension {}, support has {}'.format(mu_z.size, d))
    if np.linalg.norm(mu_z) > 2.0 + 1e-12:
        raise ValueError('mu_Z must have norm at most 2')
    if not 0 < sigma_z <= 1:
        raise ValueError('sigma_Z must be in (0, 1], got {}'.format(sigma_z))
    if trials < MIN_CONCENTRATION_TRIALS:
        raise ValueError('at least {} trials are needed, got {}'.format(MIN_CONCENTRATION_TRIALS, trials))

    bound = clip_concentration_bound(sigma_z)
    failures = 0
    done = 0
    while done < trials:
        size = min(batch_size, trials - done)
        z = mu_z + src.gaussian(sigma_z, size=(size, d))
        inner = z @ support.T
        deviation = np.abs((trunc(inner, CLIP_CONCENTRATION_C) - inner) @ weights)
        failures += int(np.count_nonzero(deviation > bound))
        done += size

    result = ClipConcentrationResult(failures / trials, bound, failures, trials)
    log.debug(
        'clip concentration: sigma_Z={} failure_rate={:.6f} bound={:.6f}'.format(sigma_z, result.failure_rate, bound)
    )
    return result
