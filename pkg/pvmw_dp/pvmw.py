"""
Private vector multiplicative weights: an interactive session answering linear vector queries.

The session keeps per-example beliefs over the private values and answers every query from the beliefs alone. A
noisy threshold test compares the belief answer to the true one; when it fires, the beliefs take a multiplicative
weight step toward a Gaussian-noised true answer and the same query is tested again.
"""
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from pvmw_dp.accountant import ZcdpLedger, pvmw_slot_charges
from pvmw_dp.core import BeliefState, QueryAnswer, enforce_unit_ball, table_belief_mean, table_true_mean
from pvmw_dp.decorators import log_duration
from pvmw_dp.errors import DimensionMismatch, NoCrossingFound, QueryBudgetExceeded, SessionFailed
from pvmw_dp.helper import TRANSCRIPT_LOGGER, canonical_json
from pvmw_dp.mechanisms import NoiseRole, NoiseSource, above_threshold_step
from pvmw_dp.mwu import MwuParams, mwu_update

log = logging.getLogger(__name__)
log_sessions = logging.getLogger('pvmw_dp.per_session')
# NOTE this is the special logger for per-session events
# it returns LogRecords with extra fields: session_name, n and k
log_transcript = logging.getLogger(TRANSCRIPT_LOGGER)

ETA_CONSTANT = 1000.0
ETA_BRACKET = (1e-12, 1e6)
ETA_BISECTION_STEPS = 200
VACUOUS_ETA = 0.1
ACCURACY_FACTOR = 18.0
IDENTITY_TOLERANCE = 1e-12


def eta_rhs(eta, rho, beta, T, n, k):
    """Right-hand side of the fixed-point inequality the learning rate has to exceed."""
    log_k = math.log(k)
    inner = math.log(n * T * log_k / (rho * beta * eta))
    return ETA_CONSTANT * (log_k / rho) ** 0.25 * math.sqrt(max(0.0, inner)) / math.sqrt(n)


def solve_eta(rho, beta, T, n, k):
    """Smallest eta with ``eta > eta_rhs(eta)``, by bisection. The right-hand side decreases in eta."""
    lo, hi = ETA_BRACKET

    def gap(eta):
        return eta - eta_rhs(eta, rho, beta, T, n, k)

    if gap(hi) <= 0:
        raise NoCrossingFound(
            'no learning rate below {:g} satisfies the accuracy inequality for n={} k={} T={} rho={} beta={}'.format(
                hi, n, k, T, rho, beta
            )
        )
    if gap(lo) > 0:
        return lo
    for _ in range(ETA_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


def max_updates(eta, k):
    return 1 + int(math.floor(math.log(k) / eta ** 2))


def gaussian_multiplier(rho, zeta, L_max):
    return math.sqrt(2.0 * L_max / ((1.0 - zeta) * rho))


def threshold_epsilon(rho, zeta, L_max):
    return math.sqrt(zeta * rho / L_max)


def _close(a, b):
    return math.isclose(a, b, rel_tol=IDENTITY_TOLERANCE, abs_tol=0.0)


@dataclass(frozen=True)
class PvmwConfig:
    rho: float
    beta: float
    T: int
    n: int
    k: int
    zeta: float
    c: float
    eta: float
    tau: float
    L_max: int
    sigma: float
    eps_prime: float

    def __post_init__(self):
        if self.L_max != max_updates(self.eta, self.k):
            raise ValueError('L_max={} does not match eta={} and k={}'.format(self.L_max, self.eta, self.k))
        if not _close(self.tau, 16.0 * self.eta):
            raise ValueError('tau must be 16 * eta')
        if not _close(self.sigma, gaussian_multiplier(self.rho, self.zeta, self.L_max)):
            raise ValueError('sigma does not match rho, zeta and L_max')
        if not _close(self.eps_prime, threshold_epsilon(self.rho, self.zeta, self.L_max)):
            raise ValueError('eps_prime does not match rho, zeta and L_max')

    @property
    def vacuous_guarantee(self):
        return self.eta > VACUOUS_ETA

    @property
    def mwu_params(self):
        """Update parameters; the learning rate is capped at 1/c."""
        return MwuParams(min(self.eta, 1.0 / self.c), self.c)

    @property
    def slot_rho(self):
        return self.rho / self.L_max

    def as_dict(self):
        return {
            'rho': self.rho,
            'beta': self.beta,
            'T': self.T,
            'n': self.n,
            'k': self.k,
            'zeta': self.zeta,
            'c': self.c,
            'eta': self.eta,
            'tau': self.tau,
            'L_max': self.L_max,
            'sigma': self.sigma,
            'eps_prime': self.eps_prime,
        }


def derive_config(rho, beta, T, n, k, zeta=0.5, c=3.0):
    """
    Derive every session parameter from the privacy budget and problem size.

    :param float rho: zCDP budget
    :param float beta: failure probability in (0, 1/2)
    :param int T: maximum number of queries
    :param int n: number of examples
    :param int k: size of the private domain
    :param float zeta: share of the budget spent on the threshold test and the norm estimate
    :param float c: truncation bound of the update
    """
    if not rho > 0:
        raise ValueError('rho must be positive, got {}'.format(rho))
    if not 0 < beta < 0.5:
        raise ValueError('beta must be in (0, 1/2), got {}'.format(beta))
    if T < 1 or n < 1:
        raise ValueError('T and n must be positive, got T={} n={}'.format(T, n))
    if k < 2:
        raise ValueError('k must be at least 2, got {}'.format(k))
    if not 0 < zeta < 1:
        raise ValueError('zeta must be in (0, 1), got {}'.format(zeta))
    if not c > 0:
        raise ValueError('c must be positive, got {}'.format(c))
    if rho >= 1:
        log.warning('rho={} is outside (0, 1); accuracy guarantees are stated for rho < 1'.format(rho))

    return config_from_eta(rho, beta, T, n, k, solve_eta(rho, beta, T, n, k), zeta=zeta, c=c)


def config_from_eta(rho, beta, T, n, k, eta, zeta=0.5, c=3.0):
    """Session parameters for a given learning rate instead of the solved one."""
    if not eta > 0:
        raise ValueError('eta must be positive, got {}'.format(eta))
    L_max = max_updates(eta, k)
    config = PvmwConfig(
        rho=float(rho),
        beta=float(beta),
        T=int(T),
        n=int(n),
        k=int(k),
        zeta=float(zeta),
        c=float(c),
        eta=eta,
        tau=16.0 * eta,
        L_max=L_max,
        sigma=gaussian_multiplier(rho, zeta, L_max),
        eps_prime=threshold_epsilon(rho, zeta, L_max),
    )
    if config.vacuous_guarantee:
        log.warning(
            'eta={:.4g} > {}: the accuracy guarantee {:.4g} is vacuous at n={}, the session still runs'.format(
                eta, VACUOUS_ETA, ACCURACY_FACTOR * eta, n
            )
        )
    if eta > 1.0 / c:
        log.info('learning rate capped at 1/c = {:.4g} for the update step'.format(1.0 / c))
    return config


def theoretical_alpha(config, n=None, k=None, T=None):
    """l2 accuracy every answer meets with probability 1 - beta: 18 * eta."""
    for name, value in (('n', n), ('k', k), ('T', T)):
        if value is not None and value != getattr(config, name):
            raise ValueError('config was derived for {}={}, got {}'.format(name, getattr(config, name), value))
    return ACCURACY_FACTOR * config.eta


def lower_bound_group_size(epsilon, k):
    """Replication factor that turns a k-ary private domain into a lower-bound instance: floor(ln k / epsilon)."""
    if not epsilon > 0:
        raise ValueError('epsilon must be positive, got {}'.format(epsilon))
    return max(1, int(math.floor(math.log(k) / epsilon)))


class SessionStatus(enum.Enum):
    ACTIVE = 'ACTIVE'
    FAILED = 'FAILED'
    EXHAUSTED = 'EXHAUSTED'


class PvmwSession:
    """
    Online, single-threaded answering session over one dataset.

    The whole privacy budget is charged to the ledger when the session opens, one slot per possible update.

    :param Dataset dataset: the data, never released directly
    :param PvmwConfig config: derived parameters, must match the dataset size
    :param int seed: seed of the noise streams
    :param str name: name used in the per-session log records
    :param bool debug_nonprivate: add the exact error of every answer to the transcript
    """

    def __init__(self, dataset, config, seed, name=None, debug_nonprivate=False):
        if (dataset.n, dataset.k) != (config.n, config.k):
            raise DimensionMismatch(
                'config was derived for n={} k={}, dataset has n={} k={}'.format(
                    config.n, config.k, dataset.n, dataset.k
                )
            )
        self.dataset = dataset
        self.config = config
        self.seed = int(seed)
        self.name = name or 'session-{}'.format(self.seed)
        self.debug_nonprivate = debug_nonprivate
        self.log = logging.LoggerAdapter(log_sessions, {'session_name': self.name, 'n': dataset.n, 'k': dataset.k})

        self.noise_sources = {role: NoiseSource(self.seed, role) for role in NoiseRole}
        self.ledger = ZcdpLedger(config.rho)
        self.ledger.charge_all(
            charge
            for slot in range(1, config.L_max + 1)
            for charge in pvmw_slot_charges(config.eps_prime, config.sigma, slot)
        )

        self.beliefs = BeliefState.uniform(dataset.n, dataset.k)
        self.update_count = 0
        self.answered = 0
        self.status = SessionStatus.ACTIVE
        self.unit_ball_warnings = 0
        self.transcript = []
        self.threshold_noise = self._sample(NoiseRole.THRESHOLD, 4.0)

    def _sample(self, role, numerator):
        return self.noise_sources[role].laplace(numerator / (self.config.eps_prime * self.dataset.n))

    def _record(self, answer, updates_before, error):
        record = {
            't': self.answered if answer.ok else self.answered + 1,
            'updates_before': updates_before,
            'updates_after': self.update_count,
            'status': answer.status.value,
        }
        if self.debug_nonprivate and error is not None:
            record['error_vs_truth'] = error
        self.transcript.append(record)
        log_transcript.info(canonical_json(record))

    @log_duration('answer')
    def answer(self, query):
        """
        Answer one query, updating the beliefs as often as the threshold test demands.

        :raises SessionFailed: the session already returned FAIL
        :raises QueryBudgetExceeded: T queries were already answered
        """
        if self.status is SessionStatus.FAILED:
            raise SessionFailed('session {} has failed and answers no more queries'.format(self.name))
        if self.answered >= self.config.T:
            raise QueryBudgetExceeded('session {} already answered T={} queries'.format(self.name, self.config.T))

        config = self.config
        dataset = self.dataset
        table, clipped = enforce_unit_ball(query.table(dataset), query.name)
        self.unit_ball_warnings += clipped
        truth = table_true_mean(table, dataset.private_values)
        updates_before = self.update_count

        while True:
            estimate = table_belief_mean(table, self.beliefs.probs)
            gap = float(np.linalg.norm(estimate - truth))
            nu = self._sample(NoiseRole.QUERY, 8.0)
            if not above_threshold_step(gap, config.tau, self.threshold_noise, nu):
                break

            if self.update_count + 1 >= config.L_max:
                self.status = SessionStatus.FAILED
                self.log.error('update budget of L_max={} exhausted, session failed'.format(config.L_max))
                answer = QueryAnswer.fail(self.update_count)
                self._record(answer, updates_before, None)
                return answer

            z = self.noise_sources[NoiseRole.GAUSSIAN].gaussian(2.0 * config.sigma / dataset.n, size=table.dim)
            xi = self._sample(NoiseRole.NORM_ESTIMATE, 2.0)
            iota = max(gap + xi, config.eta)
            self.beliefs = mwu_update(self.beliefs, query, truth + z, iota, config.mwu_params, dataset, table=table)
            self.update_count += 1
            self.threshold_noise = self._sample(NoiseRole.THRESHOLD, 4.0)
            self.log.debug('update {} of at most {}'.format(self.update_count, config.L_max - 1))

        self.answered += 1
        if self.answered >= config.T:
            self.status = SessionStatus.EXHAUSTED
        answer = QueryAnswer(estimate.copy(), self.update_count)
        self._record(answer, updates_before, gap)
        return answer

    def answer_stream(self, queries):
        """Answer queries in order, stopping after a FAIL."""
        for query in queries:
            answer = self.answer(query)
            yield answer
            if not answer.ok:
                return

    def report(self):
        return {
            'session': self.name,
            'seed': self.seed,
            'eta': self.config.eta,
            'tau': self.config.tau,
            'L_max': self.config.L_max,
            'sigma': self.config.sigma,
            'eps_prime': self.config.eps_prime,
            'theoretical_alpha': theoretical_alpha(self.config),
            'vacuous_guarantee': self.config.vacuous_guarantee,
            'updates': self.update_count,
            'answered': self.answered,
            'status': self.status.value,
            'ledger_rho': self.ledger.spent,
            'unit_ball_warnings': self.unit_ball_warnings,
        }


def open_session(dataset, config, seed, **kwargs):
    return PvmwSession(dataset, config, seed, **kwargs)


def answer(session, query):
    return session.answer(query)
