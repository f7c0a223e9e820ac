"""
Private empirical risk minimization on top of a private query session.

Every gradient step asks one linear vector query: the mean of the per-example gradients divided by G. All problems
of a run share one session whose query budget is ``T = m * q``.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from pvmw_dp.accountant import rho_for_dp_target
from pvmw_dp.erm.problem import ExactGradientOracle, PvmwGradientOracle, project_ball
from pvmw_dp.errors import SessionFailed
from pvmw_dp.pvmw import ACCURACY_FACTOR, derive_config, open_session, theoretical_alpha

log = logging.getLogger(__name__)

DEFAULT_Q_CAP = 10 ** 5


@dataclass
class ErmReport:
    iterates: List[Optional[np.ndarray]]
    excess_risk_vs_reference: List[Optional[float]]
    oracle_queries_used: int
    failed: bool
    q: int
    proof_q: int
    rho: Optional[float] = None
    eta: Optional[float] = None
    theoretical_alpha: Optional[float] = None
    vacuous_guarantee: Optional[bool] = None
    oracle_noise: List[float] = field(default_factory=list)
    upsilon: List[float] = field(default_factory=list)
    traces: List[List[float]] = field(default_factory=list)
    session: Optional[dict] = None


def proof_q_convex(n):
    return n ** 2


def proof_q_strongly_convex(lam, mu, R, n):
    """``ceil(40 lam / mu * ln(lam R^2 / n))`` with a floor of 1."""
    value = 40.0 * lam / mu * math.log(lam * R ** 2 / n)
    if value <= 0:
        return 1
    return max(1, int(math.ceil(value)))


def default_beta(n):
    return min(1.0 / n, 0.4)


def _budget(rho, eps, delta):
    if rho is not None:
        return float(rho)
    if eps is None or delta is None:
        raise ValueError('give either rho or both eps and delta')
    return rho_for_dp_target(eps, delta)


class _Run:
    """Shared oracle plumbing of both solvers."""

    def __init__(self, problems, dataset, rho, beta, q, seed, exact, debug_nonprivate, name):
        self.problems = list(problems)
        if not self.problems:
            raise ValueError('at least one problem is required')
        self.dataset = dataset
        self.exact = exact
        self.session = None
        self.config = None
        self.scale = max(p.G for p in self.problems)
        if exact:
            log.warning('exact gradient oracle in use: this run is NOT private')
            return
        if debug_nonprivate:
            log.warning('non-private debug measurements enabled')
        beta = default_beta(dataset.n) if beta is None else beta
        self.config = derive_config(rho, beta, len(self.problems) * q, dataset.n, dataset.k)
        self.session = open_session(dataset, self.config, seed, name=name, debug_nonprivate=debug_nonprivate)
        if len(set(p.G for p in self.problems)) > 1:
            log.info('problems have different G, queries are normalized by the largest G={}'.format(self.scale))

    def oracle(self, problem):
        if self.exact:
            return ExactGradientOracle(problem, self.dataset)
        return PvmwGradientOracle(self.session, problem, scale=self.scale)

    def oracle_noise(self):
        if self.config is None:
            return 0.0
        return self.scale * ACCURACY_FACTOR * self.config.eta

    def report(self, iterates, excess, queries, failed, q, proof_q, **kwargs):
        report = ErmReport(iterates, excess, queries, failed, q, proof_q, **kwargs)
        if self.config is not None:
            report.rho = self.config.rho
            report.eta = self.config.eta
            report.theoretical_alpha = theoretical_alpha(self.config)
            report.vacuous_guarantee = self.config.vacuous_guarantee
            report.session = self.session.report()
        return report


def _excess(problem, w, dataset, reference):
    if reference is None or w is None:
        return None
    return problem.loss(w, dataset) - reference


def solve_convex(
    problems,
    dataset,
    rho=None,
    eps=None,
    delta=None,
    q=None,
    q_cap=DEFAULT_Q_CAP,
    seed=0,
    beta=None,
    exact=False,
    debug_nonprivate=False,
    references=None,
    name='erm-convex',
):
    """
    Projected subgradient descent with step ``R / (G sqrt(q))``, returning the average of the query points.

    :param problems: list of :class:`ErmProblem`, solved one after another against one shared session
    :param float rho: zCDP budget; alternatively give ``eps`` and ``delta``
    :param int q: steps per problem, defaults to ``min(n^2, q_cap)``
    :param bool exact: use exact gradients instead of a private session (debug only)
    :param references: optimal loss values; excess risks are measured only with ``exact`` or ``debug_nonprivate``
    """
    n = dataset.n
    proof_q = proof_q_convex(n)
    q = int(q) if q is not None else int(min(proof_q, q_cap))
    if q < 1:
        raise ValueError('need at least one step, got q={}'.format(q))
    rho = None if exact else _budget(rho, eps, delta)
    run = _Run(problems, dataset, rho, beta, q, seed, exact, debug_nonprivate, name)
    measure = references is not None and (exact or debug_nonprivate)

    iterates = [None] * len(run.problems)
    excess = [None] * len(run.problems)
    queries = 0
    failed = False
    for index, problem in enumerate(run.problems):
        oracle = run.oracle(problem)
        step = problem.R / (problem.G * math.sqrt(q))
        w = np.zeros(problem.dim)
        total = np.zeros(problem.dim)
        try:
            for _ in range(q):
                total += w
                w = project_ball(w - step * oracle(w), problem.R)
        except SessionFailed as e:
            log.error('{}: {}'.format(problem.name, e))
            failed = True
        finally:
            queries += oracle.queries
        if failed:
            break
        iterates[index] = total / q
        if measure:
            excess[index] = _excess(problem, iterates[index], dataset, references[index])
        log.info('{}: solved in {} steps'.format(problem.name, q))

    return run.report(
        iterates,
        excess,
        queries,
        failed,
        q,
        proof_q,
        oracle_noise=[run.oracle_noise()] * len(run.problems),
    )


def solve_strongly_convex(
    problems,
    dataset,
    rho=None,
    eps=None,
    delta=None,
    seed=0,
    q=None,
    w0=None,
    beta=None,
    exact=False,
    debug_nonprivate=False,
    references=None,
    name='erm-strongly-convex',
):
    """
    Inexact primal gradient method: ``w <- project(w - g(w) / (2 lam))`` for q steps.

    With a noisy gradient of error xi the oracle is inexact with effective smoothness ``2 lam``, effective strong
    convexity ``mu / 2`` and slack ``xi^2 (1/mu + 1/(2 lam))``; the slack is reported as ``upsilon``.

    :param int q: steps per problem, defaults to the largest ``proof_q_strongly_convex`` over the problems
    :param w0: starting point, defaults to the origin
    """
    for problem in problems:
        if not problem.strongly_convex:
            raise ValueError('{} is not strongly convex and smooth'.format(problem.name))
    n = dataset.n
    proof_q = max(proof_q_strongly_convex(p.lam, p.mu, p.R, n) for p in problems)
    q = int(q) if q is not None else proof_q
    if q < 1:
        raise ValueError('need at least one step, got q={}'.format(q))
    rho = None if exact else _budget(rho, eps, delta)
    run = _Run(problems, dataset, rho, beta, q, seed, exact, debug_nonprivate, name)
    measure = references is not None and (exact or debug_nonprivate)

    iterates = [None] * len(run.problems)
    excess = [None] * len(run.problems)
    traces = []
    queries = 0
    failed = False
    for index, problem in enumerate(run.problems):
        oracle = run.oracle(problem)
        step = 1.0 / (2.0 * problem.lam)
        w = project_ball(np.zeros(problem.dim) if w0 is None else np.array(w0, dtype=float), problem.R)
        trace = [_excess(problem, w, dataset, references[index])] if measure else []
        try:
            for _ in range(q):
                w = project_ball(w - step * oracle(w), problem.R)
                if measure:
                    trace.append(_excess(problem, w, dataset, references[index]))
        except SessionFailed as e:
            log.error('{}: {}'.format(problem.name, e))
            failed = True
        finally:
            queries += oracle.queries
        traces.append(trace)
        if failed:
            break
        iterates[index] = w
        if measure:
            excess[index] = trace[-1]
        log.info('{}: solved in {} steps'.format(problem.name, q))

    noise = run.oracle_noise()
    return run.report(
        iterates,
        excess,
        queries,
        failed,
        q,
        proof_q,
        oracle_noise=[noise] * len(run.problems),
        upsilon=[noise ** 2 * (1.0 / p.mu + 1.0 / (2.0 * p.lam)) for p in run.problems],
        traces=traces,
    )
