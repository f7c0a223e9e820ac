import logging
import math

import numpy as np
import pytest

from pvmw_dp.core import BeliefState, Dataset, Example, query_belief_mean
from pvmw_dp.erm import (
    ErmProblem,
    hard_instance_convex,
    hard_instance_strongly_convex,
    proof_q_convex,
    proof_q_strongly_convex,
    project_ball,
    pvmw_gradient_oracle,
    replicate_examples,
    solve_convex,
    solve_strongly_convex,
)
from pvmw_dp.errors import MemoryGuardExceeded
from pvmw_dp.pvmw import config_from_eta, open_session

log = logging.getLogger("pvmw_dp")
log.setLevel(logging.DEBUG)

pytestmark = pytest.mark.mandatory


def random_point_in_ball(rng, dim, R):
    w = rng.standard_normal(dim)
    return w * (R * rng.random() / np.linalg.norm(w))


def test_project_ball():
    assert np.allclose(project_ball([3.0, 4.0], 1.0), [0.6, 0.8])
    assert np.allclose(project_ball([0.3, 0.4], 1.0), [0.3, 0.4])
    with pytest.raises(ValueError):
        project_ball([1.0], 0.0)


def test_problem_validation():
    def gradient(w, x):
        return np.zeros(2)

    def loss(w, x):
        return 0.0

    with pytest.raises(ValueError):
        ErmProblem(gradient, loss, G=0.0, dim=2, R=1.0)
    with pytest.raises(ValueError):
        ErmProblem(gradient, loss, G=1.0, dim=2)
    with pytest.raises(ValueError):
        ErmProblem(gradient, loss, G=1.0, dim=2, R=1.0, mu=2.0, lam=1.0)
    assert ErmProblem(gradient, loss, G=1.0, dim=2, mu=4.0, lam=4.0).R == 0.5


def test_generic_problem_clips_long_gradients(caplog):
    dataset = Dataset([Example((0,), 0), Example((1,), 1)], 2)

    def gradient(w, x):
        return np.array([3.0, 4.0]) if x.private_value else np.array([0.3, 0.4])

    problem = ErmProblem(gradient, lambda w, x: 0.0, G=1.0, dim=2, R=1.0)
    assert np.allclose(problem.gradient(np.zeros(2), dataset), [0.45, 0.6])
    assert problem.lipschitz_warnings == 1
    assert 'exceeds G' in caplog.text
    assert np.allclose(problem.query(np.zeros(2)).table(dataset).row(1, 1), [0.6, 0.8])


def test_convex_instance(rng):
    instance = hard_instance_convex(16, 3, R=2.0, G=0.5, seed=1)
    problem, dataset = instance.problem, instance.dataset
    assert problem.dim == 48
    assert instance.optimum_value == pytest.approx(-2.0 * 0.5 / 4.0)
    assert problem.loss(instance.optimum_w, dataset) == pytest.approx(instance.optimum_value)
    assert np.linalg.norm(instance.optimum_w) == pytest.approx(2.0)

    w = random_point_in_ball(rng, problem.dim, 2.0)
    assert instance.excess_risk(w) >= 0
    per_example = np.mean([problem.per_example_gradient(w, x) for x in dataset], axis=0)
    assert np.allclose(problem.gradient(w, dataset), per_example)
    assert problem.loss(w, dataset) == pytest.approx(np.mean([problem.per_example_loss(w, x) for x in dataset]))

    table = problem.query(w).table(dataset)
    for i, x in enumerate(dataset):
        for y in range(dataset.k):
            expected = problem.per_example_gradient(w, Example(x.public_payload, y)) / problem.G
            assert np.allclose(table.row(i, y), expected)


def test_strongly_convex_instance(rng):
    instance = hard_instance_strongly_convex(12, 4, G=1.0, mu=2.0, seed=3)
    problem, dataset = instance.problem, instance.dataset
    assert problem.R == pytest.approx(0.25)
    assert problem.strongly_convex

    for _ in range(10):
        w = random_point_in_ball(rng, problem.dim, problem.R)
        identity = 0.5 * problem.mu * float(np.sum((w - instance.optimum_w) ** 2))
        assert abs(instance.excess_risk(w) - identity) <= 1e-10
        gradients = [problem.per_example_gradient(w, x) for x in dataset]
        assert max(np.linalg.norm(g) for g in gradients) <= problem.G + 1e-12
        assert np.allclose(problem.gradient(w, dataset), np.mean(gradients, axis=0))
        table = problem.query(w).table(dataset)
        assert np.allclose(table.row(5, 2), problem.per_example_gradient(w, Example((5,), 2)) / problem.G)


def test_hard_instance_size_guard():
    with pytest.raises(MemoryGuardExceeded):
        hard_instance_convex(1000, 10, max_dimension=5000)
    with pytest.raises(ValueError):
        hard_instance_strongly_convex(10, 1)


def test_replicate_examples():
    dataset = Dataset([Example((0,), 0), Example((1,), 1)], 2)
    replicated = replicate_examples(dataset, 3)
    assert list(replicated.private_values) == [0, 0, 0, 1, 1, 1]
    assert [x.public_payload for x in replicated] == [(0,)] * 3 + [(1,)] * 3
    assert replicate_examples(dataset, 1) is dataset
    with pytest.raises(ValueError):
        replicate_examples(dataset, 0)


def test_proof_step_counts():
    assert proof_q_convex(100) == 10 ** 4
    assert proof_q_strongly_convex(1.0, 1.0, 0.5, 256) == 1
    assert proof_q_strongly_convex(4.0, 1.0, 100.0, 10) == math.ceil(160 * math.log(4000.0))


def test_exact_convex_descent_reaches_the_optimum():
    instance = hard_instance_convex(256, 4, R=1.0, G=1.0, seed=0)
    report = solve_convex(
        [instance.problem], instance.dataset, q=10 ** 4, exact=True, references=[instance.optimum_value]
    )
    assert not report.failed
    assert report.q == 10 ** 4
    assert report.proof_q == 256 ** 2
    assert report.oracle_queries_used == 10 ** 4
    assert report.excess_risk_vs_reference[0] <= 1.5 / math.sqrt(10 ** 4)
    assert report.excess_risk_vs_reference[0] == pytest.approx(instance.excess_risk(report.iterates[0]))


def test_exact_strongly_convex_descent_is_geometric(rng):
    instance = hard_instance_strongly_convex(64, 4, G=1.0, mu=1.0, seed=2)
    problem = instance.problem
    w0 = random_point_in_ball(rng, problem.dim, problem.R)
    report = solve_strongly_convex(
        [problem], instance.dataset, q=12, w0=w0, exact=True, references=[instance.optimum_value]
    )
    trace = report.traces[0]
    assert len(trace) == 13
    limit = math.exp(-(problem.mu / 2) / (2 * problem.lam)) + 1e-9
    for before, after in zip(trace, trace[1:]):
        if before > 1e-15:
            assert after / before <= limit
    assert report.excess_risk_vs_reference[0] == trace[-1]


def test_strongly_convex_solver_needs_a_smooth_problem():
    instance = hard_instance_convex(8, 2)
    with pytest.raises(ValueError):
        solve_strongly_convex([instance.problem], instance.dataset, rho=1.0, q=1)


def test_budget_is_required():
    instance = hard_instance_convex(8, 2)
    with pytest.raises(ValueError):
        solve_convex([instance.problem], instance.dataset, q=2)


def test_private_convex_run_shares_one_session():
    instance = hard_instance_convex(64, 4, seed=5)
    problems = [instance.problem, instance.problem]
    report = solve_convex(problems, instance.dataset, rho=1.0, q=5, seed=7)
    assert not report.failed
    assert report.oracle_queries_used == 10
    assert report.session['answered'] == 10
    assert report.session['ledger_rho'] == pytest.approx(1.0)
    assert report.theoretical_alpha == pytest.approx(18 * report.eta)
    assert report.excess_risk_vs_reference == [None, None]
    for w in report.iterates:
        assert np.linalg.norm(w) <= instance.problem.R + 1e-12


def test_private_run_from_dp_target():
    instance = hard_instance_strongly_convex(32, 2, seed=1)
    report = solve_strongly_convex(
        [instance.problem],
        instance.dataset,
        eps=1.0,
        delta=1e-6,
        q=3,
        debug_nonprivate=True,
        references=[instance.optimum_value],
    )
    assert report.rho == pytest.approx(0.1 / math.log(1e6))
    assert len(report.traces[0]) == 4
    assert report.upsilon[0] == pytest.approx(report.oracle_noise[0] ** 2 * 1.5)


def test_gradient_oracle_of_a_quiet_session():
    """Huge budget and tau far above any gap: the oracle returns the gradient under uniform beliefs."""
    instance = hard_instance_convex(8, 2, R=1.0, G=0.5, seed=4)
    problem, dataset = instance.problem, instance.dataset
    config = config_from_eta(1e6, 0.1, 2, dataset.n, dataset.k, eta=2.0)
    session = open_session(dataset, config, seed=3)
    w = np.full(problem.dim, 0.1)

    estimate = pvmw_gradient_oracle(session, problem, w)
    expected = problem.G * query_belief_mean(problem.query(w), BeliefState.uniform(dataset.n, dataset.k), dataset)
    assert estimate.shape == (problem.dim,)
    assert np.allclose(estimate, expected)
    assert session.answered == 1
    assert session.update_count == 0
