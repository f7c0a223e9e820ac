import logging

from pvmw_dp.erm.hard_instances import replicate_examples
from pvmw_dp.experiments.base import BudgetMixin, ExperimentBase

log = logging.getLogger(__name__)


class ErmExperiment(BudgetMixin, ExperimentBase):
    """
    Solve m copies of a hard instance against one shared session and report one row per problem.

    Subclasses build the instance and call their solver; excess risks against the closed-form optimum are measured
    only for exact or non-private debug runs.
    """

    grid_keys = ('n', 'k', 'rho', 'eps')
    positive_keys = ('G', 'beta')
    columns = [
        'n',
        'k',
        'm',
        'problem_id',
        'd',
        'rho',
        'eps',
        'delta',
        'seed',
        'exact',
        'q',
        'proof_q',
        'eta',
        'theoretical_alpha',
        'oracle_noise',
        'vacuous_guarantee',
        'oracle_queries',
        'updates',
        'failed',
        'replicate',
        'group_epsilon',
        'group_delta',
    ]
    debug_columns = ['excess_risk']

    def build_instance(self, point, seed):
        raise NotImplementedError

    def solve(self, problems, dataset, rho, seed, references, name):
        raise NotImplementedError

    def extra_columns(self, report, index):
        return {}

    def run_task(self, point, seed):
        options = self.options
        n, k = point['n'], point['k']
        rho, eps, delta = self.budget(point)
        exact = options['exact']

        instance = self.build_instance(point, seed)
        # Replication repeats every example, so the empirical loss and its optimum are unchanged
        r = self.replication(point, rho, delta)
        dataset = replicate_examples(instance.dataset, r)
        problems = [instance.problem] * options['m']
        references = [instance.optimum_value] * options['m']
        name = '{}-n{}-k{}-s{}'.format(self.command, n, k, seed)
        report = self.solve(problems, dataset, None if exact else rho, seed, references, name)

        rows = []
        for index in range(options['m']):
            row = {
                'n': n,
                'k': k,
                'm': options['m'],
                'problem_id': index,
                'd': instance.problem.dim,
                'rho': None if exact else rho,
                'eps': eps,
                'delta': delta,
                'seed': seed,
                'exact': exact,
                'q': report.q,
                'proof_q': report.proof_q,
                'eta': report.eta,
                'theoretical_alpha': report.theoretical_alpha,
                'oracle_noise': report.oracle_noise[index],
                'vacuous_guarantee': report.vacuous_guarantee,
                'oracle_queries': report.oracle_queries_used,
                'updates': report.session['updates'] if report.session else None,
                'failed': report.failed,
            }
            if exact:
                row.update({'replicate': r, 'group_epsilon': None, 'group_delta': None})
            else:
                row.update(self.group_columns(rho, delta, r))
            row.update(self.extra_columns(report, index))
            if self.debug_nonprivate:
                row['excess_risk'] = report.excess_risk_vs_reference[index]
            rows.append(row)
        log.info('{}: {} oracle queries, failed={}'.format(name, report.oracle_queries_used, report.failed))
        return rows
