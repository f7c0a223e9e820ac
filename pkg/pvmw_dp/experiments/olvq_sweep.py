import logging

from pvmw_dp.core import Dataset
from pvmw_dp.erm.hard_instances import replicate_examples
from pvmw_dp.experiments.base import BudgetMixin, ExperimentBase
from pvmw_dp.experiments.config_parts.olvq_config import OlvqConfig
from pvmw_dp.pvmw import config_from_eta, derive_config, open_session, theoretical_alpha
from pvmw_dp.workloads import QueryFamily, feature_dimension, make_workload

log = logging.getLogger(__name__)


class Experiment(BudgetMixin, ExperimentBase):
    """
    Answer a workload of T queries with one private session per grid point and seed.

    Every row reports the derived parameters, how many updates the session consumed and whether it failed. With
    non-private debugging on, the largest l2 error of the returned answers is measured as well.
    """

    command = 'olvq-sweep'
    title = 'Online linear vector query sweep'
    grid_keys = ('n', 'k', 'd', 'rho', 'eps')
    positive_keys = ('beta', 'zeta', 'c', 'eta')
    columns = [
        'n',
        'k',
        'd',
        'rho',
        'eps',
        'delta',
        'beta',
        'T',
        'query_family',
        'seed',
        'eta',
        'tau',
        'L_max',
        'sigma',
        'theoretical_alpha',
        'vacuous_guarantee',
        'updates',
        'answered',
        'failed',
        'unit_ball_warnings',
        'replicate',
        'group_epsilon',
        'group_delta',
    ]
    debug_columns = ['max_error', 'within_alpha']

    @classmethod
    def configure(cls, return_base_config=True):
        return OlvqConfig.configure(return_base_config)

    def session_config(self, rho, n, k):
        options = self.options
        if options.get('eta') is not None:
            return config_from_eta(
                rho, options['beta'], options['T'], n, k, options['eta'], zeta=options['zeta'], c=options['c']
            )
        return derive_config(rho, options['beta'], options['T'], n, k, zeta=options['zeta'], c=options['c'])

    def run_task(self, point, seed):
        options = self.options
        n, k, d = point['n'], point['k'], point['d']
        rho, eps, delta = self.budget(point)
        family = QueryFamily(options['query_family'])

        d_features = feature_dimension(family, d, k)
        r = self.replication(point, rho, delta)
        dataset = replicate_examples(Dataset.synthetic(n, k, d_features, seed), r)
        config = self.session_config(rho, dataset.n, k)
        name = '{}-n{}-k{}-d{}-s{}'.format(self.command, n, k, d, seed)
        session = open_session(dataset, config, seed, name=name, debug_nonprivate=self.debug_nonprivate)

        failed = False
        for answer in session.answer_stream(make_workload(family, dataset, d, options['T'], seed)):
            if not answer.ok:
                failed = True

        row = {
            'n': n,
            'k': k,
            'd': d,
            'rho': rho,
            'eps': eps,
            'delta': delta,
            'beta': options['beta'],
            'T': options['T'],
            'query_family': family.value,
            'seed': seed,
            'eta': config.eta,
            'tau': config.tau,
            'L_max': config.L_max,
            'sigma': config.sigma,
            'theoretical_alpha': theoretical_alpha(config),
            'vacuous_guarantee': config.vacuous_guarantee,
            'updates': session.update_count,
            'answered': session.answered,
            'failed': failed,
            'unit_ball_warnings': session.unit_ball_warnings,
        }
        row.update(self.group_columns(rho, delta, r))
        if self.debug_nonprivate:
            errors = [record['error_vs_truth'] for record in session.transcript if 'error_vs_truth' in record]
            row['max_error'] = max(errors) if errors else None
            row['within_alpha'] = bool(errors) and row['max_error'] <= row['theoretical_alpha']
        log.info('{}: {} answers, {} updates, failed={}'.format(name, session.answered, session.update_count, failed))
        return [row]
