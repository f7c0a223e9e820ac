import logging

from pvmw_dp.core import Dataset
from pvmw_dp.experiments.base import BudgetMixin, ExperimentBase
from pvmw_dp.experiments.config_parts.verify_config import AuditConfig
from pvmw_dp.pvmw import config_from_eta, derive_config, open_session

log = logging.getLogger(__name__)


class Experiment(BudgetMixin, ExperimentBase):
    """
    Privacy ledger of a freshly opened session, one row per charged mechanism.

    Sessions charge their whole budget when they open, so no queries are needed; the last cumulative value of every
    (grid point, seed) block equals the budget.
    """

    command = 'audit'
    title = 'Privacy ledger audit'
    grid_keys = ('n', 'k', 'rho', 'eps')
    positive_keys = ('beta', 'zeta', 'eta')
    columns = [
        'n',
        'k',
        'budget_rho',
        'eps',
        'delta',
        'seed',
        'L_max',
        'label',
        'rho',
        'cumulative_rho',
    ]

    @classmethod
    def configure(cls, return_base_config=True):
        return AuditConfig.configure(return_base_config)

    def run_task(self, point, seed):
        options = self.options
        n, k = point['n'], point['k']
        budget_rho, eps, delta = self.budget(point)
        if options.get('eta') is not None:
            config = config_from_eta(
                budget_rho, options['beta'], options['T'], n, k, options['eta'], zeta=options['zeta']
            )
        else:
            config = derive_config(budget_rho, options['beta'], options['T'], n, k, zeta=options['zeta'])
        session = open_session(Dataset.synthetic(n, k, 0, seed), config, seed, name='audit-n{}-k{}'.format(n, k))

        head = {
            'n': n,
            'k': k,
            'budget_rho': budget_rho,
            'eps': eps,
            'delta': delta,
            'seed': seed,
            'L_max': config.L_max,
        }
        rows = [dict(head, **charge) for charge in session.ledger.to_rows()]
        log.info('{} charges, {:.17g} of {:.17g} spent'.format(len(rows), session.ledger.spent, budget_rho))
        return rows
