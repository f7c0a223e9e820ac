from pvmw_dp.erm.hard_instances import hard_instance_strongly_convex
from pvmw_dp.erm.solvers import solve_strongly_convex
from pvmw_dp.experiments.config_parts.erm_config import ErmStronglyConvexConfig
from pvmw_dp.experiments.erm_common import ErmExperiment


class Experiment(ErmExperiment):
    """Inexact primal gradient method on the squared-distance hard instance."""

    command = 'erm-strongly-convex'
    title = 'Strongly convex ERM on the hard instance'
    positive_keys = ErmExperiment.positive_keys + ('mu',)
    columns = ErmExperiment.columns + ['upsilon']

    @classmethod
    def configure(cls, return_base_config=True):
        return ErmStronglyConvexConfig.configure(return_base_config)

    def build_instance(self, point, seed):
        options = self.options
        return hard_instance_strongly_convex(point['n'], point['k'], G=options['G'], mu=options['mu'], seed=seed)

    def solve(self, problems, dataset, rho, seed, references, name):
        options = self.options
        return solve_strongly_convex(
            problems,
            dataset,
            rho=rho,
            seed=seed,
            q=options['q'],
            beta=options['beta'],
            exact=options['exact'],
            debug_nonprivate=self.debug_nonprivate,
            references=references,
            name=name,
        )

    def extra_columns(self, report, index):
        return {'upsilon': report.upsilon[index] if report.upsilon else None}
