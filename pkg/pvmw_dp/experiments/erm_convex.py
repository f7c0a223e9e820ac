from pvmw_dp.erm.hard_instances import hard_instance_convex
from pvmw_dp.erm.solvers import solve_convex
from pvmw_dp.experiments.config_parts.erm_config import ErmConvexConfig
from pvmw_dp.experiments.erm_common import ErmExperiment


class Experiment(ErmExperiment):
    """Projected subgradient descent on the linear hard instance."""

    command = 'erm-convex'
    title = 'Convex ERM on the hard instance'
    positive_keys = ErmExperiment.positive_keys + ('R',)

    @classmethod
    def configure(cls, return_base_config=True):
        return ErmConvexConfig.configure(return_base_config)

    def build_instance(self, point, seed):
        return hard_instance_convex(point['n'], point['k'], R=self.options['R'], G=self.options['G'], seed=seed)

    def solve(self, problems, dataset, rho, seed, references, name):
        options = self.options
        return solve_convex(
            problems,
            dataset,
            rho=rho,
            q=options['q'],
            q_cap=options['q_cap'],
            seed=seed,
            beta=options['beta'],
            exact=options['exact'],
            debug_nonprivate=self.debug_nonprivate,
            references=references,
            name=name,
        )
