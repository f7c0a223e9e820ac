import importlib

EXPERIMENTS = [
    {'tag': 'olvq-sweep', 'class': 'pvmw_dp.experiments.olvq_sweep', 'name': 'Online linear vector query sweep'},
    {'tag': 'erm-convex', 'class': 'pvmw_dp.experiments.erm_convex', 'name': 'Convex ERM on the hard instance'},
    {
        'tag': 'erm-strongly-convex',
        'class': 'pvmw_dp.experiments.erm_strongly_convex',
        'name': 'Strongly convex ERM on the hard instance',
    },
    {
        'tag': 'verify-lemma1',
        'class': 'pvmw_dp.experiments.clip_concentration',
        'name': 'Monte-Carlo check of the clipped-mean concentration bound',
    },
    {'tag': 'mwu-props', 'class': 'pvmw_dp.experiments.mwu_props', 'name': 'Potential decrease of constructed updates'},
    {'tag': 'audit', 'class': 'pvmw_dp.experiments.audit', 'name': 'Privacy ledger of a session'},
]


def experiment_tags():
    return [experiment['tag'] for experiment in EXPERIMENTS]


def get_experiment(tag):
    """Return the Experiment class registered under a command name."""
    for experiment in EXPERIMENTS:
        if experiment['tag'] == tag:
            return getattr(importlib.import_module(experiment['class']), 'Experiment')
    raise KeyError('unknown experiment {!r}, choose from {}'.format(tag, ', '.join(experiment_tags())))
