"""
Run an experiment over its grid and write the result CSV.

Tasks (grid point x seed) run in a process pool; the collector sorts the returned rows by grid point, then by the
position of the seed in the spec, so the CSV does not depend on the pool size or on scheduling.
"""
import io
import logging
import multiprocessing as mp
import sys
from dataclasses import dataclass
from typing import List

import pandas as pd

from pvmw_dp.experiments import get_experiment
from pvmw_dp.helper import close_transcript_log, config_hash, ensure_parent_dir, initialize_transcript_log

log = logging.getLogger(__name__)

DEBUG_HEADER = '# NONPRIVATE_DEBUG=1\n'
FLOAT_FORMAT = '%.17g'
STDOUT_PATH = '-'


@dataclass
class RunResult:
    rows: List[dict]
    columns: List[str]
    failures: int
    csv: str


def task_hash(spec, point, seed):
    """Digest of everything a row depends on: command, computing options, grid point and seed."""
    return config_hash({'command': spec.command, 'options': spec.hashed_options(), 'point': point, 'seed': seed})


def run_task(spec, index, point, seed):
    """Run one (grid point, seed) task; module level so the pool can pickle it."""
    experiment = get_experiment(spec.command)(spec)
    digest = task_hash(spec, point, seed)
    rows = [dict(row, config_hash=digest) for row in experiment.run_task(point, seed)]
    return index, spec.seeds.index(seed), rows


def to_csv(rows, columns, debug_nonprivate):
    frame = pd.DataFrame(rows, columns=columns)
    buf = io.StringIO()
    if debug_nonprivate:
        buf.write(DEBUG_HEADER)
    frame.to_csv(buf, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return buf.getvalue()


def write_output(text, path):
    if path == STDOUT_PATH:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    ensure_parent_dir(path)
    with open(path, 'w', newline='') as f:
        f.write(text)


class Runner:
    """
    Executes an :class:`~pvmw_dp.experiments.base.ExperimentSpec`.

    :param ExperimentSpec spec: validated spec
    """

    def __init__(self, spec):
        self.spec = spec
        self.experiment = get_experiment(spec.command)(spec)
        self.workers = spec.options.get('workers', 1)
        self.transcript = spec.options.get('transcript') or None
        if self.transcript and self.workers > 1:
            # Transcript records go through one file handler in this process
            log.warning('a transcript is written, running with one worker instead of {}'.format(self.workers))
            self.workers = 1

    def execute(self):
        tasks = [(self.spec, index, point, seed) for index, point, seed in self.experiment.tasks()]
        log.info('{}: {} tasks on {} worker(s)'.format(self.spec.command, len(tasks), self.workers))
        if self.workers == 1:
            return [run_task(*task) for task in tasks]

        with mp.Pool(processes=self.workers) as pool:
            results = pool.starmap(run_task, tasks)
        return results

    def run(self):
        """
        Run every task and write the CSV.

        :return: :class:`RunResult`; ``failures`` counts rows of failed sessions or checks
        """
        if self.experiment.debug_nonprivate:
            log.warning('non-private debug output requested, the CSV is NOT a private release')
        if self.transcript:
            initialize_transcript_log(self.transcript)
        try:
            results = self.execute()
        finally:
            if self.transcript:
                close_transcript_log()

        rows = [row for _, _, task_rows in sorted(results, key=lambda r: (r[0], r[1])) for row in task_rows]
        # Measurement columns stay in the header and are left empty unless non-private debugging is on
        columns = self.experiment.output_columns()
        failures = sum(1 for row in rows if self.experiment.is_failure(row))
        text = to_csv(rows, columns, self.experiment.debug_nonprivate)
        write_output(text, self.spec.output_path)
        if failures:
            log.error('{}: {} failed row(s)'.format(self.spec.command, failures))
        return RunResult(rows, columns, failures, text)


def run(spec):
    return Runner(spec).run()
