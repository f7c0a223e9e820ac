import io
import json
import logging
import math

import pandas as pd
import pytest

from pvmw_dp.accountant import group_privacy, zcdp_to_dp
from pvmw_dp.errors import InvalidSpec
from pvmw_dp.experiments import EXPERIMENTS, experiment_tags, get_experiment
from pvmw_dp.experiments.base import ExperimentSpec, validate_element
from pvmw_dp.experiments.config_parts.base_config import ConfigElement
from pvmw_dp.runner import DEBUG_HEADER, Runner, run, task_hash

log = logging.getLogger("pvmw_dp")
log.setLevel(logging.DEBUG)

pytestmark = pytest.mark.mandatory

SMALL_SWEEP = {'n': [64], 'k': [4], 'd': [4], 'T': 4, 'rho': [0.5], 'seeds': [1, 2]}


def make_spec(command, **options):
    return ExperimentSpec.from_options(get_experiment(command), options)


def read_csv(text):
    return pd.read_csv(io.StringIO(text), comment='#')


def test_registry():
    assert experiment_tags() == [experiment['tag'] for experiment in EXPERIMENTS]
    for tag in experiment_tags():
        experiment = get_experiment(tag)
        assert experiment.command == tag
        assert {element.key for element in experiment.configure()} >= {'seeds', 'out', 'workers'}
    with pytest.raises(KeyError):
        get_experiment('nope')


@pytest.mark.parametrize(
    'element, raw, expected',
    [
        (ConfigElement('n', 'int', 1, '', '', (1, None, '')), '8', 8),
        (ConfigElement('n', 'int', 1, '', '', (1, None, '')), 8.0, 8),
        (ConfigElement('x', 'float', 1.0, '', '', None), '1e-3', 0.001),
        (ConfigElement('b', 'bool', False, '', '', None), 'yes', True),
        (ConfigElement('s', 'int_list', [0], '', '', None), '1,2,3', [1, 2, 3]),
        (ConfigElement('r', 'float_list', [1.0], '', '', None), 0.5, [0.5]),
        (ConfigElement('e', 'float', None, '', '', None), None, None),
    ],
)
def test_validate_element(element, raw, expected):
    assert validate_element(element, raw) == expected


@pytest.mark.parametrize(
    'element, raw',
    [
        (ConfigElement('n', 'int', 1, '', '', (1, None, '')), 0),
        (ConfigElement('n', 'int', 1, '', '', None), 1.5),
        (ConfigElement('n', 'int', 1, '', '', None), True),
        (ConfigElement('x', 'float', 1.0, '', '', None), 'abc'),
        (ConfigElement('b', 'bool', False, '', '', None), 'maybe'),
        (ConfigElement('c', 'choice', 'A', '', '', [('A', 'a'), ('B', 'b')]), 'C'),
        (ConfigElement('s', 'int_list', [0], '', '', None), []),
    ],
)
def test_validate_element_rejects(element, raw):
    with pytest.raises(ValueError):
        validate_element(element, raw)


def test_invalid_spec_names_every_field():
    with pytest.raises(InvalidSpec) as excinfo:
        make_spec('olvq-sweep', n=[0], T=-1, bogus=1)
    assert excinfo.value.fields == ['T', 'bogus', 'n']
    assert 'unknown option' in excinfo.value.messages['bogus']


@pytest.mark.parametrize(
    'options, field',
    [
        ({'eps': [1.0]}, 'delta'),
        ({'eps': [1.0], 'delta': 0.6}, 'delta'),
        ({'rho': [0.0]}, 'rho'),
        ({'seeds': [1, 1]}, 'seeds'),
        ({'beta': 0.5}, 'beta'),
        ({'zeta': 1.0}, 'zeta'),
        ({'query_family': 'NOPE'}, 'query_family'),
    ],
)
def test_invalid_sweep_options(options, field):
    with pytest.raises(InvalidSpec) as excinfo:
        make_spec('olvq-sweep', **options)
    assert field in excinfo.value.fields


def test_grid_is_a_cartesian_product():
    spec = make_spec('olvq-sweep', n=[64, 128], k=[4], d=[4, 8])
    assert [(p['n'], p['d']) for p in spec.grid] == [(64, 4), (64, 8), (128, 4), (128, 8)]
    assert all(p['rho'] == 1.0 and 'eps' not in p for p in spec.grid)


def test_eps_replaces_the_rho_axis():
    spec = make_spec('olvq-sweep', eps=[0.5, 1.0], delta=1e-6)
    assert [p['eps'] for p in spec.grid] == [0.5, 1.0]
    assert all('rho' not in p for p in spec.grid)


def test_runtime_options_stay_out_of_the_hash():
    a = make_spec('audit', out='a.csv', workers=1)
    b = make_spec('audit', out='b.csv', workers=4)
    assert task_hash(a, a.grid[0], 0) == task_hash(b, b.grid[0], 0)
    c = make_spec('audit', T=32)
    assert task_hash(a, a.grid[0], 0) != task_hash(c, c.grid[0], 0)


def test_sweep_is_deterministic(tmp_path):
    path = tmp_path / 'sweep.csv'
    first = Runner(make_spec('olvq-sweep', out=str(path), **SMALL_SWEEP)).run()
    second = Runner(make_spec('olvq-sweep', out=str(tmp_path / 'again.csv'), workers=2, **SMALL_SWEEP)).run()
    assert path.read_text() == first.csv
    assert first.csv == second.csv
    assert not first.csv.startswith('#')

    frame = read_csv(first.csv)
    assert list(frame.columns) == first.columns
    assert list(frame['seed']) == [1, 2]
    assert list(frame['answered']) == [4, 4]
    assert not frame['failed'].any()
    assert frame['max_error'].isna().all()
    assert first.failures == 0


def test_sweep_columns(tmp_path):
    spec = make_spec('olvq-sweep', out=str(tmp_path / 'sweep.csv'), **SMALL_SWEEP)
    result = Runner(spec).run()
    header = result.csv.splitlines()[0].split(',')
    assert header[0] == 'config_hash'
    assert header[-2:] == ['max_error', 'within_alpha']
    assert header == result.columns


def test_debug_output_is_marked(tmp_path):
    spec = make_spec('olvq-sweep', out=str(tmp_path / 'debug.csv'), debug_nonprivate=True, **SMALL_SWEEP)
    result = Runner(spec).run()
    assert result.csv.startswith(DEBUG_HEADER)
    frame = read_csv(result.csv)
    assert frame['max_error'].notna().all()
    assert (frame['max_error'] <= 2.0).all()


def test_replicated_sweep_reports_group_privacy(tmp_path):
    options = dict(SMALL_SWEEP, seeds=[1], replicate=2, delta=1e-6)
    result = Runner(make_spec('olvq-sweep', out=str(tmp_path / 'group.csv'), **options)).run()
    row = result.rows[0]
    expected = group_privacy(zcdp_to_dp(0.5, 1e-6), 2)
    assert row['replicate'] == 2
    assert row['group_epsilon'] == pytest.approx(expected.epsilon)
    assert row['group_delta'] == pytest.approx(expected.delta)


def test_replication_derived_from_epsilon(tmp_path):
    options = dict(SMALL_SWEEP, k=[16], seeds=[1], replicate=0, eps=[0.5], delta=1e-6)
    result = Runner(make_spec('olvq-sweep', out=str(tmp_path / 'derived.csv'), **options)).run()
    row = result.rows[0]
    assert row['replicate'] == math.floor(math.log(16) / 0.5)
    expected = group_privacy(zcdp_to_dp(row['rho'], 1e-6), row['replicate'])
    assert row['group_epsilon'] == pytest.approx(expected.epsilon)


def test_replication_derived_from_rho(tmp_path):
    options = dict(SMALL_SWEEP, seeds=[1], replicate=0, rho=[0.001])
    row = Runner(make_spec('olvq-sweep', out=str(tmp_path / 'derived.csv'), **options)).run().rows[0]
    epsilon = zcdp_to_dp(0.001, 1e-6).epsilon
    assert row['replicate'] == math.floor(math.log(4) / epsilon) > 1


def test_transcript_forces_one_worker(tmp_path):
    transcript = tmp_path / 'run.jsonl'
    out = str(tmp_path / 'sweep.csv')
    spec = make_spec('olvq-sweep', out=out, workers=2, transcript=str(transcript), **SMALL_SWEEP)
    runner = Runner(spec)
    assert runner.workers == 1
    runner.run()
    records = [json.loads(line) for line in transcript.read_text().splitlines()]
    assert len(records) == 8
    assert {record['status'] for record in records} == {'OK'}


def test_audit_sums_to_the_budget(tmp_path):
    spec = make_spec('audit', n=[64], k=[4], rho=[0.5], eta=0.5, seeds=[3], out=str(tmp_path / 'a.csv'))
    result = Runner(spec).run()
    frame = read_csv(result.csv)
    assert len(frame) == 3 * frame['L_max'][0]
    assert frame['L_max'][0] == 1 + math.floor(math.log(4) / 0.25)
    assert math.isclose(frame['cumulative_rho'].iloc[-1], 0.5, rel_tol=1e-12)
    assert list(frame['label'][:3]) == ['above_threshold[1]', 'norm_estimate[1]', 'gaussian[1]']


def test_exact_erm_run_is_marked_nonprivate(tmp_path):
    spec = make_spec('erm-convex', n=[16], k=[2], m=2, q=200, exact=True, out=str(tmp_path / 'erm.csv'))
    assert spec.debug_nonprivate
    result = Runner(spec).run()
    assert result.csv.startswith(DEBUG_HEADER)
    frame = read_csv(result.csv)
    assert list(frame['problem_id']) == [0, 1]
    assert (frame['d'] == 32).all()
    assert frame['rho'].isna().all()
    assert (frame['excess_risk'] >= 0).all()
    assert (frame['excess_risk'] <= 1.5 / math.sqrt(200)).all()
    assert (frame['oracle_queries'] == 400).all()


def test_private_strongly_convex_run(tmp_path):
    spec = make_spec('erm-strongly-convex', n=[32], k=[2], q=3, rho=[0.5], seeds=[4], out=str(tmp_path / 'erm.csv'))
    result = Runner(spec).run()
    row = result.rows[0]
    assert not row['failed']
    assert row['q'] == 3
    assert row['upsilon'] == pytest.approx(row['oracle_noise'] ** 2 * 1.5)
    assert 'excess_risk' not in row


def test_clip_concentration_experiment(tmp_path):
    spec = make_spec(
        'verify-lemma1', sigma_z=[0.1, 0.2], d=[4], support=8, trials=10 ** 4, out=str(tmp_path / 'lemma.csv')
    )
    result = run(spec)
    assert result.failures == 0
    assert [row['sigma_z'] for row in result.rows] == [0.1, 0.2]
    assert all(row['mu_norm'] <= 2.0 for row in result.rows)


def test_mwu_properties_experiment(tmp_path):
    spec = make_spec('mwu-props', instances=50, max_steps=2000, seeds=[0, 1], out=str(tmp_path / 'mwu.csv'))
    result = Runner(spec).run()
    assert result.failures == 0
    assert all(row['accepted'] > 0 for row in result.rows)
    assert all(row['min_drop_ratio'] >= 1.0 - 1e-6 for row in result.rows)


def debug_run(tmp_path, command, **options):
    spec = make_spec(command, out=str(tmp_path / '{}.csv'.format(command)), debug_nonprivate=True, **options)
    return read_csv(Runner(spec).run().csv)


@pytest.mark.slow
def test_sweep_never_fails_and_stays_within_alpha(tmp_path):
    frame = debug_run(
        tmp_path, 'olvq-sweep', n=[2048], k=[16], d=[32], rho=[1.0], beta=0.1, T=64, seeds=list(range(50))
    )
    assert len(frame) == 50
    assert not frame['failed'].any()
    assert (frame['answered'] == 64).all()
    assert frame['within_alpha'].mean() >= 0.9


@pytest.mark.slow
def test_sweep_error_shrinks_with_n(tmp_path):
    frame = debug_run(
        tmp_path, 'olvq-sweep', n=[1024, 4096, 16384], k=[16], d=[32], rho=[1.0], T=16, seeds=list(range(10))
    )
    medians = frame.groupby('n')['max_error'].median()
    assert medians[4096] <= medians[1024]
    assert medians[16384] <= medians[4096]
    assert medians[16384] <= 0.75 * medians[4096]


@pytest.mark.slow
def test_sweep_error_does_not_grow_with_d(tmp_path):
    frame = debug_run(tmp_path, 'olvq-sweep', n=[4096], k=[16], d=[16, 256], rho=[1.0], T=16, seeds=list(range(10)))
    medians = frame.groupby('d')['max_error'].median()
    assert medians[256] <= 1.5 * medians[16]


@pytest.mark.slow
def test_private_convex_excess_risk_shrinks_with_n(tmp_path):
    frame = debug_run(tmp_path, 'erm-convex', n=[2048, 8192], k=[4], rho=[1.0], q=200, seeds=list(range(10)))
    assert not frame['failed'].any()
    medians = frame.groupby('n')['excess_risk'].median()
    assert medians[8192] <= 0.8 * medians[2048]


@pytest.mark.slow
def test_private_strongly_convex_excess_risk_shrinks_with_n(tmp_path):
    frame = debug_run(
        tmp_path, 'erm-strongly-convex', n=[2048, 8192], k=[4], rho=[1.0], q=20, seeds=list(range(10))
    )
    assert not frame['failed'].any()
    medians = frame.groupby('n')['excess_risk'].median()
    assert medians[8192] <= 0.5 * medians[2048]


@pytest.mark.slow
def test_shared_session_treats_problems_alike(tmp_path):
    frame = debug_run(tmp_path, 'erm-convex', n=[256], k=[4], m=2, rho=[1.0], q=100, seeds=list(range(20)))
    assert not frame['failed'].any()
    medians = frame.groupby('problem_id')['excess_risk'].median()
    assert medians[0] <= 2 * medians[1]
    assert medians[1] <= 2 * medians[0]
