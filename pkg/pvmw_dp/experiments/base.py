import itertools
import logging
import math
import re
from dataclasses import dataclass
from typing import Optional, Tuple

from pvmw_dp.accountant import group_privacy, rho_for_dp_target, zcdp_to_dp
from pvmw_dp.errors import GroupPrivacyOverflow, InvalidSpec
from pvmw_dp.experiments.config_parts.base_config import BaseConfig
from pvmw_dp.pvmw import lower_bound_group_size

log = logging.getLogger(__name__)

# Options that change how a run is executed, not what it computes; they stay out of the config hash
RUNTIME_OPTIONS = ('out', 'workers', 'transcript')
DEFAULT_GROUP_DELTA = 1e-6
TRUE_WORDS = ('1', 'true', 'yes', 'on')
FALSE_WORDS = ('0', 'false', 'no', 'off')


def _check_range(value, extra):
    if not extra:
        return value
    low, high = extra[0], extra[1]
    if low is not None and value < low:
        raise ValueError('must be at least {}'.format(low))
    if high is not None and value > high:
        raise ValueError('must be at most {}'.format(high))
    return value


def _to_int(raw):
    if isinstance(raw, bool):
        raise ValueError('expected an integer, got {!r}'.format(raw))
    if isinstance(raw, str):
        raw = raw.strip()
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ValueError('expected an integer, got {!r}'.format(raw))
    if not value.is_integer():
        raise ValueError('expected an integer, got {!r}'.format(raw))
    return int(value)


def _to_float(raw):
    if isinstance(raw, bool):
        raise ValueError('expected a number, got {!r}'.format(raw))
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ValueError('expected a number, got {!r}'.format(raw))
    if not math.isfinite(value):
        raise ValueError('expected a finite number, got {!r}'.format(raw))
    return value


def _to_bool(raw):
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in TRUE_WORDS:
        return True
    if text in FALSE_WORDS:
        return False
    raise ValueError('expected true or false, got {!r}'.format(raw))


def _to_list(raw):
    if isinstance(raw, str):
        return [part for part in raw.split(',') if part.strip()]
    if isinstance(raw, (list, tuple)):
        return list(raw)
    return [raw]


def validate_element(element, raw):
    """Convert and check one option value against its ConfigElement."""
    if raw is None or (isinstance(raw, str) and raw == '' and element.default is None):
        if element.default is None:
            return None
        raise ValueError('a value is required')

    kind = element.type
    if kind == 'int':
        return _check_range(_to_int(raw), element.extra)
    if kind == 'float':
        return _check_range(_to_float(raw), element.extra)
    if kind == 'bool':
        return _to_bool(raw)
    if kind == 'string':
        value = str(raw)
        if element.extra and not re.fullmatch(element.extra, value):
            raise ValueError('{!r} does not match {}'.format(value, element.extra))
        return value
    if kind == 'choice':
        tags = [tag for tag, _ in element.extra]
        if raw not in tags:
            raise ValueError('{!r} is not one of {}'.format(raw, ', '.join(tags)))
        return raw
    if kind in ('int_list', 'float_list'):
        convert = _to_int if kind == 'int_list' else _to_float
        values = [_check_range(convert(item), element.extra) for item in _to_list(raw)]
        if not values:
            raise ValueError('at least one value is required')
        return values
    raise ValueError('unknown option type {!r}'.format(kind))


@dataclass(frozen=True)
class ExperimentSpec:
    command: str
    options: dict
    grid: Tuple[dict, ...]
    seeds: Tuple[int, ...]
    query_family: Optional[str]
    output_path: str

    @property
    def debug_nonprivate(self):
        # Exact-gradient runs are never private, so they carry the same marking
        return bool(self.options.get('debug_nonprivate') or self.options.get('exact'))

    def hashed_options(self):
        return {key: value for key, value in self.options.items() if key not in RUNTIME_OPTIONS}

    @classmethod
    def from_options(cls, experiment_class, options):
        """
        Validate raw options against an experiment's ConfigElements.

        :raises InvalidSpec: naming every option that failed, unknown options included
        """
        elements = experiment_class.configure()
        known = {element.key: element for element in elements}
        errors = {}
        for key in options:
            if key not in known:
                errors[key] = 'unknown option for {}'.format(experiment_class.command)

        values = {}
        for element in elements:
            try:
                values[element.key] = validate_element(element, options.get(element.key, element.default))
            except ValueError as e:
                errors[element.key] = str(e)

        if not errors:
            experiment_class.validate(values, errors)
        if errors:
            raise InvalidSpec(sorted(errors), errors)

        grid = tuple(experiment_class.grid(values))
        if not grid:
            raise InvalidSpec(['grid'], {'grid': 'no grid points'})
        return cls(
            command=experiment_class.command,
            options=values,
            grid=grid,
            seeds=tuple(values['seeds']),
            query_family=values.get('query_family'),
            output_path=values['out'],
        )


class ExperimentBase(BaseConfig):
    """
    One harness command.

    An experiment declares its options through ``configure``, expands them into grid points through ``grid`` and
    computes CSV rows for one (grid point, seed) pair in ``run_task``. ``run_task`` runs in worker processes, so it
    must only depend on the spec and its arguments.
    """

    command = None
    title = ''
    grid_keys = ()
    positive_keys = ()
    columns = []
    debug_columns = []

    def __init__(self, spec):
        self.spec = spec
        self.options = spec.options

    @classmethod
    def validate(cls, values, errors):
        seeds = values.get('seeds') or []
        if len(set(seeds)) != len(seeds):
            errors['seeds'] = 'seeds must be distinct'
        for key in cls.positive_keys:
            value = values.get(key)
            if value is None:
                continue
            if any(item <= 0 for item in (value if isinstance(value, list) else [value])):
                errors[key] = '{} must be positive'.format(key)

    @classmethod
    def grid(cls, values):
        """Cartesian product of the list-valued grid options, in declaration order."""
        keys = [key for key in cls.grid_keys if values.get(key) is not None]
        axes = [values[key] if isinstance(values[key], list) else [values[key]] for key in keys]
        return [dict(zip(keys, point)) for point in itertools.product(*axes)]

    @property
    def debug_nonprivate(self):
        return self.spec.debug_nonprivate

    def tasks(self):
        return [(index, point, seed) for index, point in enumerate(self.spec.grid) for seed in self.spec.seeds]

    def run_task(self, point, seed):
        """Return the CSV rows of one grid point and seed."""
        raise NotImplementedError

    def is_failure(self, row):
        return bool(row.get('failed'))

    def output_columns(self):
        return ['config_hash'] + self.columns + self.debug_columns


class BudgetMixin:
    """Privacy budget handling for experiments built on private sessions."""

    @classmethod
    def validate(cls, values, errors):
        super().validate(values, errors)
        if values.get('eps') is not None:
            if values.get('delta') is None:
                errors['delta'] = 'delta is required when eps is given'
            elif not 0 < values['delta'] < 0.5:
                errors['delta'] = 'delta must be in (0, 1/2)'
            if any(e <= 0 for e in values['eps']):
                errors['eps'] = 'eps must be positive'
        elif any(r <= 0 for r in values.get('rho') or []):
            errors['rho'] = 'rho must be positive'
        if values.get('beta') is not None and not 0 < values['beta'] < 0.5:
            errors['beta'] = 'beta must be in (0, 1/2)'
        if values.get('zeta') is not None and not 0 < values['zeta'] < 1:
            errors['zeta'] = 'zeta must be in (0, 1)'

    @classmethod
    def grid(cls, values):
        values = dict(values)
        # The budget axis is eps when given, else rho
        if values.get('eps') is not None:
            values['rho'] = None
        else:
            values['eps'] = None
        return super().grid(values)

    def budget(self, point):
        """Return (rho, eps, delta) of a grid point."""
        delta = self.options.get('delta')
        if point.get('eps') is not None:
            return rho_for_dp_target(point['eps'], delta), point['eps'], delta
        return point['rho'], None, delta

    def replication(self, point, rho, delta):
        """Replication factor of a grid point; ``replicate 0`` derives floor(ln k / eps) from the epsilon of the run."""
        r = self.options.get('replicate', 1)
        if r != 0:
            return r
        epsilon = point.get('eps')
        if epsilon is None:
            epsilon = zcdp_to_dp(rho, delta or DEFAULT_GROUP_DELTA).epsilon
        r = lower_bound_group_size(epsilon, point['k'])
        log.info('replication factor {} for k={}, eps={:.4g}'.format(r, point['k'], epsilon))
        return r

    def group_columns(self, rho, delta, r):
        """Group privacy of a run where every example is repeated r times, as CSV columns."""
        if r == 1:
            return {'replicate': 1, 'group_epsilon': None, 'group_delta': None}
        params = zcdp_to_dp(rho, delta or DEFAULT_GROUP_DELTA)
        try:
            group = group_privacy(params, r)
        except GroupPrivacyOverflow as e:
            log.warning(str(e))
            return {'replicate': r, 'group_epsilon': None, 'group_delta': None}
        return {'replicate': r, 'group_epsilon': group.epsilon, 'group_delta': group.delta}
