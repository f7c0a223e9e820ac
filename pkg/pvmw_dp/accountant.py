"""zCDP ledger, composition and conversions to and from (epsilon, delta)-DP."""
import io
import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import pandas as pd

from pvmw_dp.errors import BudgetExceeded, GroupPrivacyOverflow

log = logging.getLogger(__name__)

BUDGET_SLACK = 1e-12
MAX_GROUP_EXPONENT = 700.0

Charge = namedtuple('Charge', 'label rho')


@dataclass(frozen=True)
class DpParams:
    epsilon: float
    delta: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError('epsilon must be nonnegative, got {}'.format(self.epsilon))
        if not 0 <= self.delta < 1:
            raise ValueError('delta must be in [0, 1), got {}'.format(self.delta))


def compose(charges):
    """Total zCDP parameter of a sequence of mechanisms."""
    charges = list(charges)
    for rho in charges:
        if rho < 0:
            raise ValueError('zCDP charges must be nonnegative, got {}'.format(rho))
    return math.fsum(charges)


def _check_delta(delta):
    if not 0 < delta < 0.5:
        raise ValueError('delta must be in (0, 1/2), got {}'.format(delta))


def zcdp_to_dp(rho, delta):
    _check_delta(delta)
    if rho < 0:
        raise ValueError('rho must be nonnegative, got {}'.format(rho))
    return DpParams(rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta)), delta)


def dp_to_zcdp(epsilon):
    if epsilon < 0:
        raise ValueError('epsilon must be nonnegative, got {}'.format(epsilon))
    return 0.5 * epsilon ** 2


def rho_for_dp_target(epsilon, delta):
    """zCDP budget that yields (epsilon, delta)-DP after conversion."""
    _check_delta(delta)
    if not epsilon > 0:
        raise ValueError('epsilon must be positive, got {}'.format(epsilon))
    log_inv_delta = math.log(1.0 / delta)
    if epsilon >= math.sqrt(log_inv_delta):
        log.warning(
            'epsilon={} is outside (0, sqrt(ln(1/delta))) = (0, {:.4f}); accuracy guarantees assume the narrower '
            'range'.format(epsilon, math.sqrt(log_inv_delta))
        )
    return 0.1 * epsilon ** 2 / log_inv_delta


def group_privacy(params, r):
    """
    Privacy of groups of ``r`` examples under an (epsilon, delta)-DP mechanism.

    :raises GroupPrivacyOverflow: when ``r * epsilon`` overflows or the resulting delta reaches 1
    """
    if int(r) != r or r < 1:
        raise ValueError('group size must be a positive integer, got {}'.format(r))
    r = int(r)
    if r == 1:
        return params
    if params.epsilon == 0:
        ratio = float(r)
    else:
        if r * params.epsilon > MAX_GROUP_EXPONENT:
            raise GroupPrivacyOverflow(
                'r * epsilon = {:.1f} overflows; use a smaller group or a smaller epsilon'.format(r * params.epsilon)
            )
        ratio = math.expm1(r * params.epsilon) / math.expm1(params.epsilon)
    delta = ratio * params.delta
    if delta >= 1:
        raise GroupPrivacyOverflow(
            'group of size {} turns delta={} into {:.3g} >= 1; the guarantee is vacuous'.format(r, params.delta, delta)
        )
    return DpParams(r * params.epsilon, delta)


def gaussian_zcdp(sensitivity, sigma):
    """zCDP of adding N(0, sigma^2) noise to a query with the given l2 sensitivity."""
    return sensitivity ** 2 / (2.0 * sigma ** 2)


def laplace_zcdp(sensitivity, scale):
    """zCDP of adding Lap(scale) noise to a query with the given l1 sensitivity."""
    return dp_to_zcdp(sensitivity / scale)


def pvmw_slot_charges(eps_prime, sigma, slot):
    """The three charges of one update slot of a private multiplicative weight session."""
    return [
        Charge('above_threshold[{}]'.format(slot), dp_to_zcdp(eps_prime)),
        Charge('norm_estimate[{}]'.format(slot), laplace_zcdp(1.0, 1.0 / eps_prime)),
        Charge('gaussian[{}]'.format(slot), gaussian_zcdp(2.0, sigma)),
    ]


class ZcdpLedger:
    """
    Labelled record of zCDP charges against a fixed budget.

    Charging beyond ``budget_rho`` raises :class:`BudgetExceeded` and leaves the ledger unchanged.
    """

    def __init__(self, budget_rho):
        if budget_rho < 0:
            raise ValueError('budget must be nonnegative, got {}'.format(budget_rho))
        self.budget_rho = float(budget_rho)
        self.charges = []

    def __len__(self):
        return len(self.charges)

    def __repr__(self):
        return 'ZcdpLedger(budget_rho={}, spent={}, charges={})'.format(self.budget_rho, self.spent, len(self))

    @property
    def spent(self):
        return compose(c.rho for c in self.charges)

    @property
    def remaining(self):
        return max(0.0, self.budget_rho - self.spent)

    def charge(self, label, rho):
        if rho < 0:
            raise ValueError('zCDP charges must be nonnegative, got {} for {}'.format(rho, label))
        spent = self.spent
        total = compose([c.rho for c in self.charges] + [rho])
        if total > self.budget_rho * (1.0 + BUDGET_SLACK):
            raise BudgetExceeded(label, rho, spent, self.budget_rho)
        self.charges.append(Charge(label, float(rho)))
        log.debug('charged {} rho={:.6g}, total {:.6g} of {:.6g}'.format(label, rho, total, self.budget_rho))
        return total

    def charge_all(self, charges):
        """Charge several mechanisms at once; either all of them are recorded or none."""
        charges = [Charge(label, float(rho)) for label, rho in charges]
        spent = self.spent
        total = compose([c.rho for c in self.charges] + [c.rho for c in charges])
        if total > self.budget_rho * (1.0 + BUDGET_SLACK):
            label = charges[-1].label if charges else ''
            raise BudgetExceeded(label, total - spent, spent, self.budget_rho)
        self.charges.extend(charges)
        log.debug('charged {} mechanisms, total {:.6g} of {:.6g}'.format(len(charges), total, self.budget_rho))
        return total

    def to_rows(self):
        rows = []
        running = []
        for c in self.charges:
            running.append(c.rho)
            rows.append({'label': c.label, 'rho': c.rho, 'cumulative_rho': math.fsum(running)})
        return rows

    def audit_csv(self, path=None):
        """
        Write the ledger as CSV with columns label,rho,cumulative_rho.

        :return: the CSV text when ``path`` is None
        """
        frame = pd.DataFrame(self.to_rows(), columns=['label', 'rho', 'cumulative_rho'])
        if path is None:
            buf = io.StringIO()
            frame.to_csv(buf, index=False, float_format='%.17g', lineterminator='\n')
            return buf.getvalue()
        frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
        return None
