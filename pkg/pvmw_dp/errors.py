import logging

log = logging.getLogger(__name__)


class PvmwError(Exception):
    pass


class DimensionMismatch(PvmwError, ValueError):
    pass


class InvalidDataset(PvmwError, ValueError):
    pass


class PotentialDiverged(PvmwError, ArithmeticError):
    """A belief row puts zero mass on the example's true private value."""

    def __init__(self, index):
        super().__init__('potential diverged: example {} has zero belief on its private value'.format(index))
        self.index = index


class BudgetExceeded(PvmwError):
    def __init__(self, label, rho, spent, budget):
        super().__init__(
            'charging {!r} ({:.6g}) would bring the ledger to {:.12g}, above the budget {:.12g}'.format(
                label, rho, spent + rho, budget
            )
        )
        self.label = label


class SessionFailed(PvmwError):
    """Raised when a FAILed session is used again."""

    pass


class QueryBudgetExceeded(PvmwError):
    pass


class NoCrossingFound(PvmwError, ArithmeticError):
    pass


class MemoryGuardExceeded(PvmwError, MemoryError):
    pass


class GroupPrivacyOverflow(PvmwError, OverflowError):
    pass


class InvalidSpec(PvmwError, ValueError):
    """Experiment options failed validation; ``fields`` names every offending option."""

    def __init__(self, fields, messages=None):
        self.fields = list(fields)
        self.messages = dict(messages or {})
        details = ', '.join('{} ({})'.format(f, self.messages[f]) if f in self.messages else f for f in self.fields)
        super().__init__('invalid experiment options: {}'.format(details))


def UnitBallViolation(count, where):
    log.warning("[UnitBall] %d query output(s) exceeded norm 1 in %s and were rescaled", count, where)
