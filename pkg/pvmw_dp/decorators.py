import time
from functools import wraps


def log_duration(label):
    """
    Log how long the wrapped method took.

    It requires ``self.log`` to be set in the calling class (a logger or LoggerAdapter).
    """

    def decorator(func):
        @wraps(func)
        def wrapper(self, *args, **kwargs):
            start = time.perf_counter()
            try:
                return func(self, *args, **kwargs)
            finally:
                delta = time.perf_counter() - start
                self.log.debug('{} took: {:.2f} seconds'.format(label, delta))

        return wrapper

    return decorator
