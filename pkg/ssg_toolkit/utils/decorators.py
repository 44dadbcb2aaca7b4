"""Decorators for the scene graph toolkit."""
import functools
import logging

logger = logging.getLogger(__name__)

_MISSING = object()


def log_exceptions(func=None, *, default=_MISSING):
    """Decorator to log exceptions with the failing function's qualified name.

    The exception is re-raised unless a ``default`` is given, in which case the
    default is returned instead. The UI uses the fallback form so a bad file
    does not take the whole page down.
    """
    def decorate(inner):
        @functools.wraps(inner)
        def wrapper(*args, **kwargs):
            try:
                return inner(*args, **kwargs)
            except Exception as e:
                logger.error(f"Failed in {inner.__qualname__}: {e}")
                if default is _MISSING:
                    raise
                return default
        return wrapper

    if func is not None:
        return decorate(func)
    return decorate
