"""Global numerical configuration (Planck constant, kernel backend selection)."""

import os
from contextlib import contextmanager

_DEFAULT_HBAR = 1.0
_hbar = _DEFAULT_HBAR


def get_hbar():
    """Return the current value of the reduced Planck constant."""
    return _hbar


def set_hbar(value):
    """Set the global reduced Planck constant used as a default by all routines.

    Parameters
    ----------
    value : float
        New value, must be positive.
    """
    global _hbar
    value = float(value)
    if not value > 0.0:
        raise ValueError("hbar must be positive, got %r" % value)
    _hbar = value


@contextmanager
def hbar_context(value):
    """Context manager that temporarily sets the global hbar."""
    global _hbar
    old = _hbar
    set_hbar(value)
    try:
        yield
    finally:
        _hbar = old


def resolve_hbar(hbar=None):
    """Return ``hbar`` if given, else the global default."""
    if hbar is None:
        return _hbar
    hbar = float(hbar)
    if not hbar > 0.0:
        raise ValueError("hbar must be positive, got %r" % hbar)
    return hbar


def numba_disabled():
    """True when the pure-numpy fallback kernels were requested via environment.

    Set ``PHASEFOLD_DISABLE_NUMBA=1`` before import to force the fallback path.
    """
    return os.environ.get("PHASEFOLD_DISABLE_NUMBA", "0") not in ("", "0")
