"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-numpy module
is always available. WPA_FORCE_PYTHON_KERNEL=1 pins the fallback (used by
the benchmark and the backend-equivalence tests).
"""

import os

from . import mc_python

try:
    from . import _mc_cython
except ImportError:
    _mc_cython = None

if os.environ.get("WPA_FORCE_PYTHON_KERNEL") == "1" or _mc_cython is None:
    _active = mc_python
else:
    _active = _mc_cython

BACKEND = _active.NAME


def active():
    return _active


def available() -> dict[str, object]:
    out = {mc_python.NAME: mc_python}
    if _mc_cython is not None:
        out[_mc_cython.NAME] = _mc_cython
    return out
