"""Kernel backend selected at import: compiled ``_core`` if present, else numpy."""
import os

from . import _pycore

_choice = os.environ.get("PNTAP_BACKEND", "auto").lower()

if _choice == "python":
    kernels = _pycore
else:
    try:
        from . import _core as kernels
    except ImportError:
        if _choice == "cython":
            raise
        kernels = _pycore

BACKEND = kernels.BACKEND


def available():
    """Names of importable backends, compiled first."""
    names = []
    try:
        from . import _core  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    names.append("python")
    return names


def get(name):
    if name == "python":
        return _pycore
    from . import _core
    return _core
