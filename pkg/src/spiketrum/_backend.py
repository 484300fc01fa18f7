"""Select the compiled core when available, numpy fallback otherwise."""
import os

from . import _fallback

try:
    if os.environ.get("SPIKETRUM_PURE_PYTHON"):
        raise ImportError("pure python requested")
    from . import _core
except ImportError:
    _core = None

_impl = _core if _core is not None else _fallback
BACKEND = "cython" if _core is not None else "python"

DONE = _fallback.DONE
STOP_ENERGY = _fallback.STOP_ENERGY
STOP_NONPOSITIVE = _fallback.STOP_NONPOSITIVE
CLIPPED = _fallback.CLIPPED


def get(name=None):
    """Return the backend module by name ('cython' or 'python'); default is the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "cython":
        if _core is None:
            raise ImportError("compiled core not built")
        return _core
    raise ValueError(f"unknown backend {name!r}")


def available():
    return ["cython", "python"] if _core is not None else ["python"]
