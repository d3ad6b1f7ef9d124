"""Kernel dispatch: compiled Cython loops when built, numpy otherwise.

``BACKEND`` names the implementation picked at import. ``use_backend`` lets
benchmarks and tests switch explicitly.
"""
from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_NAMES = ("enumerate_sector", "hopping_moves", "string_moves", "wrap_angles", "plaquette_sums")

BACKEND = None


def available_backends():
    return ("cython", "numpy") if _ckernels is not None else ("numpy",)


def use_backend(name):
    """Select ``"cython"`` or ``"numpy"`` for all kernel entry points."""
    global BACKEND
    if name == "cython":
        if _ckernels is None:
            raise ImportError("qlmdyn._ckernels is not built")
        mod = _ckernels
    elif name == "numpy":
        mod = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    for attr in _NAMES:
        globals()[attr] = getattr(mod, attr)
    BACKEND = name


def get_backend(name):
    """Return the module implementing ``name`` without changing the default."""
    if name == "cython":
        if _ckernels is None:
            raise ImportError("qlmdyn._ckernels is not built")
        return _ckernels
    return _pykernels


link_z = _pykernels.link_z
matter_z = _pykernels.matter_z

use_backend("cython" if _ckernels is not None else "numpy")
